#include "practica/scenario_format.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "practica/text.hpp"

namespace practica {

using doc::Value;

bool has_errors(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::error; });
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        if (d.severity != Severity::error) continue;
        if (!out.empty()) out += "\n";
        out += format_diagnostic(d);
    }
    return out.empty() ? "invalid document" : out;
}

}  // namespace

FormatError::FormatError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

// ---------------------------------------------------------------------------
// Reading helpers

namespace {

struct Ctx {
    std::vector<Diagnostic> diags;
    std::map<std::string, SourceSpan> subjects;
    std::set<std::string> unread_kinds;
    SourceSpan root;

    void error(std::string code, std::string message, const SourceSpan& span) {
        diags.push_back({Severity::error, std::move(code), std::move(message), span});
    }
    void warning(std::string code, std::string message, const SourceSpan& span) {
        diags.push_back({Severity::warning, std::move(code), std::move(message), span});
    }
    void subject(std::string key, const SourceSpan& span) { subjects[std::move(key)] = span; }

    SourceSpan locate(const std::string& subject) const {
        if (auto it = subjects.find(subject); it != subjects.end()) return it->second;
        if (auto hash = subject.find('#'); hash != std::string::npos) return locate(subject.substr(0, hash));
        return root;
    }
};

std::string in_quotes(std::string_view s) { return "\"" + std::string(s) + "\""; }

// Field access on one JSON object. Keys never asked for are reported as
// UNKNOWN_FIELD warnings when the reader goes out of scope.
class Obj {
public:
    Obj(const Value& v, Ctx& ctx, std::string what) : v_(v), ctx_(ctx), what_(std::move(what)) {
        ok_ = v.is_object();
        if (!ok_) ctx.error("TYPE_MISMATCH", what_ + " must be an object", v.span());
    }
    Obj(const Obj&) = delete;
    Obj& operator=(const Obj&) = delete;
    ~Obj() {
        if (!ok_) return;
        for (const auto& m : v_.members())
            if (!known_.count(m.key))
                ctx_.warning("UNKNOWN_FIELD", "unknown field " + in_quotes(m.key) + " in " + what_, m.key_span);
    }

    bool ok() const { return ok_; }
    const Value& value() const { return v_; }
    const SourceSpan& span() const { return v_.span(); }

    const Value* field(const std::string& key, bool required, Value::Type type) {
        known_.insert(key);
        if (!ok_) return nullptr;
        const Value* f = v_.get(key);
        if (!f) {
            if (required) ctx_.error("MISSING_FIELD", what_ + " is missing " + in_quotes(key), v_.span());
            return nullptr;
        }
        if (f->type() != type) {
            ctx_.error("TYPE_MISMATCH",
                       in_quotes(key) + " in " + what_ + " must be " + std::string(doc::type_name(type)) + ", found " +
                           std::string(doc::type_name(f->type())),
                       f->span());
            return nullptr;
        }
        return f;
    }

    const Value* any(const std::string& key) {
        known_.insert(key);
        return ok_ ? v_.get(key) : nullptr;
    }

    std::optional<std::string> str(const std::string& key, bool required) {
        const Value* f = field(key, required, Value::Type::string);
        if (!f) return std::nullopt;
        return f->as_string();
    }

    std::optional<double> num(const std::string& key, bool required) {
        const Value* f = field(key, required, Value::Type::number);
        if (!f) return std::nullopt;
        if (!std::isfinite(f->as_number())) {
            ctx_.error("INVALID_VALUE", in_quotes(key) + " must be finite", f->span());
            return std::nullopt;
        }
        return f->as_number();
    }

    const Value* arr(const std::string& key, bool required) { return field(key, required, Value::Type::array); }
    const Value* obj(const std::string& key, bool required) { return field(key, required, Value::Type::object); }

    // Array of strings; wrong elements are reported and skipped.
    std::vector<std::pair<std::string, SourceSpan>> strings(const std::string& key, bool required) {
        std::vector<std::pair<std::string, SourceSpan>> out;
        const Value* a = arr(key, required);
        if (!a) return out;
        for (const auto& item : a->items()) {
            if (!item.is_string()) {
                ctx_.error("TYPE_MISMATCH", "elements of " + in_quotes(key) + " must be strings", item.span());
                continue;
            }
            out.emplace_back(item.as_string(), item.span());
        }
        return out;
    }

    std::vector<std::string> string_list(const std::string& key, bool required) {
        std::vector<std::string> out;
        for (auto& [s, _] : strings(key, required)) out.push_back(std::move(s));
        return out;
    }

    std::set<std::string> string_set(const std::string& key, bool required) {
        std::set<std::string> out;
        for (auto& [s, span] : strings(key, required))
            if (!out.insert(s).second) ctx_.warning("DUPLICATE_VALUE", "repeated value " + in_quotes(s), span);
        return out;
    }

private:
    const Value& v_;
    Ctx& ctx_;
    std::string what_;
    bool ok_ = false;
    std::set<std::string> known_;
};

void check_version(Obj& root, Ctx& ctx) {
    const Value* f = root.field("format_version", true, Value::Type::number);
    if (f && f->as_number() != kFormatVersion)
        ctx.error("UNSUPPORTED_VERSION",
                  "format_version " + format_number(f->as_number()) + " is not supported (expected " +
                      std::to_string(kFormatVersion) + ")",
                  f->span());
}

std::optional<Emotion> read_emotion(const Value& v, Ctx& ctx) {
    if (!v.is_string()) {
        ctx.error("TYPE_MISMATCH", "emotion must be a string", v.span());
        return std::nullopt;
    }
    auto e = parse_emotion(v.as_string());
    if (!e) ctx.error("UNKNOWN_EMOTION", "unknown emotion " + in_quotes(v.as_string()), v.span());
    return e;
}

std::optional<Comparison> read_comparison(Obj& o, Ctx& ctx) {
    const Value* f = o.field("op", true, Value::Type::string);
    if (!f) return std::nullopt;
    auto c = parse_comparison(f->as_string());
    if (!c) ctx.error("INVALID_VALUE", "unknown comparison " + in_quotes(f->as_string()), f->span());
    return c;
}

EmotionDelta read_delta(const Value& v, Ctx& ctx) {
    EmotionDelta d;
    if (!v.is_object()) {
        ctx.error("TYPE_MISMATCH", "emotion changes must be an object", v.span());
        return d;
    }
    for (const auto& m : v.members()) {
        auto e = parse_emotion(m.key);
        if (!e) {
            ctx.error("UNKNOWN_EMOTION", "unknown emotion " + in_quotes(m.key), m.key_span);
            continue;
        }
        if (!m.value.is_number() || !std::isfinite(m.value.as_number())) {
            ctx.error("TYPE_MISMATCH", "change of " + m.key + " must be a number", m.value.span());
            continue;
        }
        d[*e] = m.value.as_number();
    }
    return d;
}

EventPattern read_pattern(const Value& v, Ctx& ctx, const std::string& what) {
    EventPattern p;
    Obj o(v, ctx, what);
    if (!o.ok()) return p;
    p.event = o.str("event", true).value_or("");
    p.before_scene = o.str("before_scene", false);
    p.after_scene = o.str("after_scene", false);
    if (const Value* e = o.field("dominant_emotion", false, Value::Type::string)) p.dominant_emotion = read_emotion(*e, ctx);
    if (const Value* g = o.obj("parameter", false)) {
        Obj go(*g, ctx, "parameter guard");
        ParameterGuard guard;
        guard.name = go.str("name", true).value_or("");
        auto op = read_comparison(go, ctx);
        auto val = go.num("value", true);
        if (op && val) {
            guard.op = *op;
            guard.value = *val;
            p.parameter = guard;
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Activation networks

struct NetworkSpans {
    std::map<std::string, SourceSpan> nodes;
    std::map<std::string, std::vector<SourceSpan>> rows;
};

struct NodeDraft {
    NodeDefinition def;
    const Value* cpt = nullptr;
    std::vector<SourceSpan> parent_spans;
    SourceSpan span;
};

bool read_cpt_leaf(const Value& v, const NodeDefinition& node, Ctx& ctx, const std::string& where,
                   std::vector<double>& row) {
    if (!v.is_object()) {
        ctx.error("TYPE_MISMATCH", "CPT row" + where + " of " + node.name + " must be an object of probabilities",
                  v.span());
        return false;
    }
    bool ok = true;
    for (const auto& m : v.members())
        if (std::find(node.states.begin(), node.states.end(), m.key) == node.states.end()) {
            ctx.error("CPT_UNKNOWN_STATE", "unknown state " + in_quotes(m.key) + " of " + node.name + " in CPT row" + where,
                      m.key_span);
            ok = false;
        }
    for (const auto& s : node.states) {
        const Value* p = v.get(s);
        if (!p) {
            ctx.error("CPT_MISSING_ENTRY", "CPT row" + where + " of " + node.name + " lacks state " + in_quotes(s), v.span());
            ok = false;
            continue;
        }
        if (!p->is_number() || !std::isfinite(p->as_number())) {
            ctx.error("TYPE_MISMATCH", "probability must be a number", p->span());
            ok = false;
            continue;
        }
        row.push_back(p->as_number());
    }
    return ok;
}

bool read_cpt_level(const Value& v, const NodeDefinition& node, const std::vector<const NodeDraft*>& parents,
                    std::size_t level, const std::string& where, Ctx& ctx, NodeDefinition& out,
                    std::vector<SourceSpan>& row_spans) {
    if (level == parents.size()) {
        std::vector<double> row;
        const bool ok = read_cpt_leaf(v, node, ctx, where, row);
        out.cpt.push_back(std::move(row));
        row_spans.push_back(v.span());
        return ok;
    }
    const NodeDefinition& parent = parents[level]->def;
    if (!v.is_object()) {
        ctx.error("TYPE_MISMATCH", "CPT of " + node.name + " must be keyed by states of " + parent.name, v.span());
        return false;
    }
    bool ok = true;
    for (const auto& m : v.members())
        if (std::find(parent.states.begin(), parent.states.end(), m.key) == parent.states.end()) {
            ctx.error("CPT_UNKNOWN_STATE",
                      "unknown state " + in_quotes(m.key) + " of parent " + parent.name + " in CPT of " + node.name,
                      m.key_span);
            ok = false;
        }
    for (const auto& s : parent.states) {
        const std::string here = where + (where.empty() ? " " : ",") + parent.name + "=" + s;
        const Value* sub = v.get(s);
        if (!sub) {
            ctx.error("CPT_MISSING_ROW", "CPT of " + node.name + " has no row for" + here, v.span());
            ok = false;
            continue;
        }
        ok = read_cpt_level(*sub, node, parents, level + 1, here, ctx, out, row_spans) && ok;
    }
    return ok;
}

std::optional<ActivationNetwork> read_network(const Value& v, Ctx& ctx, NetworkSpans& spans) {
    Obj o(v, ctx, "activation");
    if (!o.ok()) return std::nullopt;
    const std::size_t errors_before = ctx.diags.size();
    NetworkDefinition def;
    def.root = o.str("root", true).value_or("");
    if (const Value* r = o.field("root", false, Value::Type::string)) ctx.subject("network-root", r->span());

    std::vector<NodeDraft> drafts;
    if (const Value* nodes = o.arr("nodes", true)) {
        for (const auto& item : nodes->items()) {
            Obj n(item, ctx, "network node");
            if (!n.ok()) continue;
            NodeDraft d;
            d.span = item.span();
            d.def.name = n.str("name", true).value_or("");
            d.def.states = n.string_list("states", true);
            for (auto& [p, s] : n.strings("parents", false)) {
                d.def.parents.push_back(std::move(p));
                d.parent_spans.push_back(s);
            }
            d.cpt = n.field("cpt", true, Value::Type::object);
            spans.nodes.emplace(d.def.name, d.span);
            drafts.push_back(std::move(d));
        }
    }

    std::map<std::string, const NodeDraft*> by_name;
    for (const auto& d : drafts) by_name.emplace(d.def.name, &d);

    bool structural_ok = true;
    for (auto& d : drafts) {
        std::vector<const NodeDraft*> parents;
        for (std::size_t i = 0; i < d.def.parents.size(); ++i) {
            auto it = by_name.find(d.def.parents[i]);
            if (it == by_name.end()) {
                ctx.error("UNKNOWN_PARENT", "node " + d.def.name + " names unknown parent " + in_quotes(d.def.parents[i]),
                          d.parent_spans[i]);
                structural_ok = false;
            } else {
                parents.push_back(it->second);
            }
        }
        if (!d.cpt || parents.size() != d.def.parents.size()) {
            structural_ok = false;
            continue;
        }
        std::vector<SourceSpan>& rows = spans.rows[d.def.name];
        rows.clear();
        if (!read_cpt_level(*d.cpt, d.def, parents, 0, "", ctx, d.def, rows)) structural_ok = false;
    }
    for (auto& d : drafts) def.nodes.push_back(std::move(d.def));

    const bool new_errors = std::any_of(ctx.diags.begin() + static_cast<std::ptrdiff_t>(errors_before), ctx.diags.end(),
                                        [](const Diagnostic& d) { return d.severity == Severity::error; });
    if (!structural_ok || new_errors) return std::nullopt;

    auto problems = validate_network(def);
    for (const auto& p : problems) {
        SourceSpan span = v.span();
        if (auto it = spans.nodes.find(p.node); it != spans.nodes.end()) span = it->second;
        if (p.row) {
            auto rit = spans.rows.find(p.node);
            if (rit != spans.rows.end() && *p.row < rit->second.size()) span = rit->second[*p.row];
        }
        if (p.code == "NETWORK_ROOT" && p.node == def.root) {
            if (auto it = ctx.subjects.find("network-root"); it != ctx.subjects.end() && !spans.nodes.count(p.node))
                span = it->second;
        }
        ctx.error(p.code, p.message, span);
    }
    if (!problems.empty()) return std::nullopt;
    return ActivationNetwork(std::move(def));
}

// ---------------------------------------------------------------------------
// Practices

std::vector<Role> read_roles(Obj& o, Ctx& ctx, const std::string& key, bool required) {
    std::vector<Role> out;
    for (const auto& [label, span] : o.strings(key, required)) {
        auto r = parse_role(label);
        if (!r) {
            ctx.error("INVALID_VALUE", "unknown role " + in_quotes(label), span);
            continue;
        }
        if (std::find(out.begin(), out.end(), *r) != out.end()) {
            ctx.warning("DUPLICATE_VALUE", "repeated role " + in_quotes(label), span);
            continue;
        }
        out.push_back(*r);
    }
    return out;
}

void read_social_context(const Value& v, Ctx& ctx, SocialContext& sc) {
    Obj o(v, ctx, "social_context");
    if (!o.ok()) return;
    sc.roles = read_roles(o, ctx, "roles", true);
    if (const Value* interp = o.obj("interpretations", false)) {
        for (const auto& m : interp->members()) {
            Obj io(m.value, ctx, "interpretation of " + m.key);
            if (!io.ok()) continue;
            Interpretation in;
            in.expected_state = io.str("expect", true).value_or("");
            in.expectation = io.str("expectation", true).value_or("");
            sc.interpretations[m.key] = in;
            ctx.subject("interpretation:" + m.key, m.value.span());
        }
    }
    if (const Value* norms = o.arr("norms", false)) {
        for (const auto& item : norms->items()) {
            Obj no(item, ctx, "norm");
            if (!no.ok()) continue;
            Norm n;
            n.id = no.str("id", true).value_or("");
            n.description = no.str("description", false).value_or("");
            if (const Value* t = no.obj("trigger", true)) n.trigger = read_pattern(*t, ctx, "trigger of norm " + n.id);
            n.violation_meaning = no.str("violation_meaning", true).value_or("");
            if (const Value* e = no.any("emotion_effect")) n.emotion_effect = read_delta(*e, ctx);
            ctx.subject("norm:" + n.id, item.span());
            sc.norms.push_back(std::move(n));
        }
    }
}

std::optional<ActKind> read_act_kind(const Value& v, Ctx& ctx) {
    if (!v.is_string()) {
        ctx.error("TYPE_MISMATCH", "act kind must be a string", v.span());
        return std::nullopt;
    }
    auto k = parse_act_kind(v.as_string());
    if (!k) ctx.error("INVALID_VALUE", "unknown act kind " + in_quotes(v.as_string()), v.span());
    return k;
}

void read_plan(const Value& v, Ctx& ctx, PlanPattern& plan, const std::string& practice_id) {
    Obj o(v, ctx, "plan_pattern");
    if (!o.ok()) return;
    ctx.subject("plan_pattern:" + practice_id, v.span());
    if (const Value* scenes = o.arr("scenes", true)) {
        for (const auto& item : scenes->items()) {
            Obj so(item, ctx, "scene");
            if (!so.ok()) continue;
            Scene s;
            s.id = so.str("id", true).value_or("");
            s.sub_goal = so.str("sub_goal", false).value_or("");
            if (const Value* kinds = so.arr("admissible_act_kinds", true))
                for (const auto& k : kinds->items())
                    if (auto kind = read_act_kind(k, ctx)) s.admissible_act_kinds.insert(*kind);
            if (const Value* c = so.obj("completion", true)) s.completion = read_pattern(*c, ctx, "completion of scene " + s.id);
            ctx.subject("scene:" + s.id, item.span());
            plan.scenes.push_back(std::move(s));
        }
    }
    if (const Value* quits = o.arr("quit_conditions", false)) {
        for (const auto& item : quits->items()) {
            Obj qo(item, ctx, "quit condition");
            if (!qo.ok()) continue;
            auto norm = qo.str("norm_violation", false);
            auto comp = qo.str("missing_competence", false);
            if (norm.has_value() == comp.has_value()) {
                ctx.error("INVALID_VALUE", "quit condition needs exactly one of \"norm_violation\" or \"missing_competence\"",
                          item.span());
                continue;
            }
            QuitCondition q;
            q.kind = norm ? QuitCondition::Kind::norm_violation : QuitCondition::Kind::missing_competence;
            q.ref = norm ? *norm : *comp;
            ctx.subject("quit:" + q.ref, item.span());
            plan.quit_conditions.push_back(std::move(q));
        }
    }
}

void read_activities(const Value& v, Ctx& ctx, std::vector<SpeechActTemplate>& out) {
    for (const auto& item : v.items()) {
        Obj ao(item, ctx, "activity");
        if (!ao.ok()) continue;
        SpeechActTemplate a;
        a.id = ao.str("id", true).value_or("");
        bool kinds_read = true;
        if (const Value* c = ao.field("act_class", true, Value::Type::string)) {
            if (auto cls = parse_act_class(c->as_string()))
                a.act_class = *cls;
            else {
                ctx.error("INVALID_VALUE", "unknown act class " + in_quotes(c->as_string()), c->span());
                kinds_read = false;
            }
        } else {
            kinds_read = false;
        }
        if (const Value* k = ao.any("act_kind")) {
            if (auto kind = read_act_kind(*k, ctx))
                a.act_kind = *kind;
            else
                kinds_read = false;
        } else {
            ctx.error("MISSING_FIELD", "activity is missing \"act_kind\"", item.span());
            kinds_read = false;
        }
        if (!kinds_read) ctx.unread_kinds.insert("activity:" + a.id);
        a.surface_text = ao.str("text", true).value_or("");
        a.meaning_tags = ao.string_set("meaning_tags", false);
        ctx.subject("activity:" + a.id, item.span());
        out.push_back(std::move(a));
    }
}

void map_model_diagnostics(const std::vector<ModelDiagnostic>& model, Ctx& ctx, bool skip_network) {
    for (const auto& d : model) {
        if (skip_network && d.subject.rfind("network:", 0) == 0) continue;
        if (d.code == "ACT_KIND_MISMATCH" && ctx.unread_kinds.count(d.subject)) continue;
        ctx.diags.push_back({d.severity, d.code, d.message, ctx.locate(d.subject)});
    }
}

}  // namespace

PracticeDocument parse_practice(std::string_view text, std::string file) {
    PracticeDocument out;
    auto parsed = doc::parse(text, file);
    Ctx ctx;
    ctx.diags = std::move(parsed.diagnostics);
    if (!parsed.value) {
        out.diagnostics = std::move(ctx.diags);
        return out;
    }
    const Value& v = *parsed.value;
    ctx.root = v.span();
    ctx.root.length = std::min<std::size_t>(ctx.root.length, 1);

    SocialPractice p;
    bool network_failed = true;
    {
        Obj root(v, ctx, "practice");
        if (root.ok()) {
            check_version(root, ctx);
            p.id = root.str("id", true).value_or("");
            if (const Value* idv = root.field("id", false, Value::Type::string)) {
                ctx.subject("practice:" + p.id, idv->span());
                ctx.subject("network:" + p.id, idv->span());
            }
            p.description = root.str("description", false).value_or("");
            p.refines = root.str("refines", false);
            if (const Value* pc = root.obj("physical_context", false)) {
                Obj po(*pc, ctx, "physical_context");
                p.physical_context.resources = po.string_list("resources", false);
                p.physical_context.places = po.string_list("places", false);
                p.physical_context.actors = po.string_list("actors", false);
            }
            if (const Value* sc = root.obj("social_context", true)) read_social_context(*sc, ctx, p.social_context);
            if (const Value* acts = root.arr("activities", false)) read_activities(*acts, ctx, p.activities);
            if (const Value* plan = root.obj("plan_pattern", true)) read_plan(*plan, ctx, p.plan_pattern, p.id);
            p.meanings = root.string_set("meanings", false);
            if (const Value* rules = root.arr("meaning_rules", false)) {
                for (const auto& item : rules->items()) {
                    Obj ro(item, ctx, "meaning rule");
                    if (!ro.ok()) continue;
                    MeaningRule r;
                    r.after_tag = ro.str("after", true).value_or("");
                    r.if_tag = ro.str("if", true).value_or("");
                    r.then_meaning = ro.str("then", true).value_or("");
                    r.otherwise_meaning = ro.str("otherwise", true).value_or("");
                    p.meaning_rules.push_back(std::move(r));
                }
            }
            p.competences = root.string_set("competences", false);
            if (const Value* act = root.obj("activation", true)) {
                ctx.subject("network:" + p.id, act->span());
                NetworkSpans spans;
                if (auto net = read_network(*act, ctx, spans)) {
                    p.activation = std::move(*net);
                    network_failed = false;
                }
            }
        }
    }
    if (v.is_object()) map_model_diagnostics(validate_practice(p), ctx, network_failed);

    out.diagnostics = std::move(ctx.diags);
    if (!has_errors(out.diagnostics)) out.practice = std::move(p);
    return out;
}

// ---------------------------------------------------------------------------
// Scenarios

namespace {

std::optional<Condition> read_condition(const Value& v, Ctx& ctx, const std::string& statement) {
    Obj o(v, ctx, "condition");
    if (!o.ok()) return std::nullopt;
    auto list = [&](const Value& a) {
        std::vector<Condition> out;
        for (const auto& item : a.items())
            if (auto c = read_condition(item, ctx, statement)) out.push_back(std::move(*c));
        return out;
    };
    if (const Value* a = o.any("all")) {
        if (!a->is_array()) ctx.error("TYPE_MISMATCH", "\"all\" must be an array of conditions", a->span());
        return Condition::all_of(a->is_array() ? list(*a) : std::vector<Condition>{});
    }
    if (const Value* a = o.any("any")) {
        if (!a->is_array()) ctx.error("TYPE_MISMATCH", "\"any\" must be an array of conditions", a->span());
        return Condition::any_of(a->is_array() ? list(*a) : std::vector<Condition>{});
    }
    if (const Value* n = o.any("not")) {
        auto inner = read_condition(*n, ctx, statement);
        if (!inner) return std::nullopt;
        return Condition::negation(std::move(*inner));
    }
    if (const Value* p = o.any("parameter")) {
        if (!p->is_string()) {
            ctx.error("TYPE_MISMATCH", "\"parameter\" must be a string", p->span());
            return std::nullopt;
        }
        ctx.subject("statement:" + statement + "#when:" + p->as_string(), p->span());
        auto op = read_comparison(o, ctx);
        auto val = o.num("value", true);
        if (!op || !val) return std::nullopt;
        return Condition::parameter_is(p->as_string(), *op, *val);
    }
    if (const Value* e = o.any("emotion")) {
        auto emo = read_emotion(*e, ctx);
        auto op = read_comparison(o, ctx);
        auto val = o.num("value", true);
        if (!emo || !op || !val) return std::nullopt;
        return Condition::emotion_is(*emo, *op, *val);
    }
    if (const Value* d = o.any("dominant")) {
        auto emo = read_emotion(*d, ctx);
        if (!emo) return std::nullopt;
        return Condition::dominant(*emo);
    }
    if (const Value* s = o.field("visited", false, Value::Type::string)) {
        ctx.subject("statement:" + statement + "#visited:" + s->as_string(), s->span());
        return Condition::visited_node(s->as_string());
    }
    if (const Value* a = o.field("always", false, Value::Type::boolean)) {
        if (a->as_bool()) return Condition{};
        return Condition::negation(Condition{});
    }
    ctx.error("INVALID_VALUE",
              "condition needs one of \"all\", \"any\", \"not\", \"parameter\", \"emotion\", \"dominant\", \"visited\", "
              "\"always\"",
              v.span());
    return std::nullopt;
}

std::optional<NodeSpec> read_statement(const Value& v, Ctx& ctx) {
    Obj o(v, ctx, "statement");
    if (!o.ok()) return std::nullopt;
    NodeSpec n;
    n.id = o.str("id", true).value_or("");
    ctx.subject("statement:" + n.id, v.span());
    if (const Value* s = o.field("speaker", true, Value::Type::string)) {
        if (s->as_string() == "player")
            n.speaker = Speaker::player;
        else if (s->as_string() == "computer")
            n.speaker = Speaker::computer;
        else
            ctx.error("INVALID_VALUE", "speaker must be \"player\" or \"computer\"", s->span());
    }
    n.text = o.str("text", true).value_or("");
    if (const Value* k = o.any("act_kind")) n.act_kind = read_act_kind(*k, ctx);
    if (const Value* w = o.any("when")) n.precondition = read_condition(*w, ctx, n.id);
    if (const Value* e = o.obj("effects", false)) {
        Obj eo(*e, ctx, "effects");
        if (const Value* ps = eo.obj("parameters", false)) {
            for (const auto& m : ps->members()) {
                if (!m.value.is_number() || !std::isfinite(m.value.as_number())) {
                    ctx.error("TYPE_MISMATCH", "change of " + m.key + " must be a number", m.value.span());
                    continue;
                }
                n.effects.parameters[m.key] = m.value.as_number();
                ctx.subject("statement:" + n.id + "#effect:" + m.key, m.key_span);
            }
        }
        if (const Value* em = eo.any("emotions")) n.effects.emotions = read_delta(*em, ctx);
    }
    n.meaning_tags = o.string_set("tags", false);
    n.emits = o.string_list("emits", false);
    if (const Value* obs = o.obj("observes", false)) {
        for (const auto& m : obs->members()) {
            if (!m.value.is_string()) {
                ctx.error("TYPE_MISMATCH", "observed state of " + m.key + " must be a string", m.value.span());
                continue;
            }
            n.observes[m.key] = m.value.as_string();
        }
    }
    if (const Value* next = o.arr("next", false))
        for (const auto& item : next->items())
            if (auto child = read_statement(item, ctx)) n.children.push_back(std::move(*child));
    return n;
}

}  // namespace

ScenarioDocument parse_scenario(std::string_view text, std::string file) {
    ScenarioDocument out;
    auto parsed = doc::parse(text, file);
    Ctx ctx;
    ctx.diags = std::move(parsed.diagnostics);
    if (!parsed.value) {
        out.diagnostics = std::move(ctx.diags);
        return out;
    }
    const Value& v = *parsed.value;
    ctx.root = v.span();
    ctx.root.length = std::min<std::size_t>(ctx.root.length, 1);

    Scenario sc;
    {
        Obj root(v, ctx, "scenario");
        if (root.ok()) {
            check_version(root, ctx);
            sc.id = root.str("id", true).value_or("");
            if (const Value* idv = root.field("id", false, Value::Type::string)) {
                ctx.subject("scenario:" + sc.id, idv->span());
                ctx.subject("scenario:", idv->span());
            }
            sc.title = root.str("title", false).value_or("");
            if (const Value* r = root.field("role_played", true, Value::Type::string)) {
                if (auto role = parse_role(r->as_string()))
                    sc.role_played = *role;
                else
                    ctx.error("INVALID_VALUE", "unknown role " + in_quotes(r->as_string()), r->span());
            }
            if (const Value* a = root.obj("agent", true)) {
                Obj ao(*a, ctx, "agent");
                sc.agent.agent_id = ao.str("id", true).value_or("");
                if (const Value* r = ao.field("role", true, Value::Type::string)) {
                    if (auto role = parse_role(r->as_string()))
                        sc.agent.role = *role;
                    else
                        ctx.error("INVALID_VALUE", "unknown role " + in_quotes(r->as_string()), r->span());
                }
                sc.agent.competences = ao.string_set("competences", false);
            }
            if (const Value* pre = root.obj("preamble", false)) {
                for (const auto& m : pre->members()) {
                    if (!m.value.is_string()) {
                        ctx.error("TYPE_MISMATCH", "observed state of " + m.key + " must be a string", m.value.span());
                        continue;
                    }
                    sc.preamble.values[m.key] = m.value.as_string();
                }
            }
            if (const Value* params = root.arr("parameters", false)) {
                for (const auto& item : params->items()) {
                    Obj po(item, ctx, "parameter");
                    if (!po.ok()) continue;
                    Parameter p;
                    p.name = po.str("name", true).value_or("");
                    p.initial = po.num("initial", true).value_or(0.0);
                    if (const Value* range = po.arr("range", true)) {
                        const auto& items = range->items();
                        if (items.size() != 2 || !items[0].is_number() || !items[1].is_number())
                            ctx.error("TYPE_MISMATCH", "range must be [low, high]", range->span());
                        else {
                            p.lo = items[0].as_number();
                            p.hi = items[1].as_number();
                        }
                    }
                    ctx.subject("parameter:" + p.name, item.span());
                    sc.parameters.push_back(std::move(p));
                }
            }
            if (const Value* em = root.obj("emotions", false)) {
                std::array<double, kEmotionCount> scores{};
                for (const auto& m : em->members()) {
                    auto e = parse_emotion(m.key);
                    if (!e) {
                        ctx.error("UNKNOWN_EMOTION", "unknown emotion " + in_quotes(m.key), m.key_span);
                        continue;
                    }
                    if (!m.value.is_number() || m.value.as_number() < 0.0 || m.value.as_number() > 1.0) {
                        ctx.error("RANGE", "initial score of " + m.key + " must lie in [0,1]", m.value.span());
                        continue;
                    }
                    scores[static_cast<std::size_t>(*e)] = m.value.as_number();
                }
                sc.emotion_initial = EmotionVector(scores);
            }
            if (const Value* ils = root.arr("interleaves", true)) {
                for (const auto& item : ils->items()) {
                    Obj io(item, ctx, "interleave");
                    if (!io.ok()) continue;
                    Interleave il;
                    il.id = io.str("id", true).value_or("");
                    for (auto& [t, span] : io.strings("trees", true)) {
                        ctx.subject("interleave:" + il.id + "#tree:" + t, span);
                        il.trees.push_back(std::move(t));
                    }
                    if (const Value* c = io.any("completion")) {
                        if (c->is_string() && c->as_string() == "any_one")
                            il.completion.kind = CompletionRule::Kind::any_one;
                        else if (c->is_string() && c->as_string() == "all")
                            il.completion.kind = CompletionRule::Kind::all;
                        else if (c->is_object()) {
                            Obj co(*c, ctx, "completion");
                            il.completion.kind = CompletionRule::Kind::explicit_list;
                            il.completion.trees = co.string_list("trees", true);
                        } else
                            ctx.error("INVALID_VALUE", "completion must be \"any_one\", \"all\" or {\"trees\": [...]}",
                                      c->span());
                    }
                    ctx.subject("interleave:" + il.id, item.span());
                    sc.interleaves.push_back(std::move(il));
                }
            }
            if (const Value* trees = root.arr("trees", true)) {
                for (const auto& item : trees->items()) {
                    Obj to(item, ctx, "tree");
                    if (!to.ok()) continue;
                    std::string id = to.str("id", true).value_or("");
                    std::vector<NodeSpec> roots;
                    if (const Value* st = to.arr("statements", true))
                        for (const auto& s : st->items())
                            if (auto n = read_statement(s, ctx)) roots.push_back(std::move(*n));
                    ctx.subject("tree:" + id, item.span());
                    sc.add_tree(std::move(id), std::move(roots));
                }
            }
        }
    }
    if (v.is_object()) map_model_diagnostics(validate_scenario(sc), ctx, false);

    out.diagnostics = std::move(ctx.diags);
    if (!has_errors(out.diagnostics)) out.scenario = std::move(sc);
    return out;
}

// ---------------------------------------------------------------------------
// Writing

namespace {

Value strings_value(const auto& range) {
    Value a = Value::array();
    for (const auto& s : range) a.push(Value::string(std::string(s)));
    return a;
}

Value delta_value(const EmotionDelta& d) {
    Value o = Value::object();
    for (Emotion e : kAllEmotions)
        if (d[e] != 0.0) o.set(std::string(to_string(e)), Value::number(d[e]));
    return o;
}

Value pattern_value(const EventPattern& p) {
    Value o = Value::object();
    o.set("event", Value::string(p.event));
    if (p.before_scene) o.set("before_scene", Value::string(*p.before_scene));
    if (p.after_scene) o.set("after_scene", Value::string(*p.after_scene));
    if (p.dominant_emotion) o.set("dominant_emotion", Value::string(std::string(to_string(*p.dominant_emotion))));
    if (p.parameter) {
        Value g = Value::object();
        g.set("name", Value::string(p.parameter->name));
        g.set("op", Value::string(std::string(to_string(p.parameter->op))));
        g.set("value", Value::number(p.parameter->value));
        o.set("parameter", std::move(g));
    }
    return o;
}

void set_nonempty(Value& o, const std::string& key, Value v) {
    if ((v.is_array() && v.items().empty()) || (v.is_object() && v.members().empty()) ||
        (v.is_string() && v.as_string().empty()))
        return;
    o.set(key, std::move(v));
}

Value cpt_value(const ActivationNetwork& net, std::size_t node) {
    const NodeDefinition& def = net.definition().nodes[node];
    std::vector<const NodeDefinition*> parents;
    for (const auto& p : def.parents) parents.push_back(&net.node(*net.index_of(p)));
    std::size_t row = 0;
    std::function<Value(std::size_t)> level = [&](std::size_t depth) {
        Value o = Value::object();
        if (depth == parents.size()) {
            const auto& probs = def.cpt.at(row++);
            for (std::size_t s = 0; s < def.states.size(); ++s) o.set(def.states[s], Value::number(probs.at(s)));
            return o;
        }
        for (const auto& s : parents[depth]->states) o.set(s, level(depth + 1));
        return o;
    };
    return level(0);
}

Value network_value(const ActivationNetwork& net) {
    Value o = Value::object();
    o.set("root", Value::string(net.root()));
    Value nodes = Value::array();
    for (std::size_t i = 0; i < net.definition().nodes.size(); ++i) {
        const auto& def = net.definition().nodes[i];
        Value n = Value::object();
        n.set("name", Value::string(def.name));
        n.set("states", strings_value(def.states));
        set_nonempty(n, "parents", strings_value(def.parents));
        n.set("cpt", cpt_value(net, i));
        nodes.push(std::move(n));
    }
    o.set("nodes", std::move(nodes));
    return o;
}

Value condition_value(const Condition& c) {
    Value o = Value::object();
    auto list = [&] {
        Value a = Value::array();
        for (const auto& ch : c.children) a.push(condition_value(ch));
        return a;
    };
    switch (c.kind) {
        case Condition::Kind::always: o.set("always", Value::boolean(true)); break;
        case Condition::Kind::all: o.set("all", list()); break;
        case Condition::Kind::any: o.set("any", list()); break;
        case Condition::Kind::negate:
            if (c.children.size() == 1 && c.children[0].kind == Condition::Kind::always)
                o.set("always", Value::boolean(false));
            else
                o.set("not", c.children.empty() ? Value::object() : condition_value(c.children[0]));
            break;
        case Condition::Kind::parameter:
            o.set("parameter", Value::string(c.name));
            o.set("op", Value::string(std::string(to_string(c.op))));
            o.set("value", Value::number(c.value));
            break;
        case Condition::Kind::emotion:
            o.set("emotion", Value::string(std::string(to_string(c.emotion))));
            o.set("op", Value::string(std::string(to_string(c.op))));
            o.set("value", Value::number(c.value));
            break;
        case Condition::Kind::dominant_emotion: o.set("dominant", Value::string(std::string(to_string(c.emotion)))); break;
        case Condition::Kind::visited: o.set("visited", Value::string(c.name)); break;
    }
    return o;
}

Value statement_value(const NodeSpec& n) {
    Value o = Value::object();
    o.set("id", Value::string(n.id));
    o.set("speaker", Value::string(std::string(to_string(n.speaker))));
    o.set("text", Value::string(n.text));
    if (n.act_kind) o.set("act_kind", Value::string(std::string(to_string(*n.act_kind))));
    if (n.precondition) o.set("when", condition_value(*n.precondition));
    if (!n.effects.empty()) {
        Value e = Value::object();
        Value ps = Value::object();
        for (const auto& [k, d] : n.effects.parameters) ps.set(k, Value::number(d));
        set_nonempty(e, "parameters", std::move(ps));
        set_nonempty(e, "emotions", delta_value(n.effects.emotions));
        o.set("effects", std::move(e));
    }
    set_nonempty(o, "tags", strings_value(n.meaning_tags));
    set_nonempty(o, "emits", strings_value(n.emits));
    Value obs = Value::object();
    for (const auto& [k, s] : n.observes) obs.set(k, Value::string(s));
    set_nonempty(o, "observes", std::move(obs));
    Value next = Value::array();
    for (const auto& c : n.children) next.push(statement_value(c));
    set_nonempty(o, "next", std::move(next));
    return o;
}

}  // namespace

doc::Value to_document(const SocialPractice& p) {
    Value o = Value::object();
    o.set("format_version", Value::number(kFormatVersion));
    o.set("id", Value::string(p.id));
    set_nonempty(o, "description", Value::string(p.description));
    if (p.refines) o.set("refines", Value::string(*p.refines));

    Value pc = Value::object();
    set_nonempty(pc, "resources", strings_value(p.physical_context.resources));
    set_nonempty(pc, "places", strings_value(p.physical_context.places));
    set_nonempty(pc, "actors", strings_value(p.physical_context.actors));
    set_nonempty(o, "physical_context", std::move(pc));

    Value sc = Value::object();
    Value roles = Value::array();
    for (Role r : p.social_context.roles) roles.push(Value::string(std::string(to_string(r))));
    sc.set("roles", std::move(roles));
    Value interp = Value::object();
    for (const auto& [var, in] : p.social_context.interpretations) {
        Value i = Value::object();
        i.set("expect", Value::string(in.expected_state));
        i.set("expectation", Value::string(in.expectation));
        interp.set(var, std::move(i));
    }
    set_nonempty(sc, "interpretations", std::move(interp));
    Value norms = Value::array();
    for (const auto& n : p.social_context.norms) {
        Value no = Value::object();
        no.set("id", Value::string(n.id));
        set_nonempty(no, "description", Value::string(n.description));
        no.set("trigger", pattern_value(n.trigger));
        no.set("violation_meaning", Value::string(n.violation_meaning));
        set_nonempty(no, "emotion_effect", delta_value(n.emotion_effect));
        norms.push(std::move(no));
    }
    set_nonempty(sc, "norms", std::move(norms));
    o.set("social_context", std::move(sc));

    Value acts = Value::array();
    for (const auto& a : p.activities) {
        Value ao = Value::object();
        ao.set("id", Value::string(a.id));
        ao.set("act_class", Value::string(std::string(to_string(a.act_class))));
        ao.set("act_kind", Value::string(std::string(to_string(a.act_kind))));
        ao.set("text", Value::string(a.surface_text));
        set_nonempty(ao, "meaning_tags", strings_value(a.meaning_tags));
        acts.push(std::move(ao));
    }
    set_nonempty(o, "activities", std::move(acts));

    Value plan = Value::object();
    Value scenes = Value::array();
    for (const auto& s : p.plan_pattern.scenes) {
        Value so = Value::object();
        so.set("id", Value::string(s.id));
        set_nonempty(so, "sub_goal", Value::string(s.sub_goal));
        Value kinds = Value::array();
        for (ActKind k : s.admissible_act_kinds) kinds.push(Value::string(std::string(to_string(k))));
        so.set("admissible_act_kinds", std::move(kinds));
        so.set("completion", pattern_value(s.completion));
        scenes.push(std::move(so));
    }
    plan.set("scenes", std::move(scenes));
    Value quits = Value::array();
    for (const auto& q : p.plan_pattern.quit_conditions) {
        Value qo = Value::object();
        qo.set(q.kind == QuitCondition::Kind::norm_violation ? "norm_violation" : "missing_competence",
               Value::string(q.ref));
        quits.push(std::move(qo));
    }
    set_nonempty(plan, "quit_conditions", std::move(quits));
    o.set("plan_pattern", std::move(plan));

    set_nonempty(o, "meanings", strings_value(p.meanings));
    Value rules = Value::array();
    for (const auto& r : p.meaning_rules) {
        Value ro = Value::object();
        ro.set("after", Value::string(r.after_tag));
        ro.set("if", Value::string(r.if_tag));
        ro.set("then", Value::string(r.then_meaning));
        ro.set("otherwise", Value::string(r.otherwise_meaning));
        rules.push(std::move(ro));
    }
    set_nonempty(o, "meaning_rules", std::move(rules));
    set_nonempty(o, "competences", strings_value(p.competences));
    if (!p.activation.empty()) o.set("activation", network_value(p.activation));
    return o;
}

doc::Value to_document(const Scenario& sc) {
    Value o = Value::object();
    o.set("format_version", Value::number(kFormatVersion));
    o.set("id", Value::string(sc.id));
    set_nonempty(o, "title", Value::string(sc.title));
    o.set("role_played", Value::string(std::string(to_string(sc.role_played))));

    Value agent = Value::object();
    agent.set("id", Value::string(sc.agent.agent_id));
    agent.set("role", Value::string(std::string(to_string(sc.agent.role))));
    set_nonempty(agent, "competences", strings_value(sc.agent.competences));
    o.set("agent", std::move(agent));

    Value pre = Value::object();
    for (const auto& [k, s] : sc.preamble.values) pre.set(k, Value::string(s));
    set_nonempty(o, "preamble", std::move(pre));

    Value params = Value::array();
    for (const auto& p : sc.parameters) {
        Value po = Value::object();
        po.set("name", Value::string(p.name));
        po.set("initial", Value::number(p.initial));
        Value range = Value::array();
        range.push(Value::number(p.lo));
        range.push(Value::number(p.hi));
        po.set("range", std::move(range));
        params.push(std::move(po));
    }
    set_nonempty(o, "parameters", std::move(params));

    Value em = Value::object();
    for (Emotion e : kAllEmotions)
        if (sc.emotion_initial[e] != 0.0) em.set(std::string(to_string(e)), Value::number(sc.emotion_initial[e]));
    set_nonempty(o, "emotions", std::move(em));

    Value ils = Value::array();
    for (const auto& il : sc.interleaves) {
        Value io = Value::object();
        io.set("id", Value::string(il.id));
        io.set("trees", strings_value(il.trees));
        switch (il.completion.kind) {
            case CompletionRule::Kind::any_one: io.set("completion", Value::string("any_one")); break;
            case CompletionRule::Kind::all: io.set("completion", Value::string("all")); break;
            case CompletionRule::Kind::explicit_list: {
                Value c = Value::object();
                c.set("trees", strings_value(il.completion.trees));
                io.set("completion", std::move(c));
                break;
            }
        }
        ils.push(std::move(io));
    }
    o.set("interleaves", std::move(ils));

    Value trees = Value::array();
    for (std::size_t t = 0; t < sc.trees.size(); ++t) {
        Value to = Value::object();
        to.set("id", Value::string(sc.trees[t].id));
        Value st = Value::array();
        for (const auto& n : sc.nested(t)) st.push(statement_value(n));
        to.set("statements", std::move(st));
        trees.push(std::move(to));
    }
    o.set("trees", std::move(trees));
    return o;
}

std::string serialize(const SocialPractice& p) { return doc::write_canonical(to_document(p)); }
std::string serialize(const Scenario& sc) { return doc::write_canonical(to_document(sc)); }

// ---------------------------------------------------------------------------
// Files

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::filesystem::path> files_with(const std::filesystem::path& dir, std::string_view ext) {
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && ends_with(entry.path().filename().string(), ext)) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

DocumentKind kind_of(const std::filesystem::path& path) {
    const std::string name = path.filename().string();
    if (ends_with(name, kPracticeExtension)) return DocumentKind::practice;
    if (ends_with(name, kScenarioExtension)) return DocumentKind::scenario;
    return DocumentKind::unknown;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Diagnostic> validate_file(const std::filesystem::path& path) {
    SourceSpan where{path.string(), 1, 1, 0, 0};
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        return {{Severity::error, "IO", e.what(), where}};
    }
    switch (kind_of(path)) {
        case DocumentKind::practice: return parse_practice(text, path.string()).diagnostics;
        case DocumentKind::scenario: return parse_scenario(text, path.string()).diagnostics;
        case DocumentKind::unknown: break;
    }
    return {{Severity::error, "UNKNOWN_KIND",
             "file name must end in " + std::string(kPracticeExtension) + " or " + std::string(kScenarioExtension),
             where}};
}

SocialPractice load_practice(const std::filesystem::path& path) {
    auto d = parse_practice(read_text_file(path), path.string());
    if (!d.ok()) throw FormatError(std::move(d.diagnostics));
    return std::move(*d.practice);
}

Scenario load_scenario(const std::filesystem::path& path) {
    auto d = parse_scenario(read_text_file(path), path.string());
    if (!d.ok()) throw FormatError(std::move(d.diagnostics));
    return std::move(*d.scenario);
}

PracticeLibrary load_library(const std::filesystem::path& dir) {
    std::vector<SocialPractice> practices;
    std::map<std::string, std::string> file_of;
    std::vector<Diagnostic> diags;
    for (const auto& path : files_with(dir, kPracticeExtension)) {
        auto d = parse_practice(read_text_file(path), path.string());
        for (auto& x : d.diagnostics)
            if (x.severity == Severity::error) diags.push_back(std::move(x));
        if (d.ok()) {
            file_of.emplace(d.practice->id, path.string());
            practices.push_back(std::move(*d.practice));
        }
    }
    for (const auto& m : validate_library(practices)) {
        if (m.severity != Severity::error) continue;
        const std::string id = m.subject.substr(m.subject.find(':') + 1);
        SourceSpan where{file_of.count(id) ? file_of[id] : dir.string(), 1, 1, 0, 0};
        diags.push_back({m.severity, m.code, m.message, where});
    }
    if (!diags.empty()) throw FormatError(std::move(diags));
    return PracticeLibrary(std::move(practices));
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& dir) {
    std::vector<Scenario> out;
    for (const auto& path : files_with(dir, kScenarioExtension)) out.push_back(load_scenario(path));
    return out;
}

}  // namespace practica
