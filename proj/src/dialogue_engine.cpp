#include "practica/dialogue_engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "practica/text.hpp"

namespace practica {

std::string_view to_string(Speaker s) { return s == Speaker::player ? "player" : "computer"; }

Condition Condition::parameter_is(std::string name, Comparison op, double value) {
    Condition c;
    c.kind = Kind::parameter;
    c.name = std::move(name);
    c.op = op;
    c.value = value;
    return c;
}

Condition Condition::emotion_is(Emotion e, Comparison op, double value) {
    Condition c;
    c.kind = Kind::emotion;
    c.emotion = e;
    c.op = op;
    c.value = value;
    return c;
}

Condition Condition::dominant(Emotion e) {
    Condition c;
    c.kind = Kind::dominant_emotion;
    c.emotion = e;
    return c;
}

Condition Condition::visited_node(std::string id) {
    Condition c;
    c.kind = Kind::visited;
    c.name = std::move(id);
    return c;
}

Condition Condition::all_of(std::vector<Condition> cs) {
    Condition c;
    c.kind = Kind::all;
    c.children = std::move(cs);
    return c;
}

Condition Condition::any_of(std::vector<Condition> cs) {
    Condition c;
    c.kind = Kind::any;
    c.children = std::move(cs);
    return c;
}

Condition Condition::negation(Condition inner) {
    Condition c;
    c.kind = Kind::negate;
    c.children.push_back(std::move(inner));
    return c;
}

// ---------------------------------------------------------------------------
// Scenario

void Scenario::add_tree(std::string tree_id, std::vector<NodeSpec> roots) {
    const std::size_t tree_index = trees.size();
    ConversationTree tree{std::move(tree_id), {}};
    std::function<std::size_t(NodeSpec&, std::optional<std::size_t>)> flatten =
        [&](NodeSpec& spec, std::optional<std::size_t> parent) {
            const std::size_t index = nodes.size();
            StatementNode n;
            n.id = std::move(spec.id);
            n.speaker = spec.speaker;
            n.text = std::move(spec.text);
            n.act_kind = spec.act_kind;
            n.effects = std::move(spec.effects);
            n.precondition = std::move(spec.precondition);
            n.meaning_tags = std::move(spec.meaning_tags);
            n.emits = std::move(spec.emits);
            n.observes = std::move(spec.observes);
            n.tree = tree_index;
            n.parent = parent;
            nodes.push_back(std::move(n));
            for (auto& child : spec.children) {
                const std::size_t c = flatten(child, index);
                nodes[index].children.push_back(c);
            }
            return index;
        };
    for (auto& r : roots) tree.roots.push_back(flatten(r, std::nullopt));
    trees.push_back(std::move(tree));
}

std::vector<NodeSpec> Scenario::nested(std::size_t tree) const {
    std::function<NodeSpec(std::size_t)> build = [&](std::size_t i) {
        const auto& n = nodes[i];
        NodeSpec s{n.id, n.speaker, n.text, n.act_kind, n.effects, n.precondition, n.meaning_tags, n.emits,
                   n.observes, {}};
        for (std::size_t c : n.children) s.children.push_back(build(c));
        return s;
    };
    std::vector<NodeSpec> out;
    for (std::size_t r : trees[tree].roots) out.push_back(build(r));
    return out;
}

const StatementNode* Scenario::find_node(const std::string& node_id) const {
    for (const auto& n : nodes)
        if (n.id == node_id) return &n;
    return nullptr;
}

const ConversationTree* Scenario::find_tree(const std::string& tree_id) const {
    for (const auto& t : trees)
        if (t.id == tree_id) return &t;
    return nullptr;
}

const Parameter* Scenario::find_parameter(const std::string& name) const {
    for (const auto& p : parameters)
        if (p.name == name) return &p;
    return nullptr;
}

std::vector<ModelDiagnostic> validate_scenario(const Scenario& sc) {
    std::vector<ModelDiagnostic> out;
    auto error = [&](std::string code, std::string subject, std::string message) {
        out.push_back({Severity::error, std::move(code), std::move(message), std::move(subject)});
    };

    if (sc.id.empty()) error("MISSING_FIELD", "scenario:", "scenario id is empty");

    std::set<std::string> names;
    for (const auto& p : sc.parameters) {
        const std::string subject = "parameter:" + p.name;
        if (!names.insert(p.name).second) error("DUPLICATE_ID", subject, "duplicate parameter " + p.name);
        if (!(p.lo <= p.hi)) error("RANGE", subject, "parameter " + p.name + " has empty range");
        if (p.initial < p.lo || p.initial > p.hi)
            error("RANGE", subject,
                  "initial score " + format_decimal(p.initial) + " of " + p.name + " outside [" + format_decimal(p.lo) +
                      "," + format_decimal(p.hi) + "]");
    }

    for (const auto& [var, state] : sc.preamble.values)
        if (var.empty() || state.empty()) error("INVALID_VALUE", "scenario:" + sc.id, "empty preamble observation");

    if (sc.interleaves.empty()) error("MISSING_FIELD", "scenario:" + sc.id, "scenario has no interleaves");

    std::set<std::string> tree_ids;
    for (const auto& t : sc.trees) {
        if (!tree_ids.insert(t.id).second) error("DUPLICATE_ID", "tree:" + t.id, "duplicate tree " + t.id);
        if (t.roots.empty()) error("MISSING_FIELD", "tree:" + t.id, "tree " + t.id + " has no statements");
    }

    std::set<std::string> interleave_ids;
    for (const auto& il : sc.interleaves) {
        const std::string subject = "interleave:" + il.id;
        if (!interleave_ids.insert(il.id).second) error("DUPLICATE_ID", subject, "duplicate interleave " + il.id);
        if (il.trees.empty()) error("MISSING_FIELD", subject, "interleave " + il.id + " has no trees");
        for (const auto& t : il.trees)
            if (!tree_ids.count(t))
                error("DANGLING_REFERENCE", subject + "#tree:" + t, "interleave " + il.id + " names unknown tree " + t);
        if (il.completion.kind == CompletionRule::Kind::explicit_list) {
            if (il.completion.trees.empty())
                error("MISSING_FIELD", subject, "explicit completion of " + il.id + " lists no trees");
            for (const auto& t : il.completion.trees)
                if (std::find(il.trees.begin(), il.trees.end(), t) == il.trees.end())
                    error("DANGLING_REFERENCE", subject, "completion of " + il.id + " names tree " + t + " not in the interleave");
        }
    }

    std::set<std::string> node_ids;
    for (const auto& n : sc.nodes)
        if (!node_ids.insert(n.id).second) error("DUPLICATE_ID", "statement:" + n.id, "duplicate statement " + n.id);

    std::function<void(const Condition&, const std::string&)> check_condition = [&](const Condition& c,
                                                                                    const std::string& subject) {
        switch (c.kind) {
            case Condition::Kind::parameter:
                if (!sc.find_parameter(c.name))
                    error("UNKNOWN_PARAMETER", subject + "#when:" + c.name, "precondition references undeclared parameter " + c.name);
                break;
            case Condition::Kind::visited:
                if (!node_ids.count(c.name))
                    error("DANGLING_REFERENCE", subject, "precondition references unknown statement " + c.name);
                break;
            case Condition::Kind::negate:
                if (c.children.size() != 1) error("INVALID_VALUE", subject, "negation needs exactly one operand");
                [[fallthrough]];
            case Condition::Kind::all:
            case Condition::Kind::any:
                for (const auto& ch : c.children) check_condition(ch, subject);
                break;
            default: break;
        }
    };

    for (const auto& n : sc.nodes) {
        const std::string subject = "statement:" + n.id;
        if (n.id.empty()) error("MISSING_FIELD", subject, "statement without id");
        if (n.text.empty()) error("MISSING_FIELD", subject, "statement " + n.id + " has empty text");
        if (!n.parent && n.speaker != Speaker::player)
            error("SPEAKER_ALTERNATION", subject, "tree root " + n.id + " must be a player statement");
        for (std::size_t c : n.children)
            if (sc.nodes[c].speaker == n.speaker)
                error("SPEAKER_ALTERNATION", "statement:" + sc.nodes[c].id,
                      "statements " + n.id + " and " + sc.nodes[c].id + " have the same speaker");
        if (n.precondition) check_condition(*n.precondition, subject);
        for (const auto& [p, d] : n.effects.parameters) {
            if (!sc.find_parameter(p))
                error("UNKNOWN_PARAMETER", subject + "#effect:" + p, "effect references undeclared parameter " + p);
            if (!std::isfinite(d)) error("INVALID_VALUE", subject, "non-finite parameter delta in " + n.id);
        }
        for (double d : n.effects.emotions.values)
            if (!std::isfinite(d) || d < -1.0 || d > 1.0)
                error("RANGE", subject, "emotion delta " + format_decimal(d) + " outside [-1,1] in " + n.id);
        for (const auto& [var, state] : n.observes)
            if (var.empty() || state.empty()) error("INVALID_VALUE", subject, "empty observation in " + n.id);
        for (const auto& e : n.emits)
            if (e.empty()) error("INVALID_VALUE", subject, "empty event name in " + n.id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// State machine

IllegalMove::IllegalMove(const std::string& move, std::vector<std::string> legal)
    : DialogueError("illegal move '" + move + "'; legal moves: " + join(legal, ", ")), legal_(std::move(legal)) {}

InterleaveIncomplete::InterleaveIncomplete(std::vector<std::string> open_trees)
    : DialogueError("interleave incomplete; open trees: " + join(open_trees, ", ")), open_(std::move(open_trees)) {}

bool evaluate(const Condition& c, const DialogueState& st) {
    switch (c.kind) {
        case Condition::Kind::always: return true;
        case Condition::Kind::all:
            return std::all_of(c.children.begin(), c.children.end(), [&](const auto& ch) { return evaluate(ch, st); });
        case Condition::Kind::any:
            return std::any_of(c.children.begin(), c.children.end(), [&](const auto& ch) { return evaluate(ch, st); });
        case Condition::Kind::negate: return !evaluate(c.children.at(0), st);
        case Condition::Kind::parameter: {
            auto it = st.parameters.find(c.name);
            return it != st.parameters.end() && compare(it->second, c.op, c.value);
        }
        case Condition::Kind::emotion: return compare(st.emotions[c.emotion], c.op, c.value);
        case Condition::Kind::dominant_emotion: return dominant_emotion(st.emotions) == c.emotion;
        case Condition::Kind::visited:
            return std::find(st.history.begin(), st.history.end(), c.name) != st.history.end();
    }
    return false;
}

namespace {

bool holds(const StatementNode& n, const DialogueState& st) { return !n.precondition || evaluate(*n.precondition, st); }

const StatementNode& node_by_id(const Scenario& sc, const std::string& id) {
    const StatementNode* n = sc.find_node(id);
    if (!n) throw DialogueError("unknown statement " + id);
    return *n;
}

void apply_effects(const Scenario& sc, const Effects& fx, DialogueState& st, MoveOutcome& out) {
    for (const auto& [name, delta] : fx.parameters) {
        const Parameter* p = sc.find_parameter(name);
        double& score = st.parameters[name];
        const double before = score;
        score = std::clamp(score + delta, p->lo, p->hi);
        out.parameter_change[name] += score - before;
    }
    const EmotionVector before = st.emotions;
    st.emotions = clamp_update(st.emotions, fx.emotions);
    out.emotion_change += difference(st.emotions, before);
}

std::vector<std::string> open_trees(const Scenario& sc, const DialogueState& st) {
    std::vector<std::string> open;
    for (const auto& t : sc.interleaves[st.interleave].trees)
        if (!st.finished_trees.count(t)) open.push_back(t);
    return open;
}

}  // namespace

DialogueState init_state(const Scenario& sc) {
    if (auto diags = validate_scenario(sc); has_errors(diags)) throw ValidationError(std::move(diags));
    DialogueState st;
    for (const auto& p : sc.parameters) st.parameters[p.name] = p.initial;
    st.emotions = sc.emotion_initial;
    return st;
}

std::vector<std::string> available_moves(const Scenario& sc, const DialogueState& st) {
    if (st.terminal) throw DialogueEnded();
    std::vector<std::string> out;
    if (st.active_tree) {
        const StatementNode& cur = node_by_id(sc, *st.current_node);
        for (std::size_t c : cur.children)
            if (sc.nodes[c].speaker == Speaker::player && holds(sc.nodes[c], st)) out.push_back(sc.nodes[c].id);
        return out;
    }
    for (const auto& tree_id : sc.interleaves[st.interleave].trees) {
        if (st.finished_trees.count(tree_id)) continue;
        const ConversationTree* tree = sc.find_tree(tree_id);
        for (std::size_t r : tree->roots)
            if (holds(sc.nodes[r], st)) out.push_back(sc.nodes[r].id);
    }
    return out;
}

bool completion_met(const Scenario& sc, const DialogueState& st) {
    if (st.terminal || st.active_tree) return false;
    const Interleave& il = sc.interleaves[st.interleave];
    auto done = [&](const std::string& t) { return st.finished_trees.count(t) > 0; };
    switch (il.completion.kind) {
        case CompletionRule::Kind::any_one: return std::any_of(il.trees.begin(), il.trees.end(), done);
        case CompletionRule::Kind::all: return std::all_of(il.trees.begin(), il.trees.end(), done);
        case CompletionRule::Kind::explicit_list:
            return std::all_of(il.completion.trees.begin(), il.completion.trees.end(), done);
    }
    return false;
}

DialogueState advance_interleave(const Scenario& sc, const DialogueState& st) {
    if (st.terminal) throw DialogueEnded();
    if (!completion_met(sc, st)) {
        auto open = open_trees(sc, st);
        if (st.active_tree && std::find(open.begin(), open.end(), *st.active_tree) == open.end())
            open.push_back(*st.active_tree);
        throw InterleaveIncomplete(std::move(open));
    }
    DialogueState next = st;
    next.finished_trees.clear();
    next.interleave += 1;
    if (next.interleave >= sc.interleaves.size()) {
        next.interleave = sc.interleaves.size() - 1;
        next.terminal = true;
    }
    return next;
}

bool is_dead_end(const Scenario& sc, const DialogueState& st) {
    return !st.terminal && available_moves(sc, st).empty();
}

MoveOutcome apply_move(const Scenario& sc, const DialogueState& st, const std::string& node_id) {
    const auto legal = available_moves(sc, st);
    if (std::find(legal.begin(), legal.end(), node_id) == legal.end()) throw IllegalMove(node_id, legal);

    const StatementNode& move = node_by_id(sc, node_id);
    MoveOutcome out;
    out.state = st;
    DialogueState& next = out.state;

    next.history.push_back(move.id);
    apply_effects(sc, move.effects, next, out);
    for (const auto& e : move.emits) out.events.push_back({e, move.id});
    for (const auto& [k, v] : move.observes) out.observations[k] = v;

    const StatementNode* reply = nullptr;
    for (std::size_t c : move.children)
        if (sc.nodes[c].speaker == Speaker::computer && holds(sc.nodes[c], next)) {
            reply = &sc.nodes[c];
            break;
        }

    if (reply) {
        out.reply = reply->id;
        next.history.push_back(reply->id);
        apply_effects(sc, reply->effects, next, out);
        for (const auto& e : reply->emits) out.events.push_back({e, reply->id});
        for (const auto& [k, v] : reply->observes) out.observations[k] = v;
    }

    const std::string& tree_id = sc.trees[move.tree].id;
    if (reply && !reply->children.empty()) {
        next.active_tree = tree_id;
        next.current_node = reply->id;
    } else {
        next.active_tree.reset();
        next.current_node.reset();
        next.finished_trees.insert(tree_id);
        if (completion_met(sc, next)) {
            next = advance_interleave(sc, next);
            out.interleave_advanced = true;
        }
    }
    return out;
}

}  // namespace practica
