#include "practica/core_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "practica/text.hpp"

namespace practica {

std::string_view to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

namespace {
std::string summarize(const std::vector<ModelDiagnostic>& diags) {
    std::string msg = "validation failed";
    for (const auto& d : diags)
        if (d.severity == Severity::error) msg += "; " + d.message;
    return msg;
}
}  // namespace

ValidationError::ValidationError(std::vector<ModelDiagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

bool has_errors(const std::vector<ModelDiagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(), [](const auto& d) { return d.severity == Severity::error; });
}

std::string_view to_string(Role r) {
    switch (r) {
        case Role::doctor: return "doctor";
        case Role::patient: return "patient";
        case Role::relative: return "relative of the patient";
        case Role::nurse: return "nurse";
    }
    return "doctor";
}

std::optional<Role> parse_role(std::string_view label) {
    if (label == "doctor") return Role::doctor;
    if (label == "patient") return Role::patient;
    if (label == "relative of the patient" || label == "relative") return Role::relative;
    if (label == "nurse") return Role::nurse;
    return std::nullopt;
}

std::string_view to_string(Comparison c) {
    switch (c) {
        case Comparison::lt: return "<";
        case Comparison::le: return "<=";
        case Comparison::eq: return "==";
        case Comparison::ne: return "!=";
        case Comparison::ge: return ">=";
        case Comparison::gt: return ">";
    }
    return "==";
}

std::optional<Comparison> parse_comparison(std::string_view op) {
    for (auto c : {Comparison::lt, Comparison::le, Comparison::eq, Comparison::ne, Comparison::ge, Comparison::gt})
        if (to_string(c) == op) return c;
    return std::nullopt;
}

bool compare(double lhs, Comparison op, double rhs) {
    switch (op) {
        case Comparison::lt: return lhs < rhs;
        case Comparison::le: return lhs <= rhs;
        case Comparison::eq: return lhs == rhs;
        case Comparison::ne: return lhs != rhs;
        case Comparison::ge: return lhs >= rhs;
        case Comparison::gt: return lhs > rhs;
    }
    return false;
}

namespace {
constexpr std::array<std::string_view, 7> kActKinds = {"answer", "confirm", "disagree", "agree",
                                                      "ask",    "instruct", "request"};
}

std::string_view to_string(ActClass c) { return c == ActClass::constative ? "constative" : "directive"; }
std::string_view to_string(ActKind k) { return kActKinds[static_cast<std::size_t>(k)]; }

std::optional<ActClass> parse_act_class(std::string_view s) {
    if (s == "constative") return ActClass::constative;
    if (s == "directive") return ActClass::directive;
    return std::nullopt;
}

std::optional<ActKind> parse_act_kind(std::string_view s) {
    for (std::size_t i = 0; i < kActKinds.size(); ++i)
        if (kActKinds[i] == s) return static_cast<ActKind>(i);
    return std::nullopt;
}

ActClass class_of(ActKind k) {
    switch (k) {
        case ActKind::answer:
        case ActKind::confirm:
        case ActKind::disagree:
        case ActKind::agree: return ActClass::constative;
        default: return ActClass::directive;
    }
}

std::optional<std::size_t> PlanPattern::scene_index(const std::string& id) const {
    for (std::size_t i = 0; i < scenes.size(); ++i)
        if (scenes[i].id == id) return i;
    return std::nullopt;
}

const Norm* SocialPractice::find_norm(const std::string& norm_id) const {
    for (const auto& n : social_context.norms)
        if (n.id == norm_id) return &n;
    return nullptr;
}

bool SocialPractice::has_role(Role r) const {
    return std::find(social_context.roles.begin(), social_context.roles.end(), r) != social_context.roles.end();
}

std::set<std::string> competence_gap(const Identity& identity, const SocialPractice& practice) {
    std::set<std::string> gap;
    std::set_difference(practice.competences.begin(), practice.competences.end(), identity.competences.begin(),
                        identity.competences.end(), std::inserter(gap, gap.begin()));
    return gap;
}

std::vector<ModelDiagnostic> validate_practice(const SocialPractice& p) {
    std::vector<ModelDiagnostic> out;
    auto error = [&](std::string code, std::string subject, std::string message) {
        out.push_back({Severity::error, std::move(code), std::move(message), std::move(subject)});
    };
    const std::string self = "practice:" + p.id;

    if (p.id.empty()) error("MISSING_FIELD", self, "practice id is empty");
    if (p.social_context.roles.empty()) error("MISSING_FIELD", self, "practice declares no roles");

    if (p.activation.empty())
        error("DANGLING_REFERENCE", "network:" + p.id, "practice " + p.id + " has no activation network");
    else if (p.activation.root() != p.id)
        error("NETWORK_ROOT", "network:" + p.id,
              "activation root " + p.activation.root() + " does not match practice id " + p.id);

    if (p.refines && *p.refines == p.id) error("REFINES_CYCLE", self, "practice " + p.id + " refines itself");

    const auto& scenes = p.plan_pattern.scenes;
    auto check_pattern = [&](const EventPattern& pat, const std::string& subject) {
        if (pat.event.empty()) error("MISSING_FIELD", subject, "event pattern without event name in " + subject);
        for (const auto* ref : {&pat.before_scene, &pat.after_scene})
            if (*ref && !p.plan_pattern.scene_index(**ref))
                error("DANGLING_REFERENCE", subject, "unknown scene " + **ref + " in " + subject);
    };

    std::set<std::string> norm_ids;
    for (const auto& n : p.social_context.norms) {
        const std::string subject = "norm:" + n.id;
        if (n.id.empty()) error("MISSING_FIELD", subject, "norm without id");
        if (!norm_ids.insert(n.id).second) error("DUPLICATE_ID", subject, "duplicate norm " + n.id);
        if (n.violation_meaning.empty()) error("MISSING_FIELD", subject, "norm " + n.id + " has no violation meaning");
        for (double d : n.emotion_effect.values)
            if (!std::isfinite(d) || d < -1.0 || d > 1.0)
                error("RANGE", subject, "emotion delta " + format_decimal(d) + " outside [-1,1] in norm " + n.id);
        check_pattern(n.trigger, subject);
    }

    std::set<std::string> activity_ids;
    for (const auto& a : p.activities) {
        const std::string subject = "activity:" + a.id;
        if (!activity_ids.insert(a.id).second) error("DUPLICATE_ID", subject, "duplicate activity " + a.id);
        if (class_of(a.act_kind) != a.act_class)
            error("ACT_KIND_MISMATCH", subject,
                  "act kind " + std::string(to_string(a.act_kind)) + " is not " + std::string(to_string(a.act_class)));
        if (a.surface_text.empty()) error("MISSING_FIELD", subject, "activity " + a.id + " has empty surface text");
    }

    if (scenes.empty()) error("MISSING_FIELD", "plan_pattern:" + p.id, "plan pattern has no scenes");
    std::set<std::string> scene_ids;
    for (const auto& s : scenes) {
        const std::string subject = "scene:" + s.id;
        if (!scene_ids.insert(s.id).second) error("DUPLICATE_ID", subject, "duplicate scene " + s.id);
        if (s.admissible_act_kinds.empty())
            error("MISSING_FIELD", subject, "scene " + s.id + " admits no act kinds");
        check_pattern(s.completion, subject);
    }

    for (const auto& q : p.plan_pattern.quit_conditions) {
        if (q.kind == QuitCondition::Kind::norm_violation && !norm_ids.count(q.ref))
            error("DANGLING_REFERENCE", "quit:" + q.ref, "quit condition references unknown norm " + q.ref);
        if (q.kind == QuitCondition::Kind::missing_competence && !p.competences.count(q.ref))
            error("DANGLING_REFERENCE", "quit:" + q.ref, "quit condition references undeclared competence " + q.ref);
    }

    for (const auto& c : p.competences)
        if (c.empty()) error("INVALID_VALUE", self, "empty competence label");

    for (const auto& [var, interp] : p.social_context.interpretations) {
        if (var.empty() || interp.expected_state.empty() || interp.expectation.empty())
            error("INVALID_VALUE", "interpretation:" + var, "incomplete interpretation of " + var);
    }

    for (const auto& r : p.meaning_rules)
        if (r.after_tag.empty() || r.if_tag.empty() || r.then_meaning.empty() || r.otherwise_meaning.empty())
            error("INVALID_VALUE", self, "incomplete meaning rule");

    return out;
}

}  // namespace practica
