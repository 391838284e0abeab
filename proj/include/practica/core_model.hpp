#pragma once
// Shared vocabulary: identities, observations and the social practice record
// (physical context, social context, norms, activities, plan pattern, meaning,
// competences) together with its activation network.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "practica/activation_net.hpp"
#include "practica/emotion.hpp"

namespace practica {

enum class Severity { error, warning };

std::string_view to_string(Severity s);

// Model-level finding. `subject` names what it is about, e.g. "norm:doctor_is_polite".
struct ModelDiagnostic {
    Severity severity = Severity::error;
    std::string code;
    std::string message;
    std::string subject;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<ModelDiagnostic> diagnostics);
    const std::vector<ModelDiagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<ModelDiagnostic> diagnostics_;
};

bool has_errors(const std::vector<ModelDiagnostic>& diags);

enum class Role { doctor, patient, relative, nurse };

// "relative of the patient" is the canonical label of Role::relative.
std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view label);

struct Identity {
    std::string agent_id;
    Role role = Role::doctor;
    std::set<std::string> competences;

    bool operator==(const Identity&) const = default;
};

struct ContextObservation {
    std::map<std::string, std::string> values;
    std::int64_t tick = 0;

    bool operator==(const ContextObservation&) const = default;
};

enum class Comparison { lt, le, eq, ne, ge, gt };

std::string_view to_string(Comparison c);
std::optional<Comparison> parse_comparison(std::string_view op);
bool compare(double lhs, Comparison op, double rhs);

struct ParameterGuard {
    std::string name;
    Comparison op = Comparison::ge;
    double value = 0.0;

    bool operator==(const ParameterGuard&) const = default;
};

// Matches an emitted event by name, optionally restricted by the plan position,
// the character's dominant emotion or a scenario parameter.
struct EventPattern {
    std::string event;
    std::optional<std::string> before_scene;
    std::optional<std::string> after_scene;
    std::optional<Emotion> dominant_emotion;
    std::optional<ParameterGuard> parameter;

    bool operator==(const EventPattern&) const = default;
};

struct Norm {
    std::string id;
    std::string description;
    EventPattern trigger;
    std::string violation_meaning;
    EmotionDelta emotion_effect;

    bool operator==(const Norm&) const = default;
};

enum class ActClass { constative, directive };
enum class ActKind { answer, confirm, disagree, agree, ask, instruct, request };

std::string_view to_string(ActClass c);
std::string_view to_string(ActKind k);
std::optional<ActClass> parse_act_class(std::string_view s);
std::optional<ActKind> parse_act_kind(std::string_view s);
ActClass class_of(ActKind k);

struct SpeechActTemplate {
    std::string id;
    ActClass act_class = ActClass::constative;
    ActKind act_kind = ActKind::answer;
    std::string surface_text;
    std::set<std::string> meaning_tags;

    bool operator==(const SpeechActTemplate&) const = default;
};

struct Scene {
    std::string id;
    std::string sub_goal;
    std::set<ActKind> admissible_act_kinds;
    EventPattern completion;

    bool operator==(const Scene&) const = default;
};

struct QuitCondition {
    enum class Kind { norm_violation, missing_competence };
    Kind kind = Kind::norm_violation;
    std::string ref;

    bool operator==(const QuitCondition&) const = default;
};

struct PlanPattern {
    std::vector<Scene> scenes;
    std::vector<QuitCondition> quit_conditions;

    std::optional<std::size_t> scene_index(const std::string& id) const;
    bool operator==(const PlanPattern&) const = default;
};

struct PhysicalContext {
    std::vector<std::string> resources;
    std::vector<std::string> places;
    std::vector<std::string> actors;

    bool operator==(const PhysicalContext&) const = default;
};

// What the practice expects a context variable to read, and the id of that expectation.
struct Interpretation {
    std::string expected_state;
    std::string expectation;

    bool operator==(const Interpretation&) const = default;
};

struct SocialContext {
    std::map<std::string, Interpretation> interpretations;
    std::vector<Role> roles;
    std::vector<Norm> norms;

    bool operator==(const SocialContext&) const = default;
};

// When the previous computer statement carries `after_tag`, the next player move
// gains `then_meaning` if it carries `if_tag`, otherwise `otherwise_meaning`.
struct MeaningRule {
    std::string after_tag;
    std::string if_tag;
    std::string then_meaning;
    std::string otherwise_meaning;

    bool operator==(const MeaningRule&) const = default;
};

struct SocialPractice {
    std::string id;
    std::string description;
    PhysicalContext physical_context;
    SocialContext social_context;
    std::vector<SpeechActTemplate> activities;
    PlanPattern plan_pattern;
    std::set<std::string> meanings;
    std::vector<MeaningRule> meaning_rules;
    std::set<std::string> competences;
    ActivationNetwork activation;
    std::optional<std::string> refines;

    const Norm* find_norm(const std::string& id) const;
    bool has_role(Role r) const;
    bool operator==(const SocialPractice&) const = default;
};

// practice.competences minus identity.competences.
std::set<std::string> competence_gap(const Identity& identity, const SocialPractice& practice);

// Dangling references and component invariants of one practice.
std::vector<ModelDiagnostic> validate_practice(const SocialPractice& practice);

}  // namespace practica
