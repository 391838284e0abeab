#pragma once
// Practice selection: filter candidates by identity and observed physical
// context, rank them by activation probability, then select, ask for
// clarification, or report no match. Re-evaluation reruns the selection when
// an expectation of the active practice is violated.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "practica/activation_net.hpp"
#include "practica/core_model.hpp"
#include "practica/practice_runtime.hpp"

namespace practica {

class PracticeLibrary {
public:
    PracticeLibrary() = default;
    // Throws ValidationError on invalid practices, duplicate ids, dangling or cyclic refinements.
    explicit PracticeLibrary(std::vector<SocialPractice> practices);

    const SocialPractice* find(const std::string& id) const;
    const SocialPractice& at(const std::string& id) const;
    std::vector<std::string> ids() const;
    bool empty() const { return practices_.empty(); }
    const std::map<std::string, SocialPractice>& practices() const { return practices_; }

    // Direct refinements (abstract -> concrete), sorted by id.
    std::vector<std::string> children_of(const std::string& id) const;
    bool is_ancestor(const std::string& ancestor, const std::string& id) const;

private:
    std::map<std::string, SocialPractice> practices_;
};

std::vector<ModelDiagnostic> validate_library(const std::vector<SocialPractice>& practices);

struct SelectionConfig {
    double activation_threshold = 0.6;
    double margin = 0.15;
    int max_questions = 2;
    double switch_surprise = 0.3;

    bool operator==(const SelectionConfig&) const = default;
};

std::vector<ModelDiagnostic> validate_config(const SelectionConfig& cfg);

// Observation restricted to what `net` can represent. Unusable entries are described in `notes`.
Evidence evidence_for(const ActivationNetwork& net, const ContextObservation& obs,
                      std::vector<std::string>* notes = nullptr);

// P(root = active | ev). Evidence on nodes absent from the network is ignored.
double activation_probability(const SocialPractice& practice, const Evidence& ev,
                              std::vector<std::string>* notes = nullptr);

// Practices admitting the identity's role whose declared places/actors do not contradict obs.
std::vector<std::string> candidate_practices(const PracticeLibrary& lib, const Identity& identity,
                                             const ContextObservation& obs);

struct CandidateScore {
    std::string practice;
    double probability = 0.0;

    bool operator==(const CandidateScore&) const = default;
};

struct Selected {
    std::string practice;
    double probability = 0.0;

    bool operator==(const Selected&) const = default;
};

struct Ambiguous {
    std::vector<RankedQuestion> questions;

    bool operator==(const Ambiguous&) const = default;
};

struct NoMatch {
    double best_probability = 0.0;

    bool operator==(const NoMatch&) const = default;
};

struct SelectionOutcome {
    std::variant<Selected, Ambiguous, NoMatch> result;
    std::vector<CandidateScore> ranking;  // descending probability, ties by id
    std::vector<std::string> notes;

    bool is_selected() const { return std::holds_alternative<Selected>(result); }
    bool is_ambiguous() const { return std::holds_alternative<Ambiguous>(result); }
    bool is_no_match() const { return std::holds_alternative<NoMatch>(result); }
    const Selected& selected() const { return std::get<Selected>(result); }
    const Ambiguous& ambiguous() const { return std::get<Ambiguous>(result); }

    bool operator==(const SelectionOutcome&) const = default;
};

std::string_view kind_name(const SelectionOutcome& o);

SelectionOutcome select_practice(const PracticeLibrary& lib, const std::vector<std::string>& candidates,
                                 const ContextObservation& obs, const SelectionConfig& cfg);

// Selection restricted to the refinements of `active`.
SelectionOutcome refine_practice(const PracticeLibrary& lib, const std::string& active, const ContextObservation& obs,
                                 const SelectionConfig& cfg);

// Candidates, selection among the unrefined ones, then refinement downwards while a child is selected.
SelectionOutcome select_in_context(const PracticeLibrary& lib, const Identity& identity,
                                   const ContextObservation& obs, const SelectionConfig& cfg);

struct Continue {
    bool operator==(const Continue&) const = default;
};

struct Switch {
    std::string practice;
    EmotionDelta effect;
    SelectionOutcome selection;

    bool operator==(const Switch&) const = default;
};

struct Abort {
    std::string reason;

    bool operator==(const Abort&) const = default;
};

using Reevaluation = std::variant<Continue, Switch, Abort>;

struct ReevaluationContext {
    const PracticeLibrary& library;
    const Identity& identity;
    std::vector<std::string> violated_norms;
};

Reevaluation reevaluate(const ReevaluationContext& ctx, const std::string& active, const ExpectationEvent& event,
                        const ContextObservation& obs, const SelectionConfig& cfg);

}  // namespace practica
