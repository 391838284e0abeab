#pragma once
// Binds a selected practice to the running dialogue: norm checks on emitted
// events, social meaning of moves, plan-pattern scene protocol, and
// expectation checks against the practice's social interpretations.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "practica/core_model.hpp"
#include "practica/dialogue_engine.hpp"

namespace practica {

struct ExpectationEvent {
    enum class Kind { confirmed, violated };
    Kind kind = Kind::confirmed;
    std::string subject;          // expectation id declared by the practice
    ContextObservation evidence;  // the observed values behind this event

    bool operator==(const ExpectationEvent&) const = default;
};

std::string_view to_string(ExpectationEvent::Kind k);

struct NormLedgerEntry {
    std::string norm;
    std::string status;  // "violated"
    int turn = 0;

    bool operator==(const NormLedgerEntry&) const = default;
};

struct MeaningLogEntry {
    int turn = 0;
    std::string statement;
    std::set<std::string> meanings;

    bool operator==(const MeaningLogEntry&) const = default;
};

struct PracticeRun {
    enum class Status { active, completed, quit };

    std::string practice;
    std::size_t scene = 0;
    Status status = Status::active;
    std::string quit_reason;
    std::vector<NormLedgerEntry> ledger;
    std::vector<MeaningLogEntry> meaning_log;

    bool has_violated(const std::string& norm) const;
    bool operator==(const PracticeRun&) const = default;
};

std::string_view to_string(PracticeRun::Status s);

// What event guards may inspect besides the run itself.
struct GuardContext {
    const EmotionVector& emotions;
    const std::map<std::string, double>& parameters;
};

bool matches(const EventPattern& pattern, const std::string& event, const SocialPractice& practice,
             const PracticeRun& run, const GuardContext& ctx);

PracticeRun start_run(const SocialPractice& practice);

// Replays earlier turns' events through scene completion only (no norms), so a
// run started mid-dialogue begins at its first applicable scene.
void fast_forward(PracticeRun& run, const SocialPractice& practice,
                  const std::vector<std::vector<std::string>>& turns, const GuardContext& ctx);

struct NormViolation {
    std::string norm;
    std::string meaning;
    EmotionDelta effect;

    bool operator==(const NormViolation&) const = default;
};

// Norms whose trigger matches one of `events`; norms already in the ledger do not fire again.
std::vector<NormViolation> norm_check(const PracticeRun& run, const SocialPractice& practice,
                                      const std::vector<std::string>& events, const GuardContext& ctx);

void record_violations(PracticeRun& run, const std::vector<NormViolation>& violations, int turn);

// Authored tags plus the practice's meaning rules; `before` is the state the move is played from.
std::set<std::string> meaning_of(const Scenario& sc, const std::string& statement, const SocialPractice& practice,
                                 const DialogueState& before);

struct SceneStep {
    enum class Kind { stay, next_scene, quit };
    Kind kind = Kind::stay;
    std::string scene;  // next scene id; empty when the plan pattern is complete
    std::string reason; // quit reason

    bool operator==(const SceneStep&) const = default;
};

// Precedence quit > next_scene > stay. Quit is absorbing.
SceneStep scene_step(const PracticeRun& run, const SocialPractice& practice, const std::vector<std::string>& events,
                     const Identity& identity, const GuardContext& ctx);

void apply_step(PracticeRun& run, const SocialPractice& practice, const SceneStep& step);

// One event per observed variable the practice interprets; others are ignored.
std::vector<ExpectationEvent> expectation_check(const SocialPractice& practice, const ContextObservation& obs);

}  // namespace practica
