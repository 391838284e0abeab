#pragma once
// Structural dialogue state machine: a scenario is a sequence of interleaves,
// each offering conversation trees of alternating player/computer statements.
// The domain reasoner (available_moves) lists the legal player statements;
// applying one updates parameters and emotions and picks the computer reply.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "practica/core_model.hpp"
#include "practica/emotion.hpp"

namespace practica {

enum class Speaker { player, computer };

std::string_view to_string(Speaker s);

// Precondition over parameters, emotions and history.
struct Condition {
    enum class Kind { always, all, any, negate, parameter, emotion, dominant_emotion, visited };

    Kind kind = Kind::always;
    std::vector<Condition> children;  // all / any / negate (one child)
    std::string name;                 // parameter name or visited node id
    Comparison op = Comparison::ge;
    double value = 0.0;
    Emotion emotion = Emotion::happiness;

    static Condition parameter_is(std::string name, Comparison op, double value);
    static Condition emotion_is(Emotion e, Comparison op, double value);
    static Condition dominant(Emotion e);
    static Condition visited_node(std::string id);
    static Condition all_of(std::vector<Condition> cs);
    static Condition any_of(std::vector<Condition> cs);
    static Condition negation(Condition c);

    bool operator==(const Condition&) const = default;
};

struct Effects {
    std::map<std::string, double> parameters;
    EmotionDelta emotions;

    bool empty() const { return parameters.empty() && emotions.is_zero(); }
    bool operator==(const Effects&) const = default;
};

struct StatementNode {
    std::string id;
    Speaker speaker = Speaker::player;
    std::string text;
    std::optional<ActKind> act_kind;
    Effects effects;
    std::optional<Condition> precondition;
    std::set<std::string> meaning_tags;
    std::vector<std::string> emits;
    std::map<std::string, std::string> observes;

    std::vector<std::size_t> children;  // indices into Scenario::nodes
    std::size_t tree = 0;
    std::optional<std::size_t> parent;

    bool operator==(const StatementNode&) const = default;
};

// Nested authoring form of a statement node, used to build scenarios.
struct NodeSpec {
    std::string id;
    Speaker speaker = Speaker::player;
    std::string text;
    std::optional<ActKind> act_kind;
    Effects effects;
    std::optional<Condition> precondition;
    std::set<std::string> meaning_tags;
    std::vector<std::string> emits;
    std::map<std::string, std::string> observes;
    std::vector<NodeSpec> children;
};

struct ConversationTree {
    std::string id;
    std::vector<std::size_t> roots;

    bool operator==(const ConversationTree&) const = default;
};

struct Parameter {
    std::string name;
    double initial = 0.0;
    double lo = 0.0;
    double hi = 1.0;

    bool operator==(const Parameter&) const = default;
};

struct CompletionRule {
    enum class Kind { any_one, all, explicit_list };
    Kind kind = Kind::any_one;
    std::vector<std::string> trees;  // explicit_list only

    bool operator==(const CompletionRule&) const = default;
};

struct Interleave {
    std::string id;
    std::vector<std::string> trees;
    CompletionRule completion;

    bool operator==(const Interleave&) const = default;
};

struct Scenario {
    std::string id;
    std::string title;
    Role role_played = Role::doctor;
    Identity agent;                  // the character the engine plays
    ContextObservation preamble;     // context known before the first move
    std::vector<Parameter> parameters;
    EmotionVector emotion_initial;
    std::vector<Interleave> interleaves;
    std::vector<ConversationTree> trees;
    std::vector<StatementNode> nodes;

    // Appends a tree, flattening its nodes depth-first in authored order.
    void add_tree(std::string tree_id, std::vector<NodeSpec> roots);
    // Nested form of one tree's roots (inverse of add_tree).
    std::vector<NodeSpec> nested(std::size_t tree) const;

    const StatementNode* find_node(const std::string& node_id) const;
    const ConversationTree* find_tree(const std::string& tree_id) const;
    const Parameter* find_parameter(const std::string& name) const;

    bool operator==(const Scenario&) const = default;
};

std::vector<ModelDiagnostic> validate_scenario(const Scenario& sc);

struct DialogueState {
    std::map<std::string, double> parameters;
    EmotionVector emotions;
    std::vector<std::string> history;
    std::size_t interleave = 0;
    std::optional<std::string> active_tree;
    std::optional<std::string> current_node;  // last computer statement inside the active tree
    std::set<std::string> finished_trees;     // within the current interleave
    bool terminal = false;

    bool operator==(const DialogueState&) const = default;
};

class DialogueError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DialogueEnded : public DialogueError {
public:
    DialogueEnded() : DialogueError("dialogue ended") {}
};

class IllegalMove : public DialogueError {
public:
    IllegalMove(const std::string& move, std::vector<std::string> legal);
    const std::vector<std::string>& legal() const { return legal_; }

private:
    std::vector<std::string> legal_;
};

class InterleaveIncomplete : public DialogueError {
public:
    explicit InterleaveIncomplete(std::vector<std::string> open_trees);
    const std::vector<std::string>& open_trees() const { return open_; }

private:
    std::vector<std::string> open_;
};

bool evaluate(const Condition& c, const DialogueState& st);

// Throws ValidationError for an invalid scenario.
DialogueState init_state(const Scenario& sc);

// Legal player statement ids in authored order. Throws DialogueEnded when terminal.
std::vector<std::string> available_moves(const Scenario& sc, const DialogueState& st);

bool completion_met(const Scenario& sc, const DialogueState& st);

// Throws InterleaveIncomplete when the completion rule is unmet.
DialogueState advance_interleave(const Scenario& sc, const DialogueState& st);

// Not terminal, yet no legal move: an authoring error.
bool is_dead_end(const Scenario& sc, const DialogueState& st);

struct EmittedEvent {
    std::string name;
    std::string source;  // statement id

    bool operator==(const EmittedEvent&) const = default;
};

struct MoveOutcome {
    DialogueState state;
    std::optional<std::string> reply;
    std::vector<EmittedEvent> events;
    std::map<std::string, std::string> observations;
    EmotionDelta emotion_change;
    std::map<std::string, double> parameter_change;
    bool interleave_advanced = false;
};

// Throws IllegalMove (with the legal set) or DialogueEnded.
MoveOutcome apply_move(const Scenario& sc, const DialogueState& st, const std::string& node_id);

}  // namespace practica
