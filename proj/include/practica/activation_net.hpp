#pragma once
// Causal activation networks: categorical Bayesian networks whose root node
// states whether a social practice is in effect. Exact inference only.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace practica {

inline constexpr double kProbabilityTolerance = 1e-9;

inline constexpr const char* kActiveState = "active";
inline constexpr const char* kInactiveState = "inactive";

// CPT rows are laid out in mixed-radix order over `parents`: the first parent
// is the most significant digit. Each row holds one probability per state.
struct NodeDefinition {
    std::string name;
    std::vector<std::string> states;
    std::vector<std::string> parents;
    std::vector<std::vector<double>> cpt;

    bool operator==(const NodeDefinition&) const = default;
};

struct NetworkDefinition {
    std::string root;
    std::vector<NodeDefinition> nodes;

    bool operator==(const NetworkDefinition&) const = default;
};

struct NetworkDiagnostic {
    std::string code;
    std::string message;
    std::string node;
    std::optional<std::size_t> row;
};

// Every structural violation, each tagged with the offending node. Empty means valid.
std::vector<NetworkDiagnostic> validate_network(const NetworkDefinition& def);

class InvalidNetwork : public std::runtime_error {
public:
    explicit InvalidNetwork(std::vector<NetworkDiagnostic> diagnostics);
    const std::vector<NetworkDiagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<NetworkDiagnostic> diagnostics_;
};

// Evidence that cannot occur under the model (P(evidence) = 0).
class ImpossibleEvidence : public std::runtime_error {
public:
    explicit ImpossibleEvidence(std::vector<std::string> nodes);
    const std::vector<std::string>& nodes() const { return nodes_; }

private:
    std::vector<std::string> nodes_;
};

// Evidence or query naming a node or state the network does not have.
class InvalidEvidence : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Evidence = std::map<std::string, std::string>;

struct Distribution {
    std::vector<std::string> states;
    std::vector<double> probabilities;

    double at(const std::string& state) const;
};

// Immutable, validated network. Copyable value.
class ActivationNetwork {
public:
    ActivationNetwork() = default;
    // Throws InvalidNetwork when validate_network reports anything.
    explicit ActivationNetwork(NetworkDefinition def);

    bool empty() const { return def_.nodes.empty(); }
    const NetworkDefinition& definition() const { return def_; }
    const std::string& root() const { return def_.root; }
    std::size_t size() const { return def_.nodes.size(); }
    const NodeDefinition& node(std::size_t i) const { return def_.nodes[i]; }

    std::optional<std::size_t> index_of(const std::string& name) const;
    std::optional<std::size_t> state_index(std::size_t node, const std::string& state) const;
    std::size_t cardinality(std::size_t node) const { return def_.nodes[node].states.size(); }
    const std::vector<std::size_t>& parent_indices(std::size_t node) const { return parents_[node]; }
    const std::vector<std::size_t>& topological_order() const { return topo_; }

    // All parent -> child pairs.
    std::vector<std::pair<std::string, std::string>> edges() const;

    // P(node = state | parents = parent_states), parent_states in parent order.
    double probability(std::size_t node, std::size_t state, std::span<const std::size_t> parent_states) const;

    bool operator==(const ActivationNetwork& other) const { return def_ == other.def_; }

private:
    NetworkDefinition def_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::size_t> topo_;
    std::map<std::string, std::size_t> index_;
};

namespace detail {

// Table over a sorted set of variables; the last variable varies fastest.
struct Factor {
    std::vector<std::size_t> vars;
    std::vector<std::size_t> cards;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

Factor multiply(const Factor& a, const Factor& b);
Factor sum_out(const Factor& f, std::size_t var);
// Keeps only entries where `var` takes `state`; `var` is dropped from the scope.
Factor reduce(const Factor& f, std::size_t var, std::size_t state);

// One factor per node (its CPT), with evidence applied.
std::vector<Factor> network_factors(const ActivationNetwork& net, const std::map<std::size_t, std::size_t>& evidence);

// Unnormalized marginal of `query` after eliminating every other variable.
std::vector<double> eliminate_to(std::vector<Factor> factors, std::size_t query, std::size_t query_card);

}  // namespace detail

// Exact P(query | ev). Throws InvalidEvidence, ImpossibleEvidence.
Distribution posterior(const ActivationNetwork& net, const Evidence& ev, const std::string& query);

// P(ev). Throws InvalidEvidence.
double evidence_probability(const ActivationNetwork& net, const Evidence& ev);

struct StateExpectation {
    std::string state;
    double probability = 0.0;
};

// Most probable state of `node`; earlier state wins ties.
StateExpectation actor_expectation(const ActivationNetwork& net, const Evidence& ev, const std::string& node);

// Shannon entropy in bits.
double entropy_bits(std::span<const double> p);

struct RankedQuestion {
    std::string node;
    double gain = 0.0;

    bool operator==(const RankedQuestion&) const = default;
};

// Expected reduction of root-posterior entropy from observing `node`.
double information_gain(const ActivationNetwork& net, const Evidence& ev, const std::string& node);

// Gains within this distance are treated as ties and ordered by node name.
inline constexpr double kGainTieTolerance = 1e-12;

// Candidates by descending gain; ties by node name.
std::vector<RankedQuestion> information_gain_ranking(const ActivationNetwork& net, const Evidence& ev,
                                                     const std::vector<std::string>& candidates);

// Orders already-scored questions with the ranking rule above.
void sort_ranking(std::vector<RankedQuestion>& ranking);

}  // namespace practica
