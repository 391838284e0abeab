#include "practica/activation_net.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "practica/text.hpp"

namespace practica {

namespace {

std::string summarize(const std::vector<NetworkDiagnostic>& diags) {
    std::string msg = "invalid activation network";
    for (const auto& d : diags) msg += "; " + d.message;
    return msg;
}

std::string node_list(const std::vector<std::string>& nodes) { return join(nodes, ","); }

}  // namespace

InvalidNetwork::InvalidNetwork(std::vector<NetworkDiagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

ImpossibleEvidence::ImpossibleEvidence(std::vector<std::string> nodes)
    : std::runtime_error("impossible evidence: zero probability for observations on " + node_list(nodes)),
      nodes_(std::move(nodes)) {}

double Distribution::at(const std::string& state) const {
    for (std::size_t i = 0; i < states.size(); ++i)
        if (states[i] == state) return probabilities[i];
    throw InvalidEvidence("unknown state '" + state + "'");
}

// ---------------------------------------------------------------------------
// Validation

std::vector<NetworkDiagnostic> validate_network(const NetworkDefinition& def) {
    std::vector<NetworkDiagnostic> out;
    auto report = [&](std::string code, std::string node, std::string message,
                      std::optional<std::size_t> row = std::nullopt) {
        out.push_back({std::move(code), std::move(message), std::move(node), row});
    };

    if (def.nodes.empty()) {
        report("NETWORK_EMPTY", def.root, "network has no nodes");
        return out;
    }

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < def.nodes.size(); ++i) {
        const auto& n = def.nodes[i];
        if (n.name.empty()) report("INVALID_VALUE", n.name, "node with empty name");
        if (!index.emplace(n.name, i).second) report("DUPLICATE_ID", n.name, "duplicate node " + n.name);
    }

    std::set<std::string> bad_parents;
    for (const auto& n : def.nodes) {
        if (n.states.size() < 2) report("NODE_STATES", n.name, "node " + n.name + " needs at least 2 states");
        std::set<std::string> seen;
        for (const auto& s : n.states) {
            if (s.empty()) report("INVALID_VALUE", n.name, "empty state label at node " + n.name);
            if (!seen.insert(s).second) report("DUPLICATE_STATE", n.name, "duplicate state " + s + " at node " + n.name);
        }
        std::set<std::string> seen_parents;
        for (const auto& p : n.parents) {
            if (!index.count(p)) {
                report("UNKNOWN_PARENT", n.name, "unknown parent " + p + " of node " + n.name);
                bad_parents.insert(n.name);
            }
            if (!seen_parents.insert(p).second) {
                report("DUPLICATE_PARENT", n.name, "duplicate parent " + p + " of node " + n.name);
                bad_parents.insert(n.name);
            }
        }
    }

    auto root_it = index.find(def.root);
    if (root_it == index.end()) {
        report("NETWORK_ROOT", def.root, "root node " + def.root + " is not declared");
    } else {
        const auto& root = def.nodes[root_it->second];
        if (!root.parents.empty()) report("NETWORK_ROOT", root.name, "root node " + root.name + " has parents");
        if (std::find(root.states.begin(), root.states.end(), kActiveState) == root.states.end())
            report("NETWORK_ROOT", root.name, "root node " + root.name + " lacks state 'active'");
    }

    // CPT shape and values.
    for (const auto& n : def.nodes) {
        std::size_t expected_rows = 1;
        bool shape_known = !bad_parents.count(n.name);
        for (const auto& p : n.parents) {
            auto it = index.find(p);
            if (it == index.end()) {
                shape_known = false;
                break;
            }
            expected_rows *= def.nodes[it->second].states.size();
        }
        if (shape_known && n.cpt.size() != expected_rows)
            report("CPT_MISSING_ROW", n.name,
                   "node " + n.name + " has " + std::to_string(n.cpt.size()) + " CPT rows, expected " +
                       std::to_string(expected_rows));
        for (std::size_t r = 0; r < n.cpt.size(); ++r) {
            const auto& row = n.cpt[r];
            if (row.size() != n.states.size()) {
                report("CPT_UNKNOWN_STATE", n.name,
                       "row " + std::to_string(r) + " at node " + n.name + " has " + std::to_string(row.size()) +
                           " entries for " + std::to_string(n.states.size()) + " states",
                       r);
                continue;
            }
            double sum = 0.0;
            bool in_range = true;
            for (double p : row) {
                if (!std::isfinite(p) || p < 0.0 || p > 1.0) in_range = false;
                sum += p;
            }
            if (!in_range)
                report("CPT_RANGE", n.name, "probability outside [0,1] in row " + std::to_string(r) + " at node " + n.name, r);
            else if (std::abs(sum - 1.0) > kProbabilityTolerance)
                report("CPT_ROW_SUM", n.name, "row sum " + format_decimal(sum) + " ≠ 1 at node " + n.name, r);
        }
    }

    if (!bad_parents.empty()) return out;

    // Children adjacency for cycle detection and reachability.
    std::vector<std::vector<std::size_t>> children(def.nodes.size());
    for (std::size_t i = 0; i < def.nodes.size(); ++i)
        for (const auto& p : def.nodes[i].parents) children[index.at(p)].push_back(i);

    // DFS colouring; each distinct cycle (as a node set) reported once.
    std::vector<int> colour(def.nodes.size(), 0);
    std::vector<std::size_t> stack;
    std::set<std::set<std::size_t>> cycles;
    std::function<void(std::size_t)> visit = [&](std::size_t u) {
        colour[u] = 1;
        stack.push_back(u);
        for (std::size_t v : children[u]) {
            if (colour[v] == 0) {
                visit(v);
            } else if (colour[v] == 1) {
                auto from = std::find(stack.begin(), stack.end(), v);
                std::vector<std::size_t> cyc(from, stack.end());
                std::set<std::size_t> key(cyc.begin(), cyc.end());
                if (cycles.insert(key).second) {
                    std::vector<std::string> names;
                    for (std::size_t c : cyc) names.push_back(def.nodes[c].name);
                    report("NETWORK_CYCLE", names.front(), "cycle " + node_list(names));
                }
            }
        }
        stack.pop_back();
        colour[u] = 2;
    };
    for (std::size_t i = 0; i < def.nodes.size(); ++i)
        if (colour[i] == 0) visit(i);

    if (root_it != index.end()) {
        std::vector<bool> reached(def.nodes.size(), false);
        std::vector<std::size_t> todo{root_it->second};
        reached[root_it->second] = true;
        while (!todo.empty()) {
            std::size_t u = todo.back();
            todo.pop_back();
            for (std::size_t v : children[u])
                if (!reached[v]) {
                    reached[v] = true;
                    todo.push_back(v);
                }
        }
        for (std::size_t i = 0; i < def.nodes.size(); ++i)
            if (!reached[i])
                report("NETWORK_UNREACHABLE", def.nodes[i].name,
                       "node " + def.nodes[i].name + " is not reachable from root " + def.root);
    }
    return out;
}

// ---------------------------------------------------------------------------
// ActivationNetwork

ActivationNetwork::ActivationNetwork(NetworkDefinition def) : def_(std::move(def)) {
    if (auto diags = validate_network(def_); !diags.empty()) throw InvalidNetwork(std::move(diags));
    for (std::size_t i = 0; i < def_.nodes.size(); ++i) index_[def_.nodes[i].name] = i;
    parents_.resize(def_.nodes.size());
    for (std::size_t i = 0; i < def_.nodes.size(); ++i)
        for (const auto& p : def_.nodes[i].parents) parents_[i].push_back(index_.at(p));

    std::vector<std::size_t> indegree(def_.nodes.size());
    for (std::size_t i = 0; i < def_.nodes.size(); ++i) indegree[i] = parents_[i].size();
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < def_.nodes.size(); ++i)
        if (indegree[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        std::size_t u = ready.front();
        ready.erase(ready.begin());
        topo_.push_back(u);
        for (std::size_t v = 0; v < def_.nodes.size(); ++v)
            if (std::find(parents_[v].begin(), parents_[v].end(), u) != parents_[v].end() && --indegree[v] == 0)
                ready.push_back(v);
    }
}

std::optional<std::size_t> ActivationNetwork::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> ActivationNetwork::state_index(std::size_t node, const std::string& state) const {
    const auto& states = def_.nodes[node].states;
    auto it = std::find(states.begin(), states.end(), state);
    if (it == states.end()) return std::nullopt;
    return static_cast<std::size_t>(it - states.begin());
}

std::vector<std::pair<std::string, std::string>> ActivationNetwork::edges() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& n : def_.nodes)
        for (const auto& p : n.parents) out.emplace_back(p, n.name);
    return out;
}

double ActivationNetwork::probability(std::size_t node, std::size_t state,
                                      std::span<const std::size_t> parent_states) const {
    std::size_t row = 0;
    const auto& ps = parents_[node];
    for (std::size_t k = 0; k < ps.size(); ++k) row = row * cardinality(ps[k]) + parent_states[k];
    return def_.nodes[node].cpt[row][state];
}

// ---------------------------------------------------------------------------
// Factors

namespace detail {

namespace {

// Strides of `f` for each variable of `scope` (0 when f does not mention it).
std::vector<std::size_t> strides_in(const Factor& f, const std::vector<std::size_t>& scope) {
    std::vector<std::size_t> own(f.vars.size());
    std::size_t s = 1;
    for (std::size_t k = f.vars.size(); k-- > 0;) {
        own[k] = s;
        s *= f.cards[k];
    }
    std::vector<std::size_t> out(scope.size(), 0);
    for (std::size_t j = 0; j < scope.size(); ++j) {
        auto it = std::find(f.vars.begin(), f.vars.end(), scope[j]);
        if (it != f.vars.end()) out[j] = own[static_cast<std::size_t>(it - f.vars.begin())];
    }
    return out;
}

}  // namespace

Factor multiply(const Factor& a, const Factor& b) {
    Factor r;
    std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(), std::back_inserter(r.vars));
    for (std::size_t v : r.vars) {
        auto ia = std::find(a.vars.begin(), a.vars.end(), v);
        if (ia != a.vars.end()) {
            r.cards.push_back(a.cards[static_cast<std::size_t>(ia - a.vars.begin())]);
        } else {
            auto ib = std::find(b.vars.begin(), b.vars.end(), v);
            r.cards.push_back(b.cards[static_cast<std::size_t>(ib - b.vars.begin())]);
        }
    }
    std::size_t total = 1;
    for (std::size_t c : r.cards) total *= c;
    r.values.assign(total, 0.0);

    const auto sa = strides_in(a, r.vars);
    const auto sb = strides_in(b, r.vars);
    std::vector<std::size_t> digit(r.vars.size(), 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < total; ++i) {
        r.values[i] = a.values[ia] * b.values[ib];
        for (std::size_t k = r.vars.size(); k-- > 0;) {
            if (++digit[k] < r.cards[k]) {
                ia += sa[k];
                ib += sb[k];
                break;
            }
            ia -= sa[k] * (r.cards[k] - 1);
            ib -= sb[k] * (r.cards[k] - 1);
            digit[k] = 0;
        }
    }
    return r;
}

Factor sum_out(const Factor& f, std::size_t var) {
    auto it = std::find(f.vars.begin(), f.vars.end(), var);
    if (it == f.vars.end()) return f;
    const std::size_t pos = static_cast<std::size_t>(it - f.vars.begin());
    Factor r;
    for (std::size_t k = 0; k < f.vars.size(); ++k)
        if (k != pos) {
            r.vars.push_back(f.vars[k]);
            r.cards.push_back(f.cards[k]);
        }
    std::size_t inner = 1;
    for (std::size_t k = pos + 1; k < f.vars.size(); ++k) inner *= f.cards[k];
    const std::size_t card = f.cards[pos];
    const std::size_t outer = f.values.size() / (inner * card);
    r.values.assign(outer * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t s = 0; s < card; ++s)
            for (std::size_t i = 0; i < inner; ++i) r.values[o * inner + i] += f.values[(o * card + s) * inner + i];
    return r;
}

Factor reduce(const Factor& f, std::size_t var, std::size_t state) {
    auto it = std::find(f.vars.begin(), f.vars.end(), var);
    if (it == f.vars.end()) return f;
    const std::size_t pos = static_cast<std::size_t>(it - f.vars.begin());
    Factor r;
    for (std::size_t k = 0; k < f.vars.size(); ++k)
        if (k != pos) {
            r.vars.push_back(f.vars[k]);
            r.cards.push_back(f.cards[k]);
        }
    std::size_t inner = 1;
    for (std::size_t k = pos + 1; k < f.vars.size(); ++k) inner *= f.cards[k];
    const std::size_t card = f.cards[pos];
    const std::size_t outer = f.values.size() / (inner * card);
    r.values.resize(outer * inner);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i) r.values[o * inner + i] = f.values[(o * card + state) * inner + i];
    return r;
}

std::vector<Factor> network_factors(const ActivationNetwork& net, const std::map<std::size_t, std::size_t>& evidence) {
    std::vector<Factor> out;
    for (std::size_t n = 0; n < net.size(); ++n) {
        Factor f;
        f.vars = net.parent_indices(n);
        f.vars.push_back(n);
        std::sort(f.vars.begin(), f.vars.end());
        for (std::size_t v : f.vars) f.cards.push_back(net.cardinality(v));
        std::size_t total = 1;
        for (std::size_t c : f.cards) total *= c;
        f.values.resize(total);

        const auto& ps = net.parent_indices(n);
        std::vector<std::size_t> digit(f.vars.size(), 0);
        std::vector<std::size_t> parent_states(ps.size());
        const std::size_t self_pos = static_cast<std::size_t>(std::find(f.vars.begin(), f.vars.end(), n) - f.vars.begin());
        std::vector<std::size_t> parent_pos(ps.size());
        for (std::size_t k = 0; k < ps.size(); ++k)
            parent_pos[k] = static_cast<std::size_t>(std::find(f.vars.begin(), f.vars.end(), ps[k]) - f.vars.begin());
        for (std::size_t i = 0; i < total; ++i) {
            for (std::size_t k = 0; k < ps.size(); ++k) parent_states[k] = digit[parent_pos[k]];
            f.values[i] = net.probability(n, digit[self_pos], parent_states);
            for (std::size_t k = f.vars.size(); k-- > 0;) {
                if (++digit[k] < f.cards[k]) break;
                digit[k] = 0;
            }
        }
        for (const auto& [var, state] : evidence) f = reduce(f, var, state);
        out.push_back(std::move(f));
    }
    return out;
}

namespace {

// Eliminates every variable not in `keep`; returns the product over `keep`.
Factor eliminate(std::vector<Factor> factors, const std::vector<std::size_t>& keep) {
    std::set<std::size_t> pending;
    for (const auto& f : factors)
        for (std::size_t v : f.vars)
            if (std::find(keep.begin(), keep.end(), v) == keep.end()) pending.insert(v);

    while (!pending.empty()) {
        // Greedy: variable whose elimination creates the smallest table.
        std::size_t best = *pending.begin();
        std::size_t best_size = SIZE_MAX;
        for (std::size_t v : pending) {
            std::map<std::size_t, std::size_t> scope;
            for (const auto& f : factors)
                if (std::find(f.vars.begin(), f.vars.end(), v) != f.vars.end())
                    for (std::size_t k = 0; k < f.vars.size(); ++k) scope[f.vars[k]] = f.cards[k];
            std::size_t size = 1;
            for (const auto& [_, c] : scope) size *= c;
            if (size < best_size) {
                best_size = size;
                best = v;
            }
        }
        pending.erase(best);

        Factor product{{}, {}, {1.0}};
        std::vector<Factor> rest;
        for (auto& f : factors) {
            if (std::find(f.vars.begin(), f.vars.end(), best) != f.vars.end())
                product = multiply(product, f);
            else
                rest.push_back(std::move(f));
        }
        rest.push_back(sum_out(product, best));
        factors = std::move(rest);
    }

    Factor result{{}, {}, {1.0}};
    for (const auto& f : factors) result = multiply(result, f);
    return result;
}

}  // namespace

std::vector<double> eliminate_to(std::vector<Factor> factors, std::size_t query, std::size_t query_card) {
    Factor f = eliminate(std::move(factors), {query});
    if (f.vars.empty()) return std::vector<double>(query_card, f.values.front() / static_cast<double>(query_card));
    return f.values;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Inference

namespace {

std::map<std::size_t, std::size_t> resolve(const ActivationNetwork& net, const Evidence& ev) {
    std::map<std::size_t, std::size_t> out;
    for (const auto& [name, state] : ev) {
        auto n = net.index_of(name);
        if (!n) throw InvalidEvidence("evidence names unknown node '" + name + "'");
        auto s = net.state_index(*n, state);
        if (!s) throw InvalidEvidence("evidence names unknown state '" + state + "' of node '" + name + "'");
        out.emplace(*n, *s);
    }
    return out;
}

// Nodes that are ancestors of (or equal to) the given ones. Others are barren and sum to one.
std::vector<bool> relevant_nodes(const ActivationNetwork& net, const std::vector<std::size_t>& targets) {
    std::vector<bool> keep(net.size(), false);
    std::vector<std::size_t> todo = targets;
    for (std::size_t t : targets) keep[t] = true;
    while (!todo.empty()) {
        std::size_t u = todo.back();
        todo.pop_back();
        for (std::size_t p : net.parent_indices(u))
            if (!keep[p]) {
                keep[p] = true;
                todo.push_back(p);
            }
    }
    return keep;
}

std::vector<detail::Factor> pruned_factors(const ActivationNetwork& net, const std::map<std::size_t, std::size_t>& ev,
                                           std::optional<std::size_t> query) {
    std::vector<std::size_t> targets;
    for (const auto& [n, _] : ev) targets.push_back(n);
    if (query) targets.push_back(*query);
    const auto keep = relevant_nodes(net, targets);
    auto all = detail::network_factors(net, ev);
    std::vector<detail::Factor> out;
    for (std::size_t n = 0; n < net.size(); ++n)
        if (keep[n]) out.push_back(std::move(all[n]));
    return out;
}

double joint_evidence(const ActivationNetwork& net, const std::map<std::size_t, std::size_t>& ev) {
    if (ev.empty()) return 1.0;
    auto factors = pruned_factors(net, ev, std::nullopt);
    const std::size_t any = ev.begin()->first;
    // Every variable is either reduced or eliminated; the remaining product is P(ev).
    auto values = detail::eliminate_to(std::move(factors), any, 1);
    return values.front();
}

[[noreturn]] void throw_impossible(const ActivationNetwork& net, std::map<std::size_t, std::size_t> ev) {
    // Shrink to a minimal conflicting subset: drop each observation that is not needed for P = 0.
    std::vector<std::size_t> order;
    for (const auto& [n, _] : ev) order.push_back(n);
    for (std::size_t n : order) {
        auto trial = ev;
        trial.erase(n);
        if (joint_evidence(net, trial) <= 0.0) ev = std::move(trial);
    }
    std::vector<std::string> names;
    for (const auto& [n, _] : ev) names.push_back(net.node(n).name);
    std::sort(names.begin(), names.end());
    throw ImpossibleEvidence(std::move(names));
}

}  // namespace

double evidence_probability(const ActivationNetwork& net, const Evidence& ev) {
    return joint_evidence(net, resolve(net, ev));
}

Distribution posterior(const ActivationNetwork& net, const Evidence& ev, const std::string& query) {
    if (net.empty()) throw InvalidEvidence("empty network");
    auto q = net.index_of(query);
    if (!q) throw InvalidEvidence("query names unknown node '" + query + "'");
    const auto resolved = resolve(net, ev);

    Distribution d;
    d.states = net.node(*q).states;
    const std::size_t card = net.cardinality(*q);

    if (auto it = resolved.find(*q); it != resolved.end()) {
        if (joint_evidence(net, resolved) <= 0.0) throw_impossible(net, resolved);
        d.probabilities.assign(card, 0.0);
        d.probabilities[it->second] = 1.0;
        return d;
    }

    auto values = detail::eliminate_to(pruned_factors(net, resolved, *q), *q, card);
    const double total = std::accumulate(values.begin(), values.end(), 0.0);
    if (total <= 0.0) throw_impossible(net, resolved);
    d.probabilities.resize(card);
    for (std::size_t i = 0; i < card; ++i) d.probabilities[i] = values[i] / total;
    return d;
}

StateExpectation actor_expectation(const ActivationNetwork& net, const Evidence& ev, const std::string& node) {
    const Distribution d = posterior(net, ev, node);
    std::size_t best = 0;
    for (std::size_t i = 1; i < d.probabilities.size(); ++i)
        if (d.probabilities[i] > d.probabilities[best]) best = i;
    return {d.states[best], d.probabilities[best]};
}

double entropy_bits(std::span<const double> p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log2(x);
    return h;
}

double information_gain(const ActivationNetwork& net, const Evidence& ev, const std::string& node) {
    if (ev.count(node)) throw InvalidEvidence("candidate '" + node + "' is already observed");
    const Distribution root_now = posterior(net, ev, net.root());
    const Distribution candidate = posterior(net, ev, node);
    double expected = 0.0;
    for (std::size_t i = 0; i < candidate.states.size(); ++i) {
        const double px = candidate.probabilities[i];
        if (px <= 0.0) continue;
        Evidence extended = ev;
        extended[node] = candidate.states[i];
        const Distribution root_then = posterior(net, extended, net.root());
        expected += px * entropy_bits(root_then.probabilities);
    }
    return entropy_bits(root_now.probabilities) - expected;
}

void sort_ranking(std::vector<RankedQuestion>& ranking) {
    auto bucket = [](double g) { return std::llround(g / kGainTieTolerance); };
    std::sort(ranking.begin(), ranking.end(), [&](const RankedQuestion& a, const RankedQuestion& b) {
        const auto ba = bucket(a.gain), bb = bucket(b.gain);
        if (ba != bb) return ba > bb;
        return a.node < b.node;
    });
}

std::vector<RankedQuestion> information_gain_ranking(const ActivationNetwork& net, const Evidence& ev,
                                                     const std::vector<std::string>& candidates) {
    std::vector<RankedQuestion> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) out.push_back({c, information_gain(net, ev, c)});
    sort_ranking(out);
    return out;
}

}  // namespace practica
