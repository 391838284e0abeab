#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <random>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "practica/activation_net.hpp"

using namespace practica;

namespace {

NodeDefinition node(std::string name, std::vector<std::string> states, std::vector<std::string> parents,
                    std::vector<std::vector<double>> cpt) {
    return {std::move(name), std::move(states), std::move(parents), std::move(cpt)};
}

NetworkDefinition root_only(double active) {
    return {"p", {node("p", {"active", "inactive"}, {}, {{active, 1.0 - active}})}};
}

// Root with a deterministic copy C and an independent coin I.
NetworkDefinition copy_and_coin() {
    return {"p",
            {node("p", {"active", "inactive"}, {}, {{0.5, 0.5}}),
             node("c", {"yes", "no"}, {"p"}, {{1.0, 0.0}, {0.0, 1.0}}),
             node("i", {"heads", "tails"}, {"p"}, {{0.5, 0.5}, {0.5, 0.5}})}};
}

bool has_code(const std::vector<NetworkDiagnostic>& ds, const std::string& code, const std::string& node = {}) {
    return std::any_of(ds.begin(), ds.end(),
                       [&](const auto& d) { return d.code == code && (node.empty() || d.node == node); });
}

}  // namespace

TEST(ValidateNetwork, TwoNodeChainIsValid) {
    NetworkDefinition def{"p",
                          {node("p", {"active", "inactive"}, {}, {{0.3, 0.7}}),
                           node("x", {"a", "b"}, {"p"}, {{0.9, 0.1}, {0.2, 0.8}})}};
    EXPECT_TRUE(validate_network(def).empty());
}

TEST(ValidateNetwork, RowSumReportedWithNode) {
    NetworkDefinition def{"p",
                          {node("p", {"active", "inactive"}, {}, {{0.5, 0.5}}),
                           node("x", {"a", "b"}, {"p"}, {{0.5, 0.6}, {0.5, 0.5}})}};
    const auto ds = validate_network(def);
    ASSERT_TRUE(has_code(ds, "CPT_ROW_SUM", "x"));
    const auto it = std::find_if(ds.begin(), ds.end(), [](const auto& d) { return d.code == "CPT_ROW_SUM"; });
    EXPECT_EQ(it->row, std::optional<std::size_t>(0));
    EXPECT_NE(it->message.find("1.1"), std::string::npos) << it->message;
}

TEST(ValidateNetwork, CycleNamesItsNodes) {
    NetworkDefinition def{"p",
                          {node("p", {"active", "inactive"}, {}, {{0.5, 0.5}}),
                           node("a", {"t", "f"}, {"p", "b"}, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}),
                           node("b", {"t", "f"}, {"a"}, {{0.5, 0.5}, {0.5, 0.5}})}};
    const auto ds = validate_network(def);
    ASSERT_TRUE(has_code(ds, "NETWORK_CYCLE"));
    const auto it = std::find_if(ds.begin(), ds.end(), [](const auto& d) { return d.code == "NETWORK_CYCLE"; });
    EXPECT_NE(it->message.find('a'), std::string::npos);
    EXPECT_NE(it->message.find('b'), std::string::npos);
}

TEST(ValidateNetwork, MissingRowUnknownParentAndRange) {
    NetworkDefinition def{"p",
                          {node("p", {"active", "inactive"}, {}, {{0.5, 0.5}}),
                           node("x", {"a", "b"}, {"p"}, {{0.5, 0.5}}),
                           node("y", {"a", "b"}, {"ghost"}, {{0.5, 0.5}}),
                           node("z", {"a", "b"}, {"p"}, {{1.5, -0.5}, {0.5, 0.5}})}};
    const auto ds = validate_network(def);
    EXPECT_TRUE(has_code(ds, "CPT_MISSING_ROW", "x"));
    EXPECT_TRUE(has_code(ds, "UNKNOWN_PARENT", "y"));
    EXPECT_TRUE(has_code(ds, "CPT_RANGE", "z"));
}

TEST(ValidateNetwork, RootRulesAndStates) {
    NetworkDefinition no_root{"missing", {node("p", {"active", "inactive"}, {}, {{0.5, 0.5}})}};
    EXPECT_TRUE(has_code(validate_network(no_root), "NETWORK_ROOT"));
    NetworkDefinition dup_state{"p", {node("p", {"active", "active"}, {}, {{0.5, 0.5}})}};
    EXPECT_TRUE(has_code(validate_network(dup_state), "DUPLICATE_STATE"));
    NetworkDefinition one_state{"p",
                                {node("p", {"active", "inactive"}, {}, {{0.5, 0.5}}),
                                 node("x", {"only"}, {"p"}, {{1.0}, {1.0}})}};
    EXPECT_TRUE(has_code(validate_network(one_state), "NODE_STATES", "x"));
    EXPECT_TRUE(has_code(validate_network(NetworkDefinition{}), "NETWORK_EMPTY"));
}

TEST(ValidateNetwork, UnreachableNode) {
    NetworkDefinition def{"p",
                          {node("p", {"active", "inactive"}, {}, {{0.5, 0.5}}),
                           node("orphan", {"a", "b"}, {}, {{0.5, 0.5}})}};
    EXPECT_TRUE(has_code(validate_network(def), "NETWORK_UNREACHABLE", "orphan"));
}

TEST(ValidateNetwork, ConstructorThrowsWithAllDiagnostics) {
    NetworkDefinition def{"p",
                          {node("p", {"active", "inactive"}, {}, {{0.5, 0.6}}),
                           node("x", {"a", "b"}, {"p"}, {{0.5, 0.5}})}};
    try {
        ActivationNetwork net(def);
        FAIL() << "expected InvalidNetwork";
    } catch (const InvalidNetwork& e) {
        EXPECT_GE(e.diagnostics().size(), 2u);
    }
}

TEST(Posterior, DeterministicChildInvertsExactly) {
    ActivationNetwork net(copy_and_coin());
    const auto d = posterior(net, {{"c", "yes"}}, "p");
    EXPECT_EQ(d.at("active"), 1.0);
    EXPECT_EQ(d.at("inactive"), 0.0);
}

TEST(Posterior, EmptyEvidenceGivesRootPrior) {
    ActivationNetwork net(root_only(0.3));
    EXPECT_DOUBLE_EQ(posterior(net, {}, "p").at("active"), 0.3);
    ActivationNetwork dpd = fixtures::practice("doctor_patient_dialogue").activation;
    EXPECT_NEAR(posterior(dpd, {}, dpd.root()).at("active"), 0.5, 1e-12);
}

TEST(Posterior, ShippedConsultationNetworkMatchesOracle) {
    const auto& net = fixtures::practice("doctor_patient_dialogue").activation;
    const Evidence ev{{"current_time", "consulting_time"}, {"place", "consulting_room"}};
    const auto joint = oracle::enumerate(net.definition());
    const auto expected = oracle::posterior(joint, ev, net.root());
    const auto got = posterior(net, ev, net.root());
    ASSERT_EQ(got.probabilities.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(got.probabilities[i], expected[i], 1e-12);
    // 0.5*0.85*0.8 / (0.5*0.85*0.8 + 0.5*0.3*0.2)
    EXPECT_NEAR(got.at("active"), 34.0 / 37.0, 1e-12);
}

TEST(Posterior, ImpossibleEvidenceNamesNodes) {
    ActivationNetwork net(copy_and_coin());
    try {
        posterior(net, {{"c", "yes"}, {"p", "inactive"}}, "i");
        FAIL() << "expected ImpossibleEvidence";
    } catch (const ImpossibleEvidence& e) {
        EXPECT_FALSE(e.nodes().empty());
        for (const auto& n : e.nodes()) EXPECT_TRUE(n == "c" || n == "p") << n;
    }
}

TEST(Posterior, InvalidEvidenceAndQuery) {
    ActivationNetwork net(copy_and_coin());
    EXPECT_THROW(posterior(net, {{"ghost", "yes"}}, "p"), InvalidEvidence);
    EXPECT_THROW(posterior(net, {{"c", "maybe"}}, "p"), InvalidEvidence);
    EXPECT_THROW(posterior(net, {}, "ghost"), InvalidEvidence);
}

TEST(Posterior, EvidenceOnQueryIsPointMass) {
    ActivationNetwork net(copy_and_coin());
    const auto d = posterior(net, {{"i", "tails"}}, "i");
    EXPECT_EQ(d.at("tails"), 1.0);
    EXPECT_EQ(d.at("heads"), 0.0);
}

TEST(ActorExpectation, DeterministicPatient) {
    NetworkDefinition def{"p",
                          {node("p", {"active", "inactive"}, {}, {{0.5, 0.5}}),
                           node("actor", {"patient", "nurse"}, {"p"}, {{1.0, 0.0}, {0.2, 0.8}})}};
    ActivationNetwork net(def);
    const auto e = actor_expectation(net, {{"p", "active"}}, "actor");
    EXPECT_EQ(e.state, "patient");
    EXPECT_EQ(e.probability, 1.0);
}

TEST(ActorExpectation, UniformPicksFirstState) {
    NetworkDefinition def{"p",
                          {node("p", {"active", "inactive"}, {}, {{0.5, 0.5}}),
                           node("actor", {"patient", "nurse", "relative"}, {"p"},
                                {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}})}};
    ActivationNetwork net(def);
    const auto e = actor_expectation(net, {}, "actor");
    EXPECT_EQ(e.state, "patient");
    EXPECT_NEAR(e.probability, 1.0 / 3, 1e-12);
}

TEST(ActorExpectation, ShippedConsultationExpectsPatient) {
    const auto& net = fixtures::practice("doctor_patient_dialogue").activation;
    const Evidence ev{{"current_time", "consulting_time"}, {"place", "consulting_room"}};
    const auto e = actor_expectation(net, ev, "interlocutor");
    EXPECT_EQ(e.state, "patient");
    const auto joint = oracle::enumerate(net.definition());
    EXPECT_NEAR(e.probability, oracle::posterior(joint, ev, "interlocutor")[0], 1e-12);
}

TEST(InformationGain, IndependentNodeZeroDeterministicFull) {
    ActivationNetwork net(copy_and_coin());
    const auto ranking = information_gain_ranking(net, {}, {"i", "c"});
    ASSERT_EQ(ranking.size(), 2u);
    EXPECT_EQ(ranking[0].node, "c");
    EXPECT_NEAR(ranking[0].gain, 1.0, 1e-12);  // full entropy of a fair root
    EXPECT_EQ(ranking[1].node, "i");
    EXPECT_NEAR(ranking[1].gain, 0.0, 1e-12);
}

TEST(InformationGain, TiesOrderedByName) {
    NetworkDefinition def{"p",
                          {node("p", {"active", "inactive"}, {}, {{0.5, 0.5}}),
                           node("zeta", {"a", "b"}, {"p"}, {{0.8, 0.2}, {0.2, 0.8}}),
                           node("alpha", {"a", "b"}, {"p"}, {{0.8, 0.2}, {0.2, 0.8}})}};
    ActivationNetwork net(def);
    const auto r = information_gain_ranking(net, {}, {"zeta", "alpha"});
    EXPECT_EQ(r[0].node, "alpha");
    EXPECT_EQ(r[1].node, "zeta");
}

TEST(InformationGain, ShippedThreeNodeNetworkMatchesEnumeration) {
    const auto& net = fixtures::practice("consulting_my_doctor").activation;
    ASSERT_EQ(net.size(), 3u);
    const auto joint = oracle::enumerate(net.definition());
    std::vector<std::string> candidates;
    for (std::size_t i = 0; i < net.size(); ++i)
        if (net.node(i).name != net.root()) candidates.push_back(net.node(i).name);
    const auto ranking = information_gain_ranking(net, {}, candidates);

    std::vector<std::pair<std::string, double>> expected;
    for (const auto& c : candidates) expected.emplace_back(c, oracle::information_gain(joint, {}, net.root(), c));
    std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
        if (std::abs(a.second - b.second) > 1e-12) return a.second > b.second;
        return a.first < b.first;
    });
    ASSERT_EQ(ranking.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(ranking[i].node, expected[i].first);
        EXPECT_NEAR(ranking[i].gain, expected[i].second, 1e-12);
    }
    EXPECT_EQ(ranking[0].node, "doctor_known");
}

TEST(Entropy, Bits) {
    const std::vector<double> fair{0.5, 0.5};
    EXPECT_DOUBLE_EQ(entropy_bits(fair), 1.0);
    const std::vector<double> sure{1.0, 0.0};
    EXPECT_EQ(entropy_bits(sure), 0.0);
}

// ---------------------------------------------------------------------------
// Properties over random networks

TEST(OracleProperty, PosteriorMatchesEnumerationOnRandomNetworks) {
    std::mt19937_64 rng(20240611);
    const auto start = std::chrono::steady_clock::now();
    int impossible = 0;
    for (int seed = 0; seed < 250; ++seed) {
        const auto def = oracle::random_network(rng);
        ASSERT_TRUE(validate_network(def).empty()) << "generator produced an invalid network";
        ActivationNetwork net(def);
        const auto joint = oracle::enumerate(def);
        for (int q = 0; q < 3; ++q) {
            const auto& query = def.nodes[rng() % def.nodes.size()].name;
            const auto ev = oracle::random_evidence(rng, def, query);
            const auto expected = oracle::posterior(joint, ev, query);
            if (expected.empty()) {
                ++impossible;
                EXPECT_THROW(posterior(net, ev, query), ImpossibleEvidence);
                continue;
            }
            const auto got = posterior(net, ev, query);
            double sum = 0.0;
            for (std::size_t i = 0; i < expected.size(); ++i) {
                ASSERT_NEAR(got.probabilities[i], expected[i], 1e-9) << "network " << seed << " query " << query;
                sum += got.probabilities[i];
            }
            EXPECT_NEAR(sum, 1.0, 1e-9);
            EXPECT_NEAR(evidence_probability(net, ev), oracle::evidence_probability(joint, ev), 1e-12);
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(secs, 5.0);
    EXPECT_GT(impossible, 0) << "generator never exercised impossible evidence";
}

TEST(OracleProperty, IncrementalEvidenceEqualsOneStep) {
    std::mt19937_64 rng(99);
    int checked = 0;
    for (int seed = 0; seed < 200; ++seed) {
        const auto def = oracle::random_network(rng, 8, 3);
        ActivationNetwork net(def);
        const auto e1 = oracle::random_evidence(rng, def, def.root);
        Evidence e2;
        for (const auto& [k, v] : oracle::random_evidence(rng, def, def.root))
            if (!e1.count(k)) e2[k] = v;
        Evidence both = e1;
        both.insert(e2.begin(), e2.end());
        if (evidence_probability(net, both) == 0.0) {
            EXPECT_THROW(posterior(net, both, def.root), ImpossibleEvidence);
            continue;
        }
        // Step 1: P(root | e1). Step 2: multiply by P(e2 | root, e1) and renormalize.
        const auto prior = posterior(net, e1, def.root);
        std::vector<double> updated;
        double z = 0.0;
        for (std::size_t i = 0; i < prior.states.size(); ++i) {
            Evidence with_root = e1;
            with_root[def.root] = prior.states[i];
            const double base = evidence_probability(net, with_root);
            double lik = 0.0;
            if (base > 0.0) {
                with_root.insert(e2.begin(), e2.end());
                lik = evidence_probability(net, with_root) / base;
            }
            updated.push_back(prior.probabilities[i] * lik);
            z += updated.back();
        }
        const auto one_step = posterior(net, both, def.root);
        for (std::size_t i = 0; i < updated.size(); ++i) EXPECT_NEAR(updated[i] / z, one_step.probabilities[i], 1e-9);
        ++checked;
    }
    EXPECT_GT(checked, 100);
}

TEST(OracleProperty, NormalizationInvarianceOnFactors) {
    std::mt19937_64 rng(5);
    for (int seed = 0; seed < 100; ++seed) {
        const auto def = oracle::random_network(rng, 7, 3);
        ActivationNetwork net(def);
        const auto query = *net.index_of(def.root);
        auto factors = detail::network_factors(net, {});
        const auto base = detail::eliminate_to(factors, query, net.cardinality(query));
        const double c = 0.1 + 10.0 * std::uniform_real_distribution<double>(0, 1)(rng);
        for (auto& v : factors[rng() % factors.size()].values) v *= c;
        const auto scaled = detail::eliminate_to(factors, query, net.cardinality(query));
        double zb = 0.0, zs = 0.0;
        for (double v : base) zb += v;
        for (double v : scaled) zs += v;
        ASSERT_GT(zb, 0.0);
        for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(base[i] / zb, scaled[i] / zs, 1e-12);
    }
}

TEST(OracleProperty, GainRankingIsPermutationWithNonNegativeGains) {
    std::mt19937_64 rng(17);
    for (int seed = 0; seed < 200; ++seed) {
        const auto def = oracle::random_network(rng, 8, 4);
        ActivationNetwork net(def);
        const auto joint = oracle::enumerate(def);
        const auto ev = oracle::random_evidence(rng, def, def.root);
        if (oracle::evidence_probability(joint, ev) == 0.0) continue;
        std::vector<std::string> candidates;
        for (const auto& n : def.nodes)
            if (n.name != def.root && !ev.count(n.name)) candidates.push_back(n.name);
        const auto ranking = information_gain_ranking(net, ev, candidates);
        std::vector<std::string> names;
        for (const auto& r : ranking) {
            names.push_back(r.node);
            EXPECT_GE(r.gain, -1e-9);
            EXPECT_NEAR(r.gain, oracle::information_gain(joint, ev, def.root, r.node), 1e-9);
        }
        auto sorted_in = candidates, sorted_out = names;
        std::sort(sorted_in.begin(), sorted_in.end());
        std::sort(sorted_out.begin(), sorted_out.end());
        EXPECT_EQ(sorted_in, sorted_out);
        for (std::size_t i = 1; i < ranking.size(); ++i) EXPECT_GE(ranking[i - 1].gain, ranking[i].gain - 1e-12);
    }
}

TEST(Factors, MultiplySumOutReduce) {
    detail::Factor a{{0}, {2}, {0.3, 0.7}};
    detail::Factor b{{0, 1}, {2, 2}, {0.9, 0.1, 0.2, 0.8}};
    const auto ab = detail::multiply(a, b);
    ASSERT_EQ(ab.vars, (std::vector<std::size_t>{0, 1}));
    EXPECT_NEAR(ab.values[0], 0.27, 1e-15);
    EXPECT_NEAR(ab.values[3], 0.56, 1e-15);
    const auto m = detail::sum_out(ab, 0);
    ASSERT_EQ(m.vars, (std::vector<std::size_t>{1}));
    EXPECT_NEAR(m.values[0], 0.27 + 0.14, 1e-15);
    const auto r = detail::reduce(ab, 1, 1);
    ASSERT_EQ(r.vars, (std::vector<std::size_t>{0}));
    EXPECT_NEAR(r.values[0], 0.03, 1e-15);
    EXPECT_NEAR(r.values[1], 0.56, 1e-15);
}
