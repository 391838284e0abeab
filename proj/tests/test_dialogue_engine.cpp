#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "practica/dialogue_engine.hpp"

using namespace practica;

namespace {

NodeSpec say(std::string id, Speaker who, std::vector<NodeSpec> children = {}) {
    NodeSpec n;
    n.id = id;
    n.speaker = who;
    n.text = "text of " + id;
    n.children = std::move(children);
    return n;
}

NodeSpec player(std::string id, std::vector<NodeSpec> children = {}) {
    return say(std::move(id), Speaker::player, std::move(children));
}
NodeSpec computer(std::string id, std::vector<NodeSpec> children = {}) {
    return say(std::move(id), Speaker::computer, std::move(children));
}

// Two interleaves: {t1, t2} under `rule`, then {t3}.
Scenario two_phase(CompletionRule::Kind rule) {
    Scenario sc;
    sc.id = "s";
    sc.title = "test";
    sc.parameters = {{"mood", 0.5, 0.0, 1.0}};
    sc.add_tree("t1", {player("a", {computer("a_r")})});
    sc.add_tree("t2", {player("b", {computer("b_r")})});
    sc.add_tree("t3", {player("c")});
    sc.interleaves = {{"first", {"t1", "t2"}, {rule, {}}}, {"second", {"t3"}, {}}};
    return sc;
}

bool has_code(const std::vector<ModelDiagnostic>& ds, const std::string& code) {
    return std::any_of(ds.begin(), ds.end(), [&](const auto& d) { return d.code == code; });
}

std::set<std::string> player_ids(const Scenario& sc) {
    std::set<std::string> out;
    for (const auto& n : sc.nodes)
        if (n.speaker == Speaker::player) out.insert(n.id);
    return out;
}

}  // namespace

TEST(Scenario, AddTreeFlattensAndNestedInverts) {
    Scenario sc = two_phase(CompletionRule::Kind::any_one);
    ASSERT_EQ(sc.nodes.size(), 5u);
    EXPECT_EQ(sc.nodes[0].id, "a");
    EXPECT_EQ(sc.nodes[1].id, "a_r");
    EXPECT_EQ(sc.nodes[1].parent, std::optional<std::size_t>(0));
    const auto nested = sc.nested(0);
    ASSERT_EQ(nested.size(), 1u);
    EXPECT_EQ(nested[0].id, "a");
    ASSERT_EQ(nested[0].children.size(), 1u);
    EXPECT_EQ(nested[0].children[0].id, "a_r");
}

TEST(Scenario, ValidationErrors) {
    Scenario sc = two_phase(CompletionRule::Kind::any_one);
    EXPECT_TRUE(validate_scenario(sc).empty());

    Scenario bad = sc;
    bad.parameters[0].initial = 2.0;
    EXPECT_TRUE(has_code(validate_scenario(bad), "RANGE"));
    EXPECT_THROW(init_state(bad), ValidationError);

    bad = sc;
    bad.add_tree("t4", {player("d", {player("e")})});
    EXPECT_TRUE(has_code(validate_scenario(bad), "SPEAKER_ALTERNATION"));

    bad = sc;
    auto guarded = player("g");
    guarded.precondition = Condition::parameter_is("ghost", Comparison::ge, 1);
    bad.add_tree("t5", {guarded});
    EXPECT_TRUE(has_code(validate_scenario(bad), "UNKNOWN_PARAMETER"));

    bad = sc;
    bad.add_tree("t6", {player("a")});
    EXPECT_TRUE(has_code(validate_scenario(bad), "DUPLICATE_ID"));

    bad = sc;
    bad.interleaves.clear();
    EXPECT_TRUE(has_code(validate_scenario(bad), "MISSING_FIELD"));

    bad = sc;
    bad.interleaves[0].trees.push_back("nowhere");
    EXPECT_TRUE(has_code(validate_scenario(bad), "DANGLING_REFERENCE"));

    bad = sc;
    bad.parameters.push_back(bad.parameters[0]);
    EXPECT_TRUE(has_code(validate_scenario(bad), "DUPLICATE_ID"));
}

TEST(InitState, AuthoredInitials) {
    const auto& sc = fixtures::anamnesis();
    const auto st = init_state(sc);
    EXPECT_EQ(st.emotions, sc.emotion_initial);
    EXPECT_DOUBLE_EQ(st.emotions[Emotion::happiness], 0.4);
    EXPECT_EQ(st.interleave, 0u);
    EXPECT_FALSE(st.active_tree);
    EXPECT_FALSE(st.terminal);
    for (const auto& p : sc.parameters) EXPECT_EQ(st.parameters.at(p.name), p.initial);
}

TEST(AvailableMoves, FreshAnamnesisOffersAartsOpener) {
    const auto& sc = fixtures::anamnesis();
    const auto moves = available_moves(sc, init_state(sc));
    ASSERT_FALSE(moves.empty());
    const bool found = std::any_of(moves.begin(), moves.end(), [&](const std::string& id) {
        return sc.find_node(id)->text == "I see you are a patient of Dr. Aarts.";
    });
    EXPECT_TRUE(found);
}

TEST(AvailableMoves, EmptyPreconditionTreeIsImmediatelyPlayable) {
    Scenario sc = two_phase(CompletionRule::Kind::any_one);
    EXPECT_EQ(available_moves(sc, init_state(sc)), (std::vector<std::string>{"a", "b"}));
}

TEST(AvailableMoves, DominantEmotionPreconditionFilters) {
    Scenario sc;
    sc.id = "s";
    auto hostile = player("hostile");
    hostile.precondition = Condition::dominant(Emotion::contempt);
    sc.add_tree("t", {hostile, player("calm")});
    sc.interleaves = {{"only", {"t"}, {}}};
    std::array<double, kEmotionCount> e{};
    e[0] = 0.5;
    sc.emotion_initial = EmotionVector(e);
    EXPECT_EQ(available_moves(sc, init_state(sc)), (std::vector<std::string>{"calm"}));
}

TEST(AvailableMoves, TerminalThrows) {
    Scenario sc = two_phase(CompletionRule::Kind::any_one);
    auto st = init_state(sc);
    st = apply_move(sc, st, "a").state;
    st = apply_move(sc, st, "c").state;
    ASSERT_TRUE(st.terminal);
    EXPECT_THROW(available_moves(sc, st), DialogueEnded);
    EXPECT_THROW(apply_move(sc, st, "c"), DialogueEnded);
}

TEST(ApplyMove, IllegalMoveNamesLegalSet) {
    Scenario sc = two_phase(CompletionRule::Kind::any_one);
    try {
        apply_move(sc, init_state(sc), "c");
        FAIL();
    } catch (const IllegalMove& e) {
        EXPECT_EQ(e.legal(), (std::vector<std::string>{"a", "b"}));
        EXPECT_NE(std::string(e.what()).find("c"), std::string::npos);
    }
}

TEST(ApplyMove, FirstMatchingReplyInAuthoredOrder) {
    Scenario sc;
    sc.id = "s";
    sc.parameters = {{"x", 0, 0, 1}};
    auto r1 = computer("high");
    r1.precondition = Condition::parameter_is("x", Comparison::ge, 1);
    auto r2 = computer("low");
    auto r3 = computer("never");
    auto p = player("p", {r1, r2, r3});
    sc.add_tree("t", {p});
    sc.interleaves = {{"only", {"t"}, {}}};
    const auto out = apply_move(sc, init_state(sc), "p");
    EXPECT_EQ(out.reply, std::optional<std::string>("low"));
    EXPECT_EQ(out.state.history, (std::vector<std::string>{"p", "low"}));
}

TEST(ApplyMove, EffectsAreClampedToRanges) {
    Scenario sc;
    sc.id = "s";
    sc.parameters = {{"x", 0.8, 0, 1}};
    auto p = player("p");
    p.effects.parameters["x"] = 0.5;
    p.effects.emotions[Emotion::fear] = 0.9;
    sc.add_tree("t", {p});
    sc.interleaves = {{"only", {"t"}, {}}};
    const auto out = apply_move(sc, init_state(sc), "p");
    EXPECT_EQ(out.state.parameters.at("x"), 1.0);
    EXPECT_NEAR(out.parameter_change.at("x"), 0.2, 1e-12);
    EXPECT_EQ(out.state.emotions[Emotion::fear], 0.9);
}

TEST(ApplyMove, EarlyIntroductionRaisesHappiness) {
    const auto& sc = fixtures::anamnesis();
    const auto st = init_state(sc);
    const auto out = apply_move(sc, st, "intro_early");
    EXPECT_NEAR(out.state.emotions[Emotion::happiness] - st.emotions[Emotion::happiness], 0.2, 1e-12);
    const std::vector<std::string> events = {out.events[0].name, out.events[1].name};
    EXPECT_EQ(events, (std::vector<std::string>{"welcome", "presentation"}));
}

TEST(ApplyMove, DisclosureWithContemptTurnsAngry) {
    const auto& sc = fixtures::anamnesis();
    auto st = apply_move(sc, init_state(sc), "data_first").state;
    ASSERT_EQ(dominant_emotion(st.emotions), Emotion::contempt);
    const auto out = apply_move(sc, st, "disclosure_late");
    EXPECT_EQ(out.reply, std::optional<std::string>("disclosure_late_angry"));
    EXPECT_EQ(dominant_emotion(out.state.emotions), Emotion::anger);
}

TEST(ApplyMove, DisclosureWithHappinessRaisesSurprise) {
    const auto& sc = fixtures::anamnesis();
    auto st = apply_move(sc, init_state(sc), "intro_early").state;
    ASSERT_EQ(dominant_emotion(st.emotions), Emotion::happiness);
    const auto out = apply_move(sc, st, "disclosure_introduced");
    EXPECT_EQ(out.reply, std::optional<std::string>("disclosure_introduced_surprised"));
    EXPECT_GT(out.state.emotions[Emotion::surprise], st.emotions[Emotion::surprise]);
}

TEST(Interleave, AnyOneAdvances) {
    Scenario sc = two_phase(CompletionRule::Kind::any_one);
    const auto out = apply_move(sc, init_state(sc), "a");
    EXPECT_TRUE(out.interleave_advanced);
    EXPECT_EQ(out.state.interleave, 1u);
    EXPECT_EQ(available_moves(sc, out.state), (std::vector<std::string>{"c"}));
}

TEST(Interleave, AllRuleWithOneFinishedIsIncomplete) {
    Scenario sc = two_phase(CompletionRule::Kind::all);
    const auto out = apply_move(sc, init_state(sc), "a");
    EXPECT_FALSE(out.interleave_advanced);
    EXPECT_FALSE(completion_met(sc, out.state));
    try {
        advance_interleave(sc, out.state);
        FAIL();
    } catch (const InterleaveIncomplete& e) {
        EXPECT_EQ(e.open_trees(), (std::vector<std::string>{"t2"}));
    }
    // A finished tree is not offered again.
    EXPECT_EQ(available_moves(sc, out.state), (std::vector<std::string>{"b"}));
}

TEST(Interleave, ExplicitListRule) {
    Scenario sc = two_phase(CompletionRule::Kind::explicit_list);
    sc.interleaves[0].completion.trees = {"t2"};
    auto st = apply_move(sc, init_state(sc), "a").state;
    EXPECT_EQ(st.interleave, 0u);
    st = apply_move(sc, st, "b").state;
    EXPECT_EQ(st.interleave, 1u);
}

TEST(Interleave, LastCompletedIsTerminal) {
    Scenario sc = two_phase(CompletionRule::Kind::any_one);
    auto st = apply_move(sc, init_state(sc), "b").state;
    st = apply_move(sc, st, "c").state;
    EXPECT_TRUE(st.terminal);
    EXPECT_FALSE(is_dead_end(sc, st));
}

TEST(DeadEnd, GuardedFrontierIsReported) {
    Scenario sc;
    sc.id = "s";
    sc.parameters = {{"x", 0, 0, 1}};
    auto g = player("g");
    g.precondition = Condition::parameter_is("x", Comparison::ge, 1);
    sc.add_tree("t", {g});
    sc.interleaves = {{"only", {"t"}, {}}};
    const auto st = init_state(sc);
    EXPECT_TRUE(available_moves(sc, st).empty());
    EXPECT_TRUE(is_dead_end(sc, st));
}

TEST(Conditions, Evaluate) {
    DialogueState st;
    st.parameters["x"] = 0.5;
    std::array<double, kEmotionCount> e{};
    e[static_cast<std::size_t>(Emotion::fear)] = 0.6;
    st.emotions = EmotionVector(e);
    st.history = {"seen"};
    EXPECT_TRUE(evaluate(Condition{}, st));
    EXPECT_TRUE(evaluate(Condition::parameter_is("x", Comparison::eq, 0.5), st));
    EXPECT_FALSE(evaluate(Condition::parameter_is("x", Comparison::gt, 0.5), st));
    EXPECT_TRUE(evaluate(Condition::emotion_is(Emotion::fear, Comparison::ge, 0.6), st));
    EXPECT_TRUE(evaluate(Condition::dominant(Emotion::fear), st));
    EXPECT_TRUE(evaluate(Condition::visited_node("seen"), st));
    EXPECT_FALSE(evaluate(Condition::visited_node("unseen"), st));
    EXPECT_TRUE(evaluate(Condition::negation(Condition::visited_node("unseen")), st));
    EXPECT_FALSE(evaluate(Condition::all_of({Condition{}, Condition::visited_node("unseen")}), st));
    EXPECT_TRUE(evaluate(Condition::any_of({Condition::visited_node("unseen"), Condition{}}), st));
}

// ---------------------------------------------------------------------------
// Exhaustive walk over the shipped scenario

namespace {

struct WalkStats {
    std::size_t states = 0;
    std::size_t terminals = 0;
};

void walk(const Scenario& sc, const DialogueState& st, const std::set<std::string>& all_players, WalkStats& stats) {
    ++stats.states;
    for (const auto& p : sc.parameters) {
        ASSERT_GE(st.parameters.at(p.name), p.lo);
        ASSERT_LE(st.parameters.at(p.name), p.hi);
    }
    if (st.terminal) {
        ++stats.terminals;
        EXPECT_THROW(available_moves(sc, st), DialogueEnded);
        return;
    }
    ASSERT_FALSE(is_dead_end(sc, st)) << "dead end after " << ::testing::PrintToString(st.history);
    const auto moves = available_moves(sc, st);
    ASSERT_FALSE(moves.empty());
    const std::set<std::string> legal(moves.begin(), moves.end());
    for (const auto& id : all_players)
        if (!legal.count(id)) EXPECT_THROW(apply_move(sc, st, id), IllegalMove) << id;
    for (const auto& id : moves) {
        const auto out = apply_move(sc, st, id);
        const std::size_t grown = out.state.history.size() - st.history.size();
        ASSERT_TRUE(grown == 1 || grown == 2);
        ASSERT_TRUE(std::equal(st.history.begin(), st.history.end(), out.state.history.begin()));
        walk(sc, out.state, all_players, stats);
    }
}

}  // namespace

TEST(ExhaustiveWalk, ShippedScenarioHasNoDeadEndsAndLegalityMatches) {
    const auto& sc = fixtures::anamnesis();
    WalkStats stats;
    walk(sc, init_state(sc), player_ids(sc), stats);
    EXPECT_GT(stats.terminals, 1u);
    EXPECT_GT(stats.states, 20u);
}

TEST(ReplayProperty, RecordedHistoryReproducesState) {
    const auto& sc = fixtures::anamnesis();
    std::mt19937_64 rng(1);
    for (int run = 0; run < 100; ++run) {
        auto st = init_state(sc);
        std::vector<std::string> played;
        while (!st.terminal) {
            const auto moves = available_moves(sc, st);
            played.push_back(moves[rng() % moves.size()]);
            st = apply_move(sc, st, played.back()).state;
        }
        auto again = init_state(sc);
        for (const auto& m : played) again = apply_move(sc, again, m).state;
        EXPECT_EQ(again, st);
    }
}
