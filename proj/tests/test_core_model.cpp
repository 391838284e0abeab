#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "practica/core_model.hpp"
#include "practica/emotion.hpp"

using namespace practica;

namespace {

EmotionVector vec(std::initializer_list<std::pair<Emotion, double>> entries) {
    std::array<double, kEmotionCount> a{};
    for (auto [e, v] : entries) a[static_cast<std::size_t>(e)] = v;
    return EmotionVector(a);
}

EmotionDelta delta(Emotion e, double d) {
    EmotionDelta out;
    out[e] = d;
    return out;
}

bool has_code(const std::vector<ModelDiagnostic>& ds, const std::string& code) {
    for (const auto& d : ds)
        if (d.code == code) return true;
    return false;
}

}  // namespace

TEST(Emotion, CanonicalOrderAndNames) {
    const char* names[] = {"happiness", "anger", "surprise", "contempt", "disgust", "fear", "sadness"};
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
        EXPECT_EQ(to_string(kAllEmotions[i]), names[i]);
        EXPECT_EQ(parse_emotion(names[i]), kAllEmotions[i]);
    }
    EXPECT_FALSE(parse_emotion("displeasure"));
}

TEST(Emotion, DominantExamples) {
    EXPECT_EQ(dominant_emotion(EmotionVector()), Emotion::happiness);
    EXPECT_EQ(dominant_emotion(vec({{Emotion::happiness, 0.9}})), Emotion::happiness);
    EXPECT_EQ(dominant_emotion(vec({{Emotion::anger, 0.7}, {Emotion::contempt, 0.7}})), Emotion::anger);
    EXPECT_EQ(dominant_emotion(vec({{Emotion::sadness, 0.2}, {Emotion::fear, 0.1}})), Emotion::sadness);
}

TEST(Emotion, ClampUpdateExamples) {
    EXPECT_DOUBLE_EQ(clamp_update(vec({{Emotion::happiness, 0.5}}), delta(Emotion::happiness, 0.2))[Emotion::happiness],
                     0.7);
    EXPECT_EQ(clamp_update(vec({{Emotion::fear, 0.9}}), delta(Emotion::fear, 0.5))[Emotion::fear], 1.0);
    EXPECT_EQ(clamp_update(vec({{Emotion::sadness, 0.1}}), delta(Emotion::sadness, -0.4))[Emotion::sadness], 0.0);
    const auto before = vec({{Emotion::anger, 0.3}, {Emotion::disgust, 0.6}});
    const auto after = clamp_update(before, delta(Emotion::anger, 0.1));
    EXPECT_EQ(after[Emotion::disgust], 0.6);
}

TEST(Emotion, ConstructionClamps) {
    std::array<double, kEmotionCount> a{};
    a[0] = 1.5;
    a[1] = -0.5;
    EmotionVector v(a);
    EXPECT_EQ(v[Emotion::happiness], 1.0);
    EXPECT_EQ(v[Emotion::anger], 0.0);
}

TEST(EmotionProperty, ScoresStayInRangeUnderRandomDeltaSequences) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int seq = 0; seq < 200; ++seq) {
        EmotionVector v;
        for (int step = 0; step < 50; ++step) {
            EmotionDelta delta;
            for (auto e : kAllEmotions)
                if (rng() % 2) delta[e] = d(rng);
            v = clamp_update(v, delta);
            for (double s : v.scores()) {
                ASSERT_GE(s, 0.0);
                ASSERT_LE(s, 1.0);
            }
        }
    }
}

TEST(EmotionProperty, DominantInvariantUnderConstantShift) {
    // Scores on a tenths lattice, so ties are frequent and shifts are exact.
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> score(0, 8);
    std::uniform_int_distribution<int> shift(-3, 3);
    for (int i = 0; i < 500; ++i) {
        std::array<int, kEmotionCount> base{};
        for (int& x : base) x = score(rng);
        const int c = shift(rng);
        std::array<double, kEmotionCount> a{}, b{};
        bool in_range = true;
        for (std::size_t k = 0; k < kEmotionCount; ++k) {
            a[k] = base[k] / 10.0;
            b[k] = (base[k] + c) / 10.0;
            in_range = in_range && base[k] + c >= 0 && base[k] + c <= 10;
        }
        if (!in_range) continue;
        EXPECT_EQ(dominant_emotion(EmotionVector(a)), dominant_emotion(EmotionVector(b)));
    }
}

TEST(Emotion, DifferenceIsInverseOfUpdateInsideRange) {
    const auto before = vec({{Emotion::happiness, 0.4}, {Emotion::fear, 0.2}});
    const auto after = clamp_update(before, delta(Emotion::happiness, 0.25));
    const auto d = difference(after, before);
    EXPECT_DOUBLE_EQ(d[Emotion::happiness], 0.25);
    EXPECT_EQ(d[Emotion::fear], 0.0);
}

TEST(Roles, LabelsRoundTrip) {
    EXPECT_EQ(to_string(Role::relative), "relative of the patient");
    for (Role r : {Role::doctor, Role::patient, Role::relative, Role::nurse}) EXPECT_EQ(parse_role(to_string(r)), r);
    EXPECT_FALSE(parse_role("surgeon"));
}

TEST(SpeechActs, KindDeterminesClass) {
    for (ActKind k : {ActKind::answer, ActKind::confirm, ActKind::disagree, ActKind::agree})
        EXPECT_EQ(class_of(k), ActClass::constative);
    for (ActKind k : {ActKind::ask, ActKind::instruct, ActKind::request}) EXPECT_EQ(class_of(k), ActClass::directive);
}

TEST(CompetenceGap, Examples) {
    SocialPractice p;
    p.competences = {"listening effectively", "being supportive and empathic"};
    Identity id;
    id.competences = {"listening effectively"};
    EXPECT_EQ(competence_gap(id, p), std::set<std::string>{"being supportive and empathic"});
    id.competences = p.competences;
    EXPECT_TRUE(competence_gap(id, p).empty());
    p.competences.clear();
    EXPECT_TRUE(competence_gap(id, p).empty());
}

TEST(CompetenceGapProperty, SubsetAndDisjoint) {
    std::mt19937_64 rng(3);
    const std::vector<std::string> labels = {"a", "b", "c", "d", "e", "f"};
    for (int i = 0; i < 300; ++i) {
        SocialPractice p;
        Identity id;
        for (const auto& l : labels) {
            if (rng() % 2) p.competences.insert(l);
            if (rng() % 2) id.competences.insert(l);
        }
        for (const auto& g : competence_gap(id, p)) {
            EXPECT_TRUE(p.competences.count(g));
            EXPECT_FALSE(id.competences.count(g));
        }
    }
}

TEST(ShippedPractice, ConsultationHasTableRolesAndComponents) {
    const auto& p = fixtures::practice("doctor_patient_dialogue");
    EXPECT_EQ(p.social_context.roles, (std::vector<Role>{Role::doctor, Role::patient, Role::relative, Role::nurse}));
    ASSERT_NE(p.find_norm("patient_is_cooperative"), nullptr);
    ASSERT_NE(p.find_norm("doctor_is_polite"), nullptr);
    std::vector<std::string> scenes;
    for (const auto& s : p.plan_pattern.scenes) scenes.push_back(s.id);
    EXPECT_EQ(scenes, (std::vector<std::string>{"welcome_and_presentation", "personal_data", "symptoms"}));
    EXPECT_TRUE(p.meanings.count("empathic opportunity"));
    EXPECT_TRUE(p.meanings.count("empathic response"));
    EXPECT_TRUE(p.competences.count("listening effectively"));
    EXPECT_TRUE(p.competences.count("being supportive and empathic"));
    EXPECT_EQ(p.activation.root(), p.id);
    EXPECT_TRUE(validate_practice(p).empty());
}

class PracticeValidation : public ::testing::Test {
protected:
    SocialPractice valid = fixtures::practice("doctor_patient_dialogue");
};

TEST_F(PracticeValidation, ShippedIsValid) { EXPECT_FALSE(has_errors(validate_practice(valid))); }

TEST_F(PracticeValidation, DanglingQuitNorm) {
    valid.plan_pattern.quit_conditions.push_back({QuitCondition::Kind::norm_violation, "no_such_norm"});
    EXPECT_TRUE(has_code(validate_practice(valid), "DANGLING_REFERENCE"));
}

TEST_F(PracticeValidation, DanglingQuitCompetence) {
    valid.plan_pattern.quit_conditions.push_back({QuitCondition::Kind::missing_competence, "juggling"});
    EXPECT_TRUE(has_code(validate_practice(valid), "DANGLING_REFERENCE"));
}

TEST_F(PracticeValidation, DanglingSceneInPattern) {
    valid.social_context.norms[0].trigger.before_scene = "no_such_scene";
    EXPECT_TRUE(has_code(validate_practice(valid), "DANGLING_REFERENCE"));
}

TEST_F(PracticeValidation, MissingNetwork) {
    valid.activation = ActivationNetwork();
    EXPECT_TRUE(has_code(validate_practice(valid), "DANGLING_REFERENCE"));
}

TEST_F(PracticeValidation, RootMustBePracticeId) {
    valid.id = "renamed";
    EXPECT_TRUE(has_code(validate_practice(valid), "NETWORK_ROOT"));
}

TEST_F(PracticeValidation, NoScenes) {
    valid.plan_pattern.scenes.clear();
    valid.plan_pattern.quit_conditions.clear();
    for (auto& n : valid.social_context.norms) {
        n.trigger.before_scene.reset();
        n.trigger.after_scene.reset();
    }
    EXPECT_TRUE(has_code(validate_practice(valid), "MISSING_FIELD"));
}

TEST_F(PracticeValidation, EmptyAdmissibleSet) {
    valid.plan_pattern.scenes[0].admissible_act_kinds.clear();
    EXPECT_TRUE(has_code(validate_practice(valid), "MISSING_FIELD"));
}

TEST_F(PracticeValidation, DuplicateScene) {
    valid.plan_pattern.scenes.push_back(valid.plan_pattern.scenes[0]);
    EXPECT_TRUE(has_code(validate_practice(valid), "DUPLICATE_ID"));
}

TEST_F(PracticeValidation, ActKindInconsistentWithClass) {
    valid.activities[0].act_class = ActClass::directive;
    valid.activities[0].act_kind = ActKind::answer;
    EXPECT_TRUE(has_code(validate_practice(valid), "ACT_KIND_MISMATCH"));
}

TEST_F(PracticeValidation, NormDeltaOutOfRange) {
    valid.social_context.norms[0].emotion_effect[Emotion::anger] = 1.5;
    EXPECT_TRUE(has_code(validate_practice(valid), "RANGE"));
}

TEST_F(PracticeValidation, EmptySurfaceText) {
    valid.activities[0].surface_text.clear();
    EXPECT_TRUE(has_code(validate_practice(valid), "MISSING_FIELD"));
}

TEST_F(PracticeValidation, SelfRefinement) {
    valid.refines = valid.id;
    EXPECT_TRUE(has_code(validate_practice(valid), "REFINES_CYCLE"));
}
