#include "practica/practice_runtime.hpp"

#include <algorithm>

namespace practica {

std::string_view to_string(ExpectationEvent::Kind k) {
    return k == ExpectationEvent::Kind::confirmed ? "confirmed" : "violated";
}

std::string_view to_string(PracticeRun::Status s) {
    switch (s) {
        case PracticeRun::Status::active: return "active";
        case PracticeRun::Status::completed: return "completed";
        case PracticeRun::Status::quit: return "quit";
    }
    return "active";
}

bool PracticeRun::has_violated(const std::string& norm) const {
    return std::any_of(ledger.begin(), ledger.end(), [&](const auto& e) { return e.norm == norm; });
}

bool matches(const EventPattern& pattern, const std::string& event, const SocialPractice& practice,
             const PracticeRun& run, const GuardContext& ctx) {
    if (pattern.event != event) return false;
    const auto& plan = practice.plan_pattern;
    if (pattern.before_scene) {
        auto idx = plan.scene_index(*pattern.before_scene);
        if (!idx || run.status != PracticeRun::Status::active || run.scene >= *idx) return false;
    }
    if (pattern.after_scene) {
        auto idx = plan.scene_index(*pattern.after_scene);
        if (!idx) return false;
        if (run.status != PracticeRun::Status::completed && run.scene <= *idx) return false;
    }
    if (pattern.dominant_emotion && dominant_emotion(ctx.emotions) != *pattern.dominant_emotion) return false;
    if (pattern.parameter) {
        auto it = ctx.parameters.find(pattern.parameter->name);
        if (it == ctx.parameters.end() || !compare(it->second, pattern.parameter->op, pattern.parameter->value))
            return false;
    }
    return true;
}

PracticeRun start_run(const SocialPractice& practice) {
    PracticeRun run;
    run.practice = practice.id;
    return run;
}

namespace {

bool scene_completed(const PracticeRun& run, const SocialPractice& practice, const std::vector<std::string>& events,
                     const GuardContext& ctx) {
    if (run.status != PracticeRun::Status::active) return false;
    const Scene& scene = practice.plan_pattern.scenes.at(run.scene);
    return std::any_of(events.begin(), events.end(),
                       [&](const std::string& e) { return matches(scene.completion, e, practice, run, ctx); });
}

SceneStep next_scene_step(const PracticeRun& run, const SocialPractice& practice) {
    SceneStep step;
    step.kind = SceneStep::Kind::next_scene;
    if (run.scene + 1 < practice.plan_pattern.scenes.size()) step.scene = practice.plan_pattern.scenes[run.scene + 1].id;
    return step;
}

}  // namespace

void fast_forward(PracticeRun& run, const SocialPractice& practice, const std::vector<std::vector<std::string>>& turns,
                  const GuardContext& ctx) {
    for (const auto& events : turns)
        if (scene_completed(run, practice, events, ctx)) apply_step(run, practice, next_scene_step(run, practice));
}

std::vector<NormViolation> norm_check(const PracticeRun& run, const SocialPractice& practice,
                                      const std::vector<std::string>& events, const GuardContext& ctx) {
    std::vector<NormViolation> out;
    if (run.status == PracticeRun::Status::quit) return out;
    for (const auto& norm : practice.social_context.norms) {
        if (run.has_violated(norm.id)) continue;
        const bool fired = std::any_of(events.begin(), events.end(),
                                       [&](const std::string& e) { return matches(norm.trigger, e, practice, run, ctx); });
        if (fired) out.push_back({norm.id, norm.violation_meaning, norm.emotion_effect});
    }
    return out;
}

void record_violations(PracticeRun& run, const std::vector<NormViolation>& violations, int turn) {
    for (const auto& v : violations)
        if (!run.has_violated(v.norm)) run.ledger.push_back({v.norm, "violated", turn});
}

std::set<std::string> meaning_of(const Scenario& sc, const std::string& statement, const SocialPractice& practice,
                                 const DialogueState& before) {
    const StatementNode* node = sc.find_node(statement);
    if (!node) return {};
    std::set<std::string> out = node->meaning_tags;
    if (node->speaker != Speaker::player || before.history.empty()) return out;

    const StatementNode* previous = sc.find_node(before.history.back());
    if (!previous || previous->speaker != Speaker::computer) return out;
    for (const auto& rule : practice.meaning_rules) {
        if (!previous->meaning_tags.count(rule.after_tag)) continue;
        out.insert(node->meaning_tags.count(rule.if_tag) ? rule.then_meaning : rule.otherwise_meaning);
    }
    return out;
}

SceneStep scene_step(const PracticeRun& run, const SocialPractice& practice, const std::vector<std::string>& events,
                     const Identity& identity, const GuardContext& ctx) {
    if (run.status == PracticeRun::Status::quit) return {SceneStep::Kind::quit, "", run.quit_reason};

    const auto gap = competence_gap(identity, practice);
    for (const auto& q : practice.plan_pattern.quit_conditions) {
        if (q.kind == QuitCondition::Kind::norm_violation && run.has_violated(q.ref))
            return {SceneStep::Kind::quit, "", "norm_violation:" + q.ref};
        if (q.kind == QuitCondition::Kind::missing_competence && gap.count(q.ref))
            return {SceneStep::Kind::quit, "", "missing_competence:" + q.ref};
    }

    if (scene_completed(run, practice, events, ctx)) return next_scene_step(run, practice);
    return {};
}

void apply_step(PracticeRun& run, const SocialPractice& practice, const SceneStep& step) {
    switch (step.kind) {
        case SceneStep::Kind::stay: break;
        case SceneStep::Kind::quit:
            run.status = PracticeRun::Status::quit;
            run.quit_reason = step.reason;
            break;
        case SceneStep::Kind::next_scene:
            if (run.scene + 1 < practice.plan_pattern.scenes.size())
                ++run.scene;
            else
                run.status = PracticeRun::Status::completed;
            break;
    }
}

std::vector<ExpectationEvent> expectation_check(const SocialPractice& practice, const ContextObservation& obs) {
    std::vector<ExpectationEvent> out;
    for (const auto& [var, state] : obs.values) {
        auto it = practice.social_context.interpretations.find(var);
        if (it == practice.social_context.interpretations.end()) continue;
        ExpectationEvent ev;
        ev.kind = it->second.expected_state == state ? ExpectationEvent::Kind::confirmed
                                                     : ExpectationEvent::Kind::violated;
        ev.subject = it->second.expectation;
        ev.evidence.values[var] = state;
        ev.evidence.tick = obs.tick;
        out.push_back(std::move(ev));
    }
    return out;
}

}  // namespace practica
