#include "practica/json_views.hpp"

#include <stdexcept>

namespace practica {

json emotions_json(const EmotionVector& v) {
    json out = json::array();
    for (Emotion e : kAllEmotions) out.push_back({{"emotion", to_string(e)}, {"score", v[e]}});
    return out;
}

json delta_json(const EmotionDelta& d) {
    json out = json::object();
    for (Emotion e : kAllEmotions)
        if (d[e] != 0.0) out[std::string(to_string(e))] = d[e];
    return out;
}

EmotionDelta delta_from_json(const json& j) {
    EmotionDelta d;
    for (const auto& [k, v] : j.items()) {
        auto e = parse_emotion(k);
        if (!e) throw std::invalid_argument("unknown emotion " + k);
        d[*e] = v.get<double>();
    }
    return d;
}

json observation_json(const ContextObservation& obs) {
    json values = json::object();
    for (const auto& [k, v] : obs.values) values[k] = v;
    return {{"values", values}, {"tick", obs.tick}};
}

json selection_json(const SelectionOutcome& o) {
    json out;
    out["kind"] = kind_name(o);
    if (o.is_selected()) {
        out["practice"] = o.selected().practice;
        out["probability"] = o.selected().probability;
    } else if (o.is_ambiguous()) {
        json qs = json::array();
        for (const auto& q : o.ambiguous().questions) qs.push_back({{"node", q.node}, {"gain", q.gain}});
        out["questions"] = qs;
    } else {
        out["best_probability"] = std::get<NoMatch>(o.result).best_probability;
    }
    json ranking = json::array();
    for (const auto& c : o.ranking) ranking.push_back({{"practice", c.practice}, {"probability", c.probability}});
    out["ranking"] = ranking;
    out["notes"] = o.notes;
    return out;
}

json run_json(const PracticeRun& run, const SocialPractice* practice) {
    json out;
    out["practice"] = run.practice;
    out["status"] = to_string(run.status);
    out["scene_index"] = run.scene;
    if (practice && run.scene < practice->plan_pattern.scenes.size())
        out["scene"] = practice->plan_pattern.scenes[run.scene].id;
    if (!run.quit_reason.empty()) out["quit_reason"] = run.quit_reason;
    json ledger = json::array();
    for (const auto& e : run.ledger) ledger.push_back({{"norm", e.norm}, {"status", e.status}, {"turn", e.turn}});
    out["norms"] = ledger;
    json meanings = json::array();
    for (const auto& m : run.meaning_log)
        meanings.push_back({{"turn", m.turn}, {"statement", m.statement}, {"meanings", m.meanings}});
    out["meanings"] = meanings;
    return out;
}

json norm_violation_json(const NormViolation& v) {
    return {{"type", "norm"}, {"norm", v.norm}, {"meaning", v.meaning}, {"effect", delta_json(v.effect)}};
}

json expectation_json(const ExpectationEvent& e) {
    return {{"type", "expectation"},
            {"status", to_string(e.kind)},
            {"expectation", e.subject},
            {"evidence", observation_json(e.evidence)}};
}

json scene_step_json(const SceneStep& s) {
    std::string kind = s.kind == SceneStep::Kind::stay ? "stay" : s.kind == SceneStep::Kind::quit ? "quit" : "next_scene";
    json out{{"step", kind}};
    if (s.kind == SceneStep::Kind::next_scene) out["scene"] = s.scene;
    if (s.kind == SceneStep::Kind::quit) out["reason"] = s.reason;
    return out;
}

json statement_json(const StatementNode& n) {
    json out{{"id", n.id}, {"speaker", to_string(n.speaker)}, {"text", n.text}, {"tags", n.meaning_tags}};
    if (n.act_kind) out["act_kind"] = to_string(*n.act_kind);
    return out;
}

json config_json(const SelectionConfig& c) {
    return {{"activation_threshold", c.activation_threshold},
            {"margin", c.margin},
            {"max_questions", c.max_questions},
            {"switch_surprise", c.switch_surprise}};
}

SelectionConfig config_from_json(const json& j) {
    SelectionConfig c;
    if (j.is_null()) return c;
    if (!j.is_object()) throw std::invalid_argument("config must be an object");
    try {
        for (const auto& [k, v] : j.items()) {
            if (k == "activation_threshold")
                c.activation_threshold = v.get<double>();
            else if (k == "margin")
                c.margin = v.get<double>();
            else if (k == "max_questions")
                c.max_questions = v.get<int>();
            else if (k == "switch_surprise")
                c.switch_surprise = v.get<double>();
            else
                throw std::invalid_argument("unknown config key " + k);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad config: ") + e.what());
    }
    return c;
}

}  // namespace practica
