#pragma once
// JSON renderings of model values for the HTTP API and the session trace.

#include <json.hpp>

#include "practica/core_model.hpp"
#include "practica/dialogue_engine.hpp"
#include "practica/practice_runtime.hpp"
#include "practica/practice_selector.hpp"

namespace practica {

using json = nlohmann::json;

// Seven entries in canonical order: [{"emotion": "happiness", "score": 0.4}, ...]
json emotions_json(const EmotionVector& v);
// Non-zero components only.
json delta_json(const EmotionDelta& d);
EmotionDelta delta_from_json(const json& j);

json observation_json(const ContextObservation& obs);
json selection_json(const SelectionOutcome& o);
json run_json(const PracticeRun& run, const SocialPractice* practice);
json norm_violation_json(const NormViolation& v);
json expectation_json(const ExpectationEvent& e);
json scene_step_json(const SceneStep& s);
json statement_json(const StatementNode& n);

json config_json(const SelectionConfig& c);
// Missing keys keep their defaults. Throws std::invalid_argument on wrong types.
SelectionConfig config_from_json(const json& j);

}  // namespace practica
