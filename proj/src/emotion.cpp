#include "practica/emotion.hpp"

#include <algorithm>

namespace practica {

namespace {
constexpr std::array<std::string_view, kEmotionCount> kNames = {
    "happiness", "anger", "surprise", "contempt", "disgust", "fear", "sadness",
};
}

std::string_view to_string(Emotion e) { return kNames[static_cast<std::size_t>(e)]; }

std::optional<Emotion> parse_emotion(std::string_view name) {
    for (std::size_t i = 0; i < kEmotionCount; ++i)
        if (kNames[i] == name) return static_cast<Emotion>(i);
    return std::nullopt;
}

bool EmotionDelta::is_zero() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

EmotionDelta& EmotionDelta::operator+=(const EmotionDelta& other) {
    for (std::size_t i = 0; i < kEmotionCount; ++i) values[i] += other.values[i];
    return *this;
}

EmotionVector::EmotionVector(const std::array<double, kEmotionCount>& scores) {
    for (std::size_t i = 0; i < kEmotionCount; ++i) scores_[i] = std::clamp(scores[i], 0.0, 1.0);
}

Emotion dominant_emotion(const EmotionVector& ev) {
    const auto& s = ev.scores();
    std::size_t best = 0;
    for (std::size_t i = 1; i < kEmotionCount; ++i)
        if (s[i] > s[best]) best = i;
    return static_cast<Emotion>(best);
}

EmotionVector clamp_update(const EmotionVector& ev, const EmotionDelta& delta) {
    std::array<double, kEmotionCount> next = ev.scores();
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
        if (delta.values[i] == 0.0) continue;
        next[i] = std::clamp(next[i] + delta.values[i], 0.0, 1.0);
    }
    return EmotionVector(next);
}

EmotionDelta difference(const EmotionVector& after, const EmotionVector& before) {
    EmotionDelta d;
    for (std::size_t i = 0; i < kEmotionCount; ++i) d.values[i] = after.scores()[i] - before.scores()[i];
    return d;
}

}  // namespace practica
