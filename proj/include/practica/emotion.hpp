#pragma once
// Seven basic emotions of the virtual character, as continuous scores.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace practica {

// Canonical order. Tie-breaking everywhere follows this order.
enum class Emotion : std::size_t {
    happiness = 0,
    anger,
    surprise,
    contempt,
    disgust,
    fear,
    sadness,
};

inline constexpr std::size_t kEmotionCount = 7;

inline constexpr std::array<Emotion, kEmotionCount> kAllEmotions = {
    Emotion::happiness, Emotion::anger,   Emotion::surprise, Emotion::contempt,
    Emotion::disgust,   Emotion::fear,    Emotion::sadness,
};

std::string_view to_string(Emotion e);
std::optional<Emotion> parse_emotion(std::string_view name);

// Signed per-emotion change. Zero entries leave the score untouched.
struct EmotionDelta {
    std::array<double, kEmotionCount> values{};

    double& operator[](Emotion e) { return values[static_cast<std::size_t>(e)]; }
    double operator[](Emotion e) const { return values[static_cast<std::size_t>(e)]; }

    bool is_zero() const;
    EmotionDelta& operator+=(const EmotionDelta& other);

    bool operator==(const EmotionDelta&) const = default;
};

// Scores in [0,1]. Construction clamps, so every instance satisfies the range invariant.
class EmotionVector {
public:
    EmotionVector() = default;
    explicit EmotionVector(const std::array<double, kEmotionCount>& scores);

    double operator[](Emotion e) const { return scores_[static_cast<std::size_t>(e)]; }
    const std::array<double, kEmotionCount>& scores() const { return scores_; }

    bool operator==(const EmotionVector&) const = default;

private:
    std::array<double, kEmotionCount> scores_{};
};

// Argmax score; earlier emotion in canonical order wins ties.
Emotion dominant_emotion(const EmotionVector& ev);

// Each entry becomes clamp(old + delta, 0, 1).
EmotionVector clamp_update(const EmotionVector& ev, const EmotionDelta& delta);

// Net change between two vectors (after - before).
EmotionDelta difference(const EmotionVector& after, const EmotionVector& before);

}  // namespace practica
