#ifndef EMOVOX_LABELS_HPP
#define EMOVOX_LABELS_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace emovox {

// The six emotion classes. The enumerator order is the canonical class order
// (alphabetical); it is used wherever a class index appears.
enum class Emotion { Anger = 0, Disgust, Fear, Happy, Neutral, Sad };

inline constexpr int kEmotionCount = 6;

constexpr std::array<Emotion, kEmotionCount> all_emotions() {
    return {Emotion::Anger, Emotion::Disgust, Emotion::Fear,
            Emotion::Happy, Emotion::Neutral, Emotion::Sad};
}

std::string_view to_string(Emotion e);
std::optional<Emotion> parse_emotion(std::string_view s);

// Arousal classes, canonical (alphabetical) order.
enum class Arousal { Active = 0, Neutral, Passive };
// Valence classes, canonical (alphabetical) order.
enum class Valence { Negative = 0, Neutral, Positive };

std::string_view to_string(Arousal a);
std::string_view to_string(Valence v);
std::optional<Arousal> parse_arousal(std::string_view s);
std::optional<Valence> parse_valence(std::string_view s);

// Fixed maps: active = {happy, anger, fear}, passive = {sad, disgust};
// positive = {happy}, negative = {sad, anger, disgust, fear}.
Arousal arousal_of(Emotion e);
Valence valence_of(Emotion e);
std::pair<Arousal, Valence> map_labels(Emotion e);

} // namespace emovox

#endif
