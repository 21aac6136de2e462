#include "emovox/labels.hpp"

namespace emovox {

std::string_view to_string(Emotion e) {
    switch (e) {
        case Emotion::Anger: return "anger";
        case Emotion::Disgust: return "disgust";
        case Emotion::Fear: return "fear";
        case Emotion::Happy: return "happy";
        case Emotion::Neutral: return "neutral";
        case Emotion::Sad: return "sad";
    }
    return "?";
}

std::optional<Emotion> parse_emotion(std::string_view s) {
    for (Emotion e : all_emotions()) {
        if (s == to_string(e)) return e;
    }
    return std::nullopt;
}

std::string_view to_string(Arousal a) {
    switch (a) {
        case Arousal::Active: return "active";
        case Arousal::Neutral: return "neutral";
        case Arousal::Passive: return "passive";
    }
    return "?";
}

std::string_view to_string(Valence v) {
    switch (v) {
        case Valence::Negative: return "negative";
        case Valence::Neutral: return "neutral";
        case Valence::Positive: return "positive";
    }
    return "?";
}

std::optional<Arousal> parse_arousal(std::string_view s) {
    if (s == "active") return Arousal::Active;
    if (s == "neutral") return Arousal::Neutral;
    if (s == "passive") return Arousal::Passive;
    return std::nullopt;
}

std::optional<Valence> parse_valence(std::string_view s) {
    if (s == "negative") return Valence::Negative;
    if (s == "neutral") return Valence::Neutral;
    if (s == "positive") return Valence::Positive;
    return std::nullopt;
}

Arousal arousal_of(Emotion e) {
    switch (e) {
        case Emotion::Happy:
        case Emotion::Anger:
        case Emotion::Fear: return Arousal::Active;
        case Emotion::Sad:
        case Emotion::Disgust: return Arousal::Passive;
        case Emotion::Neutral: return Arousal::Neutral;
    }
    return Arousal::Neutral;
}

Valence valence_of(Emotion e) {
    switch (e) {
        case Emotion::Happy: return Valence::Positive;
        case Emotion::Sad:
        case Emotion::Anger:
        case Emotion::Disgust:
        case Emotion::Fear: return Valence::Negative;
        case Emotion::Neutral: return Valence::Neutral;
    }
    return Valence::Neutral;
}

std::pair<Arousal, Valence> map_labels(Emotion e) {
    return {arousal_of(e), valence_of(e)};
}

} // namespace emovox
