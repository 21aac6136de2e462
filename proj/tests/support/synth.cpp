#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace emovox::synth {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
} // namespace

std::vector<double> sine(double freq_hz, double seconds, double fs, double amplitude) {
    const auto n = static_cast<std::size_t>(std::llround(seconds * fs));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = amplitude * std::sin(kTwoPi * freq_hz * static_cast<double>(i) / fs);
    }
    return out;
}

std::vector<double> white_noise(std::size_t n, double amplitude, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = amplitude * (2.0 * rng.next_double() - 1.0);
    return out;
}

std::vector<double> harmonic_tone(double f0_hz, double seconds, double fs,
                                  double decay, double vibrato_depth,
                                  double vibrato_rate_hz, std::uint64_t seed,
                                  double amplitude) {
    const auto n = static_cast<std::size_t>(std::llround(seconds * fs));
    Rng rng(seed);
    const int harmonics = std::max(1, static_cast<int>((fs / 2.0 - 400.0) / f0_hz));
    std::vector<double> phases(static_cast<std::size_t>(harmonics));
    for (auto& p : phases) p = kTwoPi * rng.next_double();

    std::vector<double> out(n, 0.0);
    double phase0 = kTwoPi * rng.next_double();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double f_inst =
            f0_hz * (1.0 + vibrato_depth * std::sin(kTwoPi * vibrato_rate_hz * t));
        phase0 += kTwoPi * f_inst / fs;
        double v = 0.0;
        for (int k = 1; k <= harmonics; ++k) {
            v += std::pow(static_cast<double>(k), -decay) *
                 std::sin(static_cast<double>(k) * phase0 + phases[static_cast<std::size_t>(k - 1)]);
        }
        out[i] = v;
    }
    double peak = 0.0;
    for (double v : out) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
        for (double& v : out) v *= amplitude / peak;
    }
    return out;
}

void apply_bursts(std::vector<double>& samples, double fs, int n_bursts,
                  double burst_seconds) {
    if (n_bursts < 1) return;
    const double total = static_cast<double>(samples.size()) / fs;
    const double slot = total / n_bursts;
    std::vector<double> envelope(samples.size(), 0.0);
    for (int b = 0; b < n_bursts; ++b) {
        const double center = (b + 0.5) * slot;
        const double start = center - burst_seconds / 2.0;
        const auto i0 = static_cast<long>(std::llround(start * fs));
        const auto len = static_cast<long>(std::llround(burst_seconds * fs));
        for (long i = 0; i < len; ++i) {
            const long idx = i0 + i;
            if (idx < 0 || idx >= static_cast<long>(samples.size())) continue;
            const double u = static_cast<double>(i) / static_cast<double>(len - 1);
            envelope[static_cast<std::size_t>(idx)] =
                0.5 * (1.0 - std::cos(kTwoPi * u)); // raised cosine on/off
        }
    }
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] *= envelope[i];
}

std::vector<double> resonant_vowel(const std::vector<double>& resonances_hz,
                                   const std::vector<double>& bandwidths_hz,
                                   double pulse_hz, double seconds, double fs) {
    const auto n = static_cast<std::size_t>(std::llround(seconds * fs));
    std::vector<double> x(n, 0.0);
    const auto period = static_cast<std::size_t>(std::llround(fs / pulse_hz));
    for (std::size_t i = 0; i < n; i += period) x[i] = 1.0;

    // cascade of two-pole resonators y[t] = x[t] + 2 r cos(th) y[t-1] - r^2 y[t-2]
    for (std::size_t s = 0; s < resonances_hz.size(); ++s) {
        const double r = std::exp(-kPi * bandwidths_hz[s] / fs);
        const double theta = kTwoPi * resonances_hz[s] / fs;
        const double a1 = 2.0 * r * std::cos(theta);
        const double a2 = -r * r;
        double y1 = 0.0, y2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double y = x[i] + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            x[i] = y;
        }
    }
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
        for (double& v : x) v *= 0.8 / peak;
    }
    return x;
}

namespace {

struct ClassProfile {
    double f0;
    double decay;
    double vibrato_depth;
    int bursts_per_second;
};

// well separated along several feature axes
ClassProfile profile_of(Emotion e) {
    switch (e) {
        case Emotion::Anger: return {115.0, 0.4, 0.00, 2};
        case Emotion::Disgust: return {150.0, 0.7, 0.01, 3};
        case Emotion::Fear: return {195.0, 1.0, 0.02, 4};
        case Emotion::Happy: return {250.0, 1.3, 0.03, 5};
        case Emotion::Neutral: return {320.0, 1.6, 0.04, 2};
        case Emotion::Sad: return {410.0, 1.9, 0.05, 3};
    }
    return {200.0, 1.0, 0.0, 3};
}

} // namespace

Utterance synthetic_utterance(const std::string& utterance_id,
                              const std::string& speaker_id, Emotion emotion,
                              double pitch_scale, double amp_scale,
                              double seconds, std::uint64_t seed) {
    const ClassProfile profile = profile_of(emotion);
    const double fs = kPipelineSampleRate;
    Rng rng(seed);

    const double f0 = profile.f0 * pitch_scale * (1.0 + 0.03 * (rng.next_double() - 0.5));
    auto samples = harmonic_tone(f0, seconds, fs, profile.decay, profile.vibrato_depth,
                                 5.0, derive_seed(seed, "tone"), 0.8 * amp_scale);
    const int n_bursts = std::max(
        1, static_cast<int>(std::lround(profile.bursts_per_second * seconds)));
    apply_bursts(samples, fs, n_bursts, 0.6 / profile.bursts_per_second);

    const auto noise = white_noise(samples.size(), 0.004 * amp_scale,
                                   derive_seed(seed, "noise"));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = std::clamp(samples[i] + noise[i], -1.0, 1.0);
    }

    Utterance utt;
    utt.utterance_id = utterance_id;
    utt.speaker_id = speaker_id;
    utt.emotion = emotion;
    utt.sample_rate = fs;
    utt.samples = std::move(samples);
    return utt;
}

FeatureTable synthetic_feature_table(const CorpusSpec& spec) {
    FeatureTable table;
    Rng rng(spec.seed);

    std::vector<Emotion> labels;
    std::vector<std::pair<std::string, Emotion>> plan; // speaker, emotion
    for (const auto& spk : spec.speaker_ids) {
        for (Emotion e : all_emotions()) {
            for (int u = 0; u < spec.utterances_per_class; ++u) {
                plan.emplace_back(spk, e);
                labels.push_back(e);
            }
        }
    }
    if (!spec.informative) {
        // label-permuted control: shuffle the labels over the same audio
        for (std::size_t i = labels.size(); i > 1; --i) {
            std::swap(labels[i - 1], labels[rng.next_index(i)]);
        }
    }

    // per-speaker offsets removable by z-normalization
    std::map<std::string, std::pair<double, double>> speaker_offsets;
    {
        double pitch = 0.85;
        double amp = 0.5;
        for (const auto& spk : spec.speaker_ids) {
            speaker_offsets[spk] = {pitch, amp};
            pitch += 0.08;
            amp += 0.18;
        }
    }

    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto& [spk, gen_emotion] = plan[i];
        const auto [pitch_scale, amp_scale] = speaker_offsets[spk];
        const double seconds = spec.base_seconds + 0.2 * rng.next_double();
        const Utterance utt = synthetic_utterance(
            "u" + std::to_string(i), spk, gen_emotion, pitch_scale, amp_scale, seconds,
            derive_seed(spec.seed, i));
        const FeatureVector fv = extract_feature_vector(utt);
        FeatureRecord rec;
        rec.utterance_id = fv.utterance_id;
        rec.speaker_id = fv.speaker_id;
        rec.emotion = labels[i]; // equals gen_emotion unless permuted
        rec.values = fv.values;
        table.push_back(std::move(rec));
    }
    return table;
}

} // namespace emovox::synth
