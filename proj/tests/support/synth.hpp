#ifndef EMOVOX_TESTS_SYNTH_HPP
#define EMOVOX_TESTS_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "emovox/corpus.hpp"
#include "emovox/features.hpp"
#include "emovox/rng.hpp"

namespace emovox::synth {

std::vector<double> sine(double freq_hz, double seconds, double fs, double amplitude = 0.9);

std::vector<double> white_noise(std::size_t n, double amplitude, std::uint64_t seed);

// Harmonic source: sum of H partials at k*f0 with amplitudes k^-decay,
// optional vibrato (relative depth, rate in Hz), peak-normalized.
std::vector<double> harmonic_tone(double f0_hz, double seconds, double fs,
                                  double decay, double vibrato_depth,
                                  double vibrato_rate_hz, std::uint64_t seed,
                                  double amplitude = 0.8);

// Applies raised-cosine on/off bursts: n_bursts of burst_seconds spread
// evenly over the signal.
void apply_bursts(std::vector<double>& samples, double fs, int n_bursts,
                  double burst_seconds);

// Second-order resonator cascade driven by a pulse train: the formant oracle
// signal. Resonance frequencies in Hz with matching bandwidths.
std::vector<double> resonant_vowel(const std::vector<double>& resonances_hz,
                                   const std::vector<double>& bandwidths_hz,
                                   double pulse_hz, double seconds, double fs);

// Parameters controlling the synthetic corpus for end-to-end tests. Classes
// differ in pitch, spectral tilt, vibrato and burst rate; speakers scale
// pitch and amplitude (removable by per-speaker z-normalization).
struct CorpusSpec {
    int speakers_per_gender = 0; // unused when speaker_ids given
    std::vector<std::string> speaker_ids = {"f0", "f1", "m0", "m1", "m2"};
    int utterances_per_class = 20;
    double base_seconds = 1.1;
    std::uint64_t seed = 1234;
    bool informative = true; // false: labels shuffled after generation
};

// Emotion class -> synthesis profile -> feature table rows via the real
// extraction pipeline.
FeatureTable synthetic_feature_table(const CorpusSpec& spec);

// One synthetic utterance (id/speaker/emotion filled in).
Utterance synthetic_utterance(const std::string& utterance_id,
                              const std::string& speaker_id, Emotion emotion,
                              double pitch_scale, double amp_scale,
                              double seconds, std::uint64_t seed);

} // namespace emovox::synth

#endif
