#ifndef EMOVOX_FEATURES_HPP
#define EMOVOX_FEATURES_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "emovox/corpus.hpp"
#include "emovox/dsp.hpp"

namespace emovox {

inline constexpr int kFrameFeatureCount = 33; // per voiced frame
inline constexpr int kStreamCount = 66;       // features + derivatives
inline constexpr int kFeatureDim = 331;       // 66 * 5 statistics + speaking rate

struct FeatureConfig {
    double window_seconds = 0.060;
    double hop_seconds = 0.010;
    std::size_t fft_size = 1024;

    // voicing
    double f0_min_hz = 50.0;
    double f0_max_hz = 500.0;
    double voicing_peak_threshold = 0.30;
    double rms_gate_ratio = 0.01; // of the utterance max frame RMS

    // MFCC
    int mel_filters = 26;
    double mel_fmin_hz = 0.0;
    double mel_fmax_hz = 8000.0;
    int mfcc_count = 12; // coefficients 1..12, 0th excluded

    // formants
    int lpc_order = 18;
    double formant_min_hz = 90.0;
    double formant_nyquist_margin_hz = 50.0;
    double formant_max_bandwidth_hz = 400.0;

    // spectral shape
    double rolloff_fraction = 0.85;
    double brightness_cutoff_hz = 1500.0;
    double spectral_peak_floor_db = -40.0;

    // speaking rate
    double rate_smooth_seconds = 0.100;
    double rate_threshold_ratio = 0.3;
    double rate_min_separation_seconds = 0.150;

    std::size_t window_length(double fs) const;
    std::size_t hop_length(double fs) const;
};

struct Frame {
    std::size_t index = 0;
    std::size_t start = 0;        // sample offset
    double start_time = 0.0;      // seconds
    std::span<const double> samples;
};

// Frames of round(window_seconds*fs) samples every round(hop_seconds*fs);
// the trailing remainder is dropped. Throws TooShortError if the signal is
// shorter than one window. The returned frames view `samples`.
std::vector<Frame> frame_signal(std::span<const double> samples, double fs,
                                const FeatureConfig& cfg = {});

struct VoicingDecision {
    bool voiced = false;
    double f0_hz = 0.0; // valid only when voiced
    double peak = 0.0;  // best normalized autocorrelation in the lag range
    double rms = 0.0;
};

// Autocorrelation voicing decision. `rms_gate` is an absolute RMS floor
// (pass 0.01 * utterance max frame RMS; 0 disables the gate).
VoicingDecision detect_voicing(std::span<const double> frame, double fs,
                               double rms_gate = 0.0,
                               const FeatureConfig& cfg = {},
                               const dsp::RealFft* fft = nullptr);

// The 33 per-frame features, in canonical order.
struct FrameFeatures {
    double f0 = 0.0;
    double energy = 0.0;
    std::array<double, 4> formant_freq{};
    std::array<double, 4> formant_bw{};
    std::array<double, 12> mfcc{};
    double zcr = 0.0;
    double rolloff = 0.0;
    double brightness = 0.0;
    double centroid = 0.0;
    double spread = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    double flatness = 0.0;
    double entropy = 0.0;
    double roughness = 0.0;
    double irregularity = 0.0;

    std::array<double, kFrameFeatureCount> as_array() const;
};

// Reusable per-thread analysis context: window, FFT plans, mel bank.
class FrameAnalyzer {
public:
    explicit FrameAnalyzer(double fs, FeatureConfig cfg = {});

    VoicingDecision voicing(std::span<const double> frame, double rms_gate) const;

    // Features for a voiced frame with the given f0. Throws
    // DegenerateSpectrumError if the windowed frame has zero energy.
    FrameFeatures analyze(std::span<const double> frame, double f0) const;

    double sample_rate() const { return fs_; }
    const FeatureConfig& config() const { return cfg_; }

private:
    double fs_;
    FeatureConfig cfg_;
    std::vector<double> window_;
    dsp::RealFft fft_;     // spectral features
    dsp::RealFft acf_fft_; // voicing autocorrelation
    std::vector<std::vector<double>> mel_bank_;
};

// One-shot convenience wrapper around FrameAnalyzer::analyze.
FrameFeatures frame_features(std::span<const double> frame, double fs, double f0,
                             const FeatureConfig& cfg = {});

// Central differences over the voiced-frame subsequence (gaps closed):
// d[t] = (x[t+1]-x[t-1]) / (2*hop_seconds), one-sided at the two ends,
// zero for a single frame. Row layout: 33 features then 33 derivatives.
std::vector<std::array<double, kStreamCount>> append_derivatives(
    const std::vector<FrameFeatures>& voiced, double hop_seconds);

// Per-stream (mean, std, min, max, range), stream-major; std is the
// population standard deviation. 66 streams -> 330 values.
std::vector<double> aggregate_statistics(
    const std::vector<std::array<double, kStreamCount>>& rows);

// Syllable nuclei per second from the smoothed frame-energy contour.
// Silence-only input yields 0.
double speaking_rate(std::span<const double> samples, double fs,
                     const FeatureConfig& cfg = {});

struct FeatureVector {
    std::string utterance_id;
    std::string speaker_id;
    std::vector<double> values; // length kFeatureDim
};

// Full pipeline: framing -> voicing -> per-frame features -> derivatives ->
// statistics, with speaking rate appended last. Throws NoVoicedFramesError.
FeatureVector extract_feature_vector(const Utterance& utterance,
                                     const FeatureConfig& cfg = {});

// Canonical names of the 331 dimensions (the ordering contract).
const std::vector<std::string>& feature_names();

// ---- feature cache (CSV: utterance_id,speaker_id,emotion,f1..f331) ----

struct FeatureRecord {
    std::string utterance_id;
    std::string speaker_id;
    Emotion emotion = Emotion::Neutral;
    std::vector<double> values;
};

using FeatureTable = std::vector<FeatureRecord>;

void write_feature_cache(const FeatureTable& table, const std::filesystem::path& path);
FeatureTable read_feature_cache(const std::filesystem::path& path);

} // namespace emovox

#endif
