#include "emovox/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "emovox/csv.hpp"
#include "emovox/errors.hpp"

namespace emovox {

using dsp::kPi;

std::size_t FeatureConfig::window_length(double fs) const {
    return static_cast<std::size_t>(std::llround(window_seconds * fs));
}

std::size_t FeatureConfig::hop_length(double fs) const {
    return static_cast<std::size_t>(std::llround(hop_seconds * fs));
}

std::vector<Frame> frame_signal(std::span<const double> samples, double fs,
                                const FeatureConfig& cfg) {
    if (fs <= 0.0) throw ValidationError("frame_signal: sample rate must be positive");
    const std::size_t w = cfg.window_length(fs);
    const std::size_t h = cfg.hop_length(fs);
    if (w == 0 || h == 0) throw ValidationError("frame_signal: window/hop too small");
    if (samples.size() < w) {
        std::ostringstream msg;
        msg << "frame_signal: signal of " << samples.size()
            << " samples is shorter than one window (" << w << ")";
        throw TooShortError(msg.str());
    }
    const std::size_t count = 1 + (samples.size() - w) / h;
    std::vector<Frame> frames(count);
    for (std::size_t i = 0; i < count; ++i) {
        frames[i].index = i;
        frames[i].start = i * h;
        frames[i].start_time = static_cast<double>(i * h) / fs;
        frames[i].samples = samples.subspan(i * h, w);
    }
    return frames;
}

std::array<double, kFrameFeatureCount> FrameFeatures::as_array() const {
    std::array<double, kFrameFeatureCount> a{};
    std::size_t i = 0;
    a[i++] = f0;
    a[i++] = energy;
    for (double v : formant_freq) a[i++] = v;
    for (double v : formant_bw) a[i++] = v;
    for (double v : mfcc) a[i++] = v;
    a[i++] = zcr;
    a[i++] = rolloff;
    a[i++] = brightness;
    a[i++] = centroid;
    a[i++] = spread;
    a[i++] = skewness;
    a[i++] = kurtosis;
    a[i++] = flatness;
    a[i++] = entropy;
    a[i++] = roughness;
    a[i++] = irregularity;
    return a;
}

FrameAnalyzer::FrameAnalyzer(double fs, FeatureConfig cfg)
    : fs_(fs),
      cfg_(cfg),
      window_(dsp::hamming_window(cfg.window_length(fs))),
      fft_(cfg.fft_size),
      acf_fft_([&] {
          std::size_t n = 1;
          while (n < 2 * cfg.window_length(fs)) n <<= 1;
          return n;
      }()),
      mel_bank_(dsp::mel_filter_bank(cfg.mel_filters, cfg.mel_fmin_hz,
                                     std::min(cfg.mel_fmax_hz, fs / 2.0),
                                     cfg.fft_size / 2 + 1, cfg.fft_size, fs)) {}

VoicingDecision FrameAnalyzer::voicing(std::span<const double> frame,
                                       double rms_gate) const {
    return detect_voicing(frame, fs_, rms_gate, cfg_, &acf_fft_);
}

namespace {

struct SpectralPeak {
    double freq;
    double amp;
};

// Plomp-Levelt dissonance of one partial pair (Sethares parameterization).
double pair_dissonance(const SpectralPeak& a, const SpectralPeak& b) {
    const double f_lo = std::min(a.freq, b.freq);
    const double df = std::abs(a.freq - b.freq);
    const double s = 0.24 / (0.0207 * f_lo + 18.96);
    return a.amp * b.amp * (std::exp(-3.5 * s * df) - std::exp(-5.75 * s * df));
}

} // namespace

FrameFeatures FrameAnalyzer::analyze(std::span<const double> frame, double f0) const {
    const std::size_t w = frame.size();
    if (w != window_.size()) {
        throw DimensionMismatchError("frame length does not match analyzer window");
    }

    std::vector<double> windowed(w);
    double energy = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        windowed[i] = frame[i] * window_[i];
        energy += windowed[i] * windowed[i];
    }
    if (energy <= 0.0) {
        throw DegenerateSpectrumError("frame_features: windowed frame has zero energy");
    }

    FrameFeatures ft;
    ft.f0 = f0;
    ft.energy = energy;

    // zero crossing rate of the raw frame, in crossings per second halved
    // (a pure tone at f gives zcr ~ f)
    std::size_t crossings = 0;
    for (std::size_t i = 1; i < w; ++i) {
        if ((frame[i - 1] < 0.0 && frame[i] >= 0.0) ||
            (frame[i - 1] >= 0.0 && frame[i] < 0.0)) {
            ++crossings;
        }
    }
    ft.zcr = static_cast<double>(crossings) * fs_ / (2.0 * static_cast<double>(w));

    // magnitude / power spectrum
    const auto spec = fft_.forward(windowed);
    const std::size_t bins = spec.size();
    std::vector<double> mag(bins), power(bins);
    double power_sum = 0.0, mag_max = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
        mag[k] = std::abs(spec[k]);
        power[k] = mag[k] * mag[k];
        power_sum += power[k];
        mag_max = std::max(mag_max, mag[k]);
    }
    const double bin_hz = fs_ / static_cast<double>(cfg_.fft_size);

    // moments of the normalized power spectrum
    double centroid = 0.0;
    for (std::size_t k = 0; k < bins; ++k) centroid += static_cast<double>(k) * bin_hz * power[k];
    centroid /= power_sum;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
        const double d = static_cast<double>(k) * bin_hz - centroid;
        const double p = power[k] / power_sum;
        m2 += d * d * p;
        m3 += d * d * d * p;
        m4 += d * d * d * d * p;
    }
    ft.centroid = centroid;
    ft.spread = std::sqrt(m2);
    if (ft.spread > 1e-9) {
        ft.skewness = m3 / (m2 * ft.spread);
        ft.kurtosis = m4 / (m2 * m2);
    }

    // rolloff: lowest frequency below which rolloff_fraction of the power lies
    {
        double cum = 0.0;
        const double target = cfg_.rolloff_fraction * power_sum;
        std::size_t k = 0;
        for (; k < bins; ++k) {
            cum += power[k];
            if (cum >= target) break;
        }
        ft.rolloff = static_cast<double>(std::min(k, bins - 1)) * bin_hz;
    }

    // brightness: power fraction at/above the cutoff
    {
        double high = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            if (static_cast<double>(k) * bin_hz >= cfg_.brightness_cutoff_hz) high += power[k];
        }
        ft.brightness = high / power_sum;
    }

    // flatness: geometric over arithmetic mean of the power spectrum
    {
        double log_sum = 0.0;
        for (std::size_t k = 0; k < bins; ++k) log_sum += std::log(std::max(power[k], 1e-300));
        const double geo = std::exp(log_sum / static_cast<double>(bins));
        ft.flatness = geo / (power_sum / static_cast<double>(bins));
    }

    // normalized Shannon entropy of the power spectrum
    {
        double h = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            const double p = power[k] / power_sum;
            if (p > 0.0) h -= p * std::log(p);
        }
        ft.entropy = h / std::log(static_cast<double>(bins));
    }

    // spectral peaks (local maxima above the -40 dB floor)
    {
        const double floor_amp = mag_max * std::pow(10.0, cfg_.spectral_peak_floor_db / 20.0);
        std::vector<SpectralPeak> peaks;
        for (std::size_t k = 1; k + 1 < bins; ++k) {
            if (mag[k] >= floor_amp && mag[k] >= mag[k - 1] && mag[k] > mag[k + 1]) {
                peaks.push_back({static_cast<double>(k) * bin_hz, mag[k]});
            }
        }
        double rough = 0.0;
        for (std::size_t i = 0; i < peaks.size(); ++i) {
            for (std::size_t j = i + 1; j < peaks.size(); ++j) {
                rough += pair_dissonance(peaks[i], peaks[j]);
            }
        }
        ft.roughness = rough;

        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < peaks.size(); ++i) {
            den += peaks[i].amp * peaks[i].amp;
            if (i + 1 < peaks.size()) {
                const double d = peaks[i].amp - peaks[i + 1].amp;
                num += d * d;
            }
        }
        ft.irregularity = den > 0.0 ? num / den : 0.0;
    }

    // MFCC 1..12 from 26 log mel energies
    {
        const int n_mel = cfg_.mel_filters;
        std::vector<double> log_mel(static_cast<std::size_t>(n_mel));
        for (int m = 0; m < n_mel; ++m) {
            double e = 0.0;
            const auto& bankm = mel_bank_[static_cast<std::size_t>(m)];
            for (std::size_t k = 0; k < bins; ++k) e += bankm[k] * power[k];
            log_mel[static_cast<std::size_t>(m)] = std::log(std::max(e, 1e-12));
        }
        for (int n = 1; n <= cfg_.mfcc_count; ++n) {
            double c = 0.0;
            for (int m = 0; m < n_mel; ++m) {
                c += log_mel[static_cast<std::size_t>(m)] *
                     std::cos(kPi * n * (m + 0.5) / n_mel);
            }
            ft.mfcc[static_cast<std::size_t>(n - 1)] = c;
        }
    }

    // formants: LPC resonances, padded with (fs/2, max_bw) when scarce
    {
        const auto r = dsp::autocorrelation(windowed,
                                            static_cast<std::size_t>(cfg_.lpc_order));
        auto lpc = dsp::levinson_durbin(r, static_cast<std::size_t>(cfg_.lpc_order));
        auto resonances = dsp::lpc_resonances(lpc, fs_);

        const double f_lo = cfg_.formant_min_hz;
        const double f_hi = fs_ / 2.0 - cfg_.formant_nyquist_margin_hz;
        std::size_t found = 0;
        for (const auto& res : resonances) {
            if (found >= 4) break;
            if (res.frequency_hz > f_lo && res.frequency_hz < f_hi &&
                res.bandwidth_hz < cfg_.formant_max_bandwidth_hz) {
                ft.formant_freq[found] = res.frequency_hz;
                ft.formant_bw[found] = res.bandwidth_hz;
                ++found;
            }
        }
        for (; found < 4; ++found) {
            ft.formant_freq[found] = fs_ / 2.0;
            ft.formant_bw[found] = cfg_.formant_max_bandwidth_hz;
        }
    }

    return ft;
}

VoicingDecision detect_voicing(std::span<const double> frame, double fs,
                               double rms_gate, const FeatureConfig& cfg,
                               const dsp::RealFft* fft) {
    VoicingDecision out;
    const std::size_t n = frame.size();
    if (n == 0) return out;

    double energy = 0.0;
    for (double v : frame) energy += v * v;
    out.rms = std::sqrt(energy / static_cast<double>(n));
    if (out.rms <= 0.0 || out.rms < rms_gate) return out;

    std::size_t lag_min = static_cast<std::size_t>(std::llround(fs / cfg.f0_max_hz));
    std::size_t lag_max = static_cast<std::size_t>(std::llround(fs / cfg.f0_min_hz));
    lag_min = std::max<std::size_t>(lag_min, 2);
    lag_max = std::min(lag_max, n - 2);
    if (lag_min >= lag_max) return out;

    const auto rho = dsp::normalized_autocorrelation(frame, lag_max + 1, fft);

    // Local maxima only; among those within 1% of the best, the smallest lag
    // wins so harmonically related subpeaks do not halve the estimate.
    double best = -1.0;
    for (std::size_t tau = lag_min; tau <= lag_max; ++tau) {
        if (rho[tau] >= rho[tau - 1] && rho[tau] >= rho[tau + 1]) {
            best = std::max(best, rho[tau]);
        }
    }
    out.peak = std::max(best, 0.0);
    if (best < cfg.voicing_peak_threshold) return out;

    std::size_t chosen = 0;
    for (std::size_t tau = lag_min; tau <= lag_max; ++tau) {
        if (rho[tau] >= rho[tau - 1] && rho[tau] >= rho[tau + 1] &&
            rho[tau] >= 0.99 * best) {
            chosen = tau;
            break;
        }
    }
    if (chosen == 0) return out;

    out.voiced = true;
    out.f0_hz = fs / dsp::parabolic_peak(rho, chosen);
    out.peak = rho[chosen];
    return out;
}

FrameFeatures frame_features(std::span<const double> frame, double fs, double f0,
                             const FeatureConfig& cfg) {
    FeatureConfig local = cfg;
    // allow callers to analyze a frame whose size differs from the config
    local.window_seconds = static_cast<double>(frame.size()) / fs;
    FrameAnalyzer analyzer(fs, local);
    return analyzer.analyze(frame, f0);
}

std::vector<std::array<double, kStreamCount>> append_derivatives(
    const std::vector<FrameFeatures>& voiced, double hop_seconds) {
    const std::size_t n = voiced.size();
    std::vector<std::array<double, kStreamCount>> rows(n);
    std::vector<std::array<double, kFrameFeatureCount>> base(n);
    for (std::size_t t = 0; t < n; ++t) base[t] = voiced[t].as_array();

    for (std::size_t t = 0; t < n; ++t) {
        for (int j = 0; j < kFrameFeatureCount; ++j) {
            rows[t][static_cast<std::size_t>(j)] = base[t][static_cast<std::size_t>(j)];
            double d = 0.0;
            if (n > 1) {
                if (t == 0) {
                    d = (base[1][j] - base[0][j]) / hop_seconds;
                } else if (t == n - 1) {
                    d = (base[n - 1][j] - base[n - 2][j]) / hop_seconds;
                } else {
                    d = (base[t + 1][j] - base[t - 1][j]) / (2.0 * hop_seconds);
                }
            }
            rows[t][static_cast<std::size_t>(j + kFrameFeatureCount)] = d;
        }
    }
    return rows;
}

std::vector<double> aggregate_statistics(
    const std::vector<std::array<double, kStreamCount>>& rows) {
    if (rows.empty()) throw EmptyInputError("aggregate_statistics: no rows");
    const double n = static_cast<double>(rows.size());
    std::vector<double> out;
    out.reserve(kStreamCount * 5);
    for (int j = 0; j < kStreamCount; ++j) {
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& row : rows) {
            const double v = row[static_cast<std::size_t>(j)];
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double mean = sum / n;
        double var = 0.0;
        for (const auto& row : rows) {
            const double d = row[static_cast<std::size_t>(j)] - mean;
            var += d * d;
        }
        var /= n;
        out.push_back(mean);
        out.push_back(std::sqrt(std::max(var, 0.0)));
        out.push_back(lo);
        out.push_back(hi);
        out.push_back(hi - lo);
    }
    return out;
}

double speaking_rate(std::span<const double> samples, double fs,
                     const FeatureConfig& cfg) {
    if (samples.empty() || fs <= 0.0) return 0.0;
    const double duration = static_cast<double>(samples.size()) / fs;

    std::vector<Frame> frames;
    try {
        frames = frame_signal(samples, fs, cfg);
    } catch (const TooShortError&) {
        return 0.0;
    }

    std::vector<double> contour(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        double e = 0.0;
        for (double v : frames[i].samples) e += v * v;
        contour[i] = e;
    }

    // zero-padded moving average over rate_smooth_seconds
    const long half = std::lround(cfg.rate_smooth_seconds / (2.0 * cfg.hop_seconds));
    const double win = static_cast<double>(2 * half + 1);
    std::vector<double> smooth(contour.size(), 0.0);
    for (long i = 0; i < static_cast<long>(contour.size()); ++i) {
        double acc = 0.0;
        for (long j = i - half; j <= i + half; ++j) {
            if (j >= 0 && j < static_cast<long>(contour.size())) acc += contour[static_cast<std::size_t>(j)];
        }
        smooth[static_cast<std::size_t>(i)] = acc / win;
    }

    const double peak_max = *std::max_element(smooth.begin(), smooth.end());
    if (peak_max <= 0.0) return 0.0;
    const double threshold = cfg.rate_threshold_ratio * peak_max;

    // Quantize so sub-0.5% wiggle cannot split one nucleus into several, then
    // pick plateau-aware local maxima above the threshold.
    const double q = peak_max * 0.005;
    std::vector<long> levels(smooth.size());
    for (std::size_t i = 0; i < smooth.size(); ++i) {
        levels[i] = std::lround(smooth[i] / q);
    }

    struct Candidate {
        std::size_t index;
        double value;
    };
    std::vector<Candidate> candidates;
    std::size_t i = 0;
    const std::size_t n = levels.size();
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && levels[j + 1] == levels[i]) ++j;
        const bool rises_left = (i == 0) || (levels[i - 1] < levels[i]);
        const bool falls_right = (j == n - 1) || (levels[j + 1] < levels[i]);
        if (rises_left && falls_right) {
            double best = 0.0;
            for (std::size_t k = i; k <= j; ++k) best = std::max(best, smooth[k]);
            if (best > threshold) candidates.push_back({(i + j) / 2, best});
        }
        i = j + 1;
    }

    // enforce the minimum separation, keeping the strongest peaks
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.index < b.index;
    });
    const double min_sep = cfg.rate_min_separation_seconds;
    std::vector<std::size_t> kept;
    for (const auto& c : candidates) {
        bool ok = true;
        for (std::size_t k : kept) {
            const double gap = std::abs(static_cast<double>(c.index) - static_cast<double>(k)) *
                               cfg.hop_seconds;
            if (gap < min_sep) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(c.index);
    }

    return static_cast<double>(kept.size()) / duration;
}

FeatureVector extract_feature_vector(const Utterance& utterance,
                                     const FeatureConfig& cfg) {
    const auto frames = frame_signal(utterance.samples, utterance.sample_rate, cfg);

    FrameAnalyzer analyzer(utterance.sample_rate, cfg);

    // RMS gate relative to the loudest frame of this utterance
    double max_rms = 0.0;
    std::vector<double> rms(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        double e = 0.0;
        for (double v : frames[i].samples) e += v * v;
        rms[i] = std::sqrt(e / static_cast<double>(frames[i].samples.size()));
        max_rms = std::max(max_rms, rms[i]);
    }
    const double gate = cfg.rms_gate_ratio * max_rms;

    std::vector<FrameFeatures> voiced;
    for (const auto& frame : frames) {
        const auto v = analyzer.voicing(frame.samples, gate);
        if (v.voiced) {
            voiced.push_back(analyzer.analyze(frame.samples, v.f0_hz));
        }
    }
    if (voiced.empty()) {
        throw NoVoicedFramesError("no voiced frames in utterance '" +
                                  utterance.utterance_id + "'");
    }

    const auto rows = append_derivatives(voiced, cfg.hop_seconds);
    FeatureVector fv;
    fv.utterance_id = utterance.utterance_id;
    fv.speaker_id = utterance.speaker_id;
    fv.values = aggregate_statistics(rows);
    fv.values.push_back(speaking_rate(utterance.samples, utterance.sample_rate, cfg));
    return fv;
}

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> base = {"f0", "energy"};
        for (int i = 1; i <= 4; ++i) base.push_back("formant" + std::to_string(i) + "_freq");
        for (int i = 1; i <= 4; ++i) base.push_back("formant" + std::to_string(i) + "_bw");
        for (int i = 1; i <= 12; ++i) base.push_back("mfcc" + std::to_string(i));
        for (const char* s : {"zcr", "rolloff", "brightness", "centroid", "spread",
                              "skewness", "kurtosis", "flatness", "entropy",
                              "roughness", "irregularity"}) {
            base.emplace_back(s);
        }

        std::vector<std::string> streams = base;
        for (const auto& name : base) streams.push_back("d_" + name);

        std::vector<std::string> out;
        out.reserve(kFeatureDim);
        for (const auto& stream : streams) {
            for (const char* stat : {"mean", "std", "min", "max", "range"}) {
                out.push_back(stream + "_" + stat);
            }
        }
        out.emplace_back("speaking_rate");
        return out;
    }();
    return names;
}

void write_feature_cache(const FeatureTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write feature cache: " + path.string());
    out << "utterance_id,speaker_id,emotion";
    for (int i = 1; i <= kFeatureDim; ++i) out << ",f" << i;
    out << "\n";
    for (const auto& rec : table) {
        if (rec.values.size() != kFeatureDim) {
            throw DimensionMismatchError("feature cache row for '" + rec.utterance_id +
                                         "' has wrong dimension");
        }
        out << csv::escape_field(rec.utterance_id) << ','
            << csv::escape_field(rec.speaker_id) << ',' << to_string(rec.emotion);
        for (double v : rec.values) out << ',' << csv::format_double(v);
        out << "\n";
    }
    if (!out) throw IoError("short write: " + path.string());
}

FeatureTable read_feature_cache(const std::filesystem::path& path) {
    const csv::Table table = csv::read_file(path);
    if (table.header.size() != 3 + kFeatureDim || table.header[0] != "utterance_id" ||
        table.header[1] != "speaker_id" || table.header[2] != "emotion" ||
        table.header[3] != "f1") {
        throw FormatError("bad feature cache header in " + path.string());
    }
    FeatureTable out;
    out.reserve(table.rows.size());
    std::size_t row_no = 1;
    for (const auto& row : table.rows) {
        ++row_no;
        FeatureRecord rec;
        rec.utterance_id = row[0];
        rec.speaker_id = row[1];
        const auto emotion = parse_emotion(row[2]);
        if (!emotion) {
            throw ValidationError(path.string() + ": row " + std::to_string(row_no) +
                                  " has unknown emotion '" + row[2] + "'");
        }
        rec.emotion = *emotion;
        rec.values.reserve(kFeatureDim);
        for (int i = 0; i < kFeatureDim; ++i) {
            rec.values.push_back(csv::parse_double(
                row[static_cast<std::size_t>(3 + i)],
                path.string() + " row " + std::to_string(row_no)));
        }
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace emovox
