#include "emovox/dsp.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "emovox/errors.hpp"

namespace emovox::dsp {

namespace {
// The FFTW planner is not thread safe; executing independent plans is.
std::mutex g_planner_mutex;
} // namespace

RealFft::RealFft(std::size_t size) : size_(size) {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    in_ = fftw_alloc_real(size_);
    auto* out = fftw_alloc_complex(size_ / 2 + 1);
    out_ = out;
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(size_), in_, out, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    if (plan_) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    if (in_) fftw_free(in_);
    if (out_) fftw_free(static_cast<fftw_complex*>(out_));
}

std::vector<std::complex<double>> RealFft::forward(std::span<const double> input) const {
    const std::size_t n = std::min(input.size(), size_);
    std::copy(input.begin(), input.begin() + static_cast<long>(n), in_);
    std::fill(in_ + n, in_ + size_, 0.0);
    fftw_execute(static_cast<fftw_plan>(plan_));
    auto* out = static_cast<fftw_complex*>(out_);
    std::vector<std::complex<double>> result(bins());
    for (std::size_t k = 0; k < result.size(); ++k) {
        result[k] = {out[k][0], out[k][1]};
    }
    return result;
}

std::vector<double> hamming_window(std::size_t length) {
    std::vector<double> w(length);
    if (length == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 0; i < length; ++i) {
        w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                      static_cast<double>(length - 1));
    }
    return w;
}

std::vector<double> normalized_autocorrelation(std::span<const double> x,
                                               std::size_t max_lag,
                                               const RealFft* fft_in) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    max_lag = std::min(max_lag, n - 1);

    std::size_t fft_size = 1;
    while (fft_size < 2 * n) fft_size <<= 1;

    std::unique_ptr<RealFft> owned;
    if (fft_in != nullptr && fft_in->size() >= 2 * n) {
        fft_size = fft_in->size();
    } else {
        owned = std::make_unique<RealFft>(fft_size);
        fft_in = owned.get();
    }
    const RealFft& fft = *fft_in;
    auto spec = fft.forward(x);

    // raw autocorrelation = IFFT(|X|^2); compute via a second real FFT on the
    // power spectrum using the even symmetry of the result.
    std::vector<double> power(fft_size, 0.0);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        power[k] = std::norm(spec[k]);
    }
    // reconstruct full-length power sequence (hermitian symmetry)
    for (std::size_t k = spec.size(); k < fft_size; ++k) {
        power[k] = power[fft_size - k];
    }
    auto raw_spec = fft.forward(power);

    // prefix sums of squares for normalization
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + x[t] * x[t];
    const double total = prefix[n];

    std::vector<double> rho(max_lag + 1, 0.0);
    if (total <= 0.0) return rho;
    const double scale = 1.0 / static_cast<double>(fft_size);
    for (std::size_t tau = 0; tau <= max_lag; ++tau) {
        const double raw = raw_spec[tau].real() * scale;
        const double e_head = prefix[n - tau]; // sum over t in [0, n-tau)
        const double e_tail = total - prefix[tau]; // sum over t in [tau, n)
        const double denom = std::sqrt(e_head * e_tail);
        rho[tau] = denom > 0.0 ? raw / denom : 0.0;
    }
    return rho;
}

std::vector<double> autocorrelation(std::span<const double> x, std::size_t order) {
    std::vector<double> r(order + 1, 0.0);
    const std::size_t n = x.size();
    for (std::size_t lag = 0; lag <= order && lag < n; ++lag) {
        double sum = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) sum += x[t] * x[t + lag];
        r[lag] = sum;
    }
    return r;
}

std::vector<double> levinson_durbin(const std::vector<double>& r, std::size_t order) {
    if (r.size() < order + 1) throw std::invalid_argument("levinson_durbin: r too short");
    if (r[0] <= 0.0) throw DegenerateSpectrumError("levinson_durbin: zero-energy frame");

    std::vector<double> a(order + 1, 0.0); // a[0] = 1 implicitly
    a[0] = 1.0;
    double err = r[0];
    for (std::size_t m = 1; m <= order; ++m) {
        double acc = r[m];
        for (std::size_t i = 1; i < m; ++i) acc += a[i] * r[m - i];
        const double k = -acc / err;
        std::vector<double> prev(a.begin(), a.begin() + static_cast<long>(m));
        for (std::size_t i = 1; i < m; ++i) a[i] = prev[i] + k * prev[m - i];
        a[m] = k;
        err *= (1.0 - k * k);
        if (err <= 0.0) err = 1e-12; // numerically singular; keep going
    }
    return std::vector<double>(a.begin() + 1, a.end());
}

std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& coeffs) {
    const std::size_t p = coeffs.size();
    if (p == 0) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<long>(p),
                                                      static_cast<long>(p));
    for (std::size_t i = 0; i < p; ++i) {
        companion(0, static_cast<long>(i)) = -coeffs[i];
    }
    for (std::size_t i = 1; i < p; ++i) {
        companion(static_cast<long>(i), static_cast<long>(i - 1)) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> roots(p);
    for (std::size_t i = 0; i < p; ++i) {
        roots[i] = solver.eigenvalues()(static_cast<long>(i));
    }
    return roots;
}

std::vector<Resonance> lpc_resonances(const std::vector<double>& lpc, double fs) {
    // A(z) = 1 + a1 z^-1 + ... + ap z^-p; poles are roots of
    // z^p + a1 z^(p-1) + ... + ap.
    auto roots = polynomial_roots(lpc);
    std::vector<Resonance> out;
    for (const auto& z : roots) {
        if (z.imag() <= 1e-9) continue;
        const double mag = std::abs(z);
        if (mag <= 0.0 || mag >= 1.0 + 1e-9) continue;
        const double freq = std::atan2(z.imag(), z.real()) * fs / (2.0 * kPi);
        const double bw = -std::log(std::min(mag, 1.0 - 1e-12)) * fs / kPi;
        out.push_back({freq, bw});
    }
    std::sort(out.begin(), out.end(), [](const Resonance& a, const Resonance& b) {
        return a.frequency_hz < b.frequency_hz;
    });
    return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<std::vector<double>> mel_filter_bank(int n_filters, double f_min,
                                                 double f_max, std::size_t n_bins,
                                                 std::size_t fft_size, double fs) {
    const double mel_min = hz_to_mel(f_min);
    const double mel_max = hz_to_mel(f_max);
    std::vector<double> centers(static_cast<std::size_t>(n_filters) + 2);
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const double mel = mel_min + (mel_max - mel_min) * static_cast<double>(j) /
                                         static_cast<double>(n_filters + 1);
        centers[j] = mel_to_hz(mel);
    }

    std::vector<std::vector<double>> bank(static_cast<std::size_t>(n_filters),
                                          std::vector<double>(n_bins, 0.0));
    for (int m = 0; m < n_filters; ++m) {
        const double f_lo = centers[static_cast<std::size_t>(m)];
        const double f_c = centers[static_cast<std::size_t>(m) + 1];
        const double f_hi = centers[static_cast<std::size_t>(m) + 2];
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double f = static_cast<double>(k) * fs / static_cast<double>(fft_size);
            double w = 0.0;
            if (f > f_lo && f < f_c) {
                w = (f - f_lo) / (f_c - f_lo);
            } else if (f >= f_c && f < f_hi) {
                w = (f_hi - f) / (f_hi - f_c);
            }
            bank[static_cast<std::size_t>(m)][k] = w;
        }
    }
    return bank;
}

double parabolic_peak(const std::vector<double>& v, std::size_t i) {
    if (i == 0 || i + 1 >= v.size()) return static_cast<double>(i);
    const double a = v[i - 1], b = v[i], c = v[i + 1];
    const double denom = a - 2.0 * b + c;
    if (std::abs(denom) < 1e-30) return static_cast<double>(i);
    const double delta = 0.5 * (a - c) / denom;
    return static_cast<double>(i) + std::clamp(delta, -0.5, 0.5);
}

} // namespace emovox::dsp
