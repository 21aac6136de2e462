#ifndef EMOVOX_DSP_HPP
#define EMOVOX_DSP_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace emovox::dsp {

inline constexpr double kPi = 3.14159265358979323846;

// Real-input FFT of a fixed power-of-two size (FFTW behind the scenes).
// One instance per thread; execution on distinct instances is safe.
class RealFft {
public:
    explicit RealFft(std::size_t size);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const { return size_; }
    std::size_t bins() const { return size_ / 2 + 1; }

    // Input shorter than size() is zero padded.
    std::vector<std::complex<double>> forward(std::span<const double> input) const;

private:
    std::size_t size_;
    void* plan_ = nullptr;    // fftw_plan
    double* in_ = nullptr;    // fftw buffers
    void* out_ = nullptr;     // fftw_complex*
};

std::vector<double> hamming_window(std::size_t length);

// Normalized autocorrelation rho[tau] for tau in [0, max_lag], where
// rho[tau] = sum x[t]x[t+tau] / sqrt(sum_{t<N-tau} x^2 * sum_{t>=tau} x^2).
// Raw products are computed with an FFT of at least 2N points. Pass a
// pre-built FFT of sufficient size to avoid re-planning in hot loops.
std::vector<double> normalized_autocorrelation(std::span<const double> x,
                                               std::size_t max_lag,
                                               const RealFft* fft = nullptr);

// Plain (biased, unnormalized) autocorrelation r[0..order].
std::vector<double> autocorrelation(std::span<const double> x, std::size_t order);

// Levinson-Durbin recursion. Returns LPC coefficients a[1..order] such that
// A(z) = 1 + a1 z^-1 + ... + ap z^-p. r[0] must be > 0.
std::vector<double> levinson_durbin(const std::vector<double>& r, std::size_t order);

// Roots of the monic polynomial z^p + c[0] z^(p-1) + ... + c[p-1]
// via the companion matrix.
std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& coeffs);

struct Resonance {
    double frequency_hz;
    double bandwidth_hz;
};

// Resonances of an LPC polynomial: roots with positive imaginary part mapped
// to (freq, bandwidth) and sorted by ascending frequency.
std::vector<Resonance> lpc_resonances(const std::vector<double>& lpc, double fs);

// Triangular mel filter bank: `n_filters` filters spanning [f_min, f_max],
// returned as per-filter weights over the `n_bins` FFT bins.
std::vector<std::vector<double>> mel_filter_bank(int n_filters, double f_min,
                                                 double f_max, std::size_t n_bins,
                                                 std::size_t fft_size, double fs);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Refines the position of a discrete peak at index i using the parabola
// through (i-1, i, i+1). Returns the fractional index.
double parabolic_peak(const std::vector<double>& v, std::size_t i);

} // namespace emovox::dsp

#endif
