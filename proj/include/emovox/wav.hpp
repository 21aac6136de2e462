#ifndef EMOVOX_WAV_HPP
#define EMOVOX_WAV_HPP

#include <filesystem>
#include <vector>

namespace emovox::wav {

struct WavData {
    std::vector<std::vector<double>> channels; // per-channel samples in [-1, 1]
    double sample_rate = 0.0;
};

// Reads a RIFF/WAVE file. Accepts PCM 8/16/24-bit integer and 32-bit float,
// 1 or 2 channels, any rate. Throws IoError / UnsupportedFormatError.
WavData read_wav(const std::filesystem::path& path);

// Writes mono 16-bit PCM (test fixtures and small tools).
void write_wav_mono16(const std::filesystem::path& path,
                      const std::vector<double>& samples, double sample_rate);

// Channel-average mixdown, length preserved.
std::vector<double> mix_to_mono(const WavData& data);

// Windowed-sinc resampler (Hann window, 32 taps per side, cutoff at the
// smaller Nyquist). Output length = round(n * fs_out / fs_in).
std::vector<double> resample_sinc(const std::vector<double>& x,
                                  double fs_in, double fs_out);

} // namespace emovox::wav

#endif
