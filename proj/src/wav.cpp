#include "emovox/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "emovox/errors.hpp"

namespace emovox::wav {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint32_t read_u32(const unsigned char* p) {
    return p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

} // namespace

WavData read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open wav file: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw UnsupportedFormatError("not a RIFF/WAVE file: " + path.string());
    }

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;
    bool have_fmt = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        char id[5] = {0};
        std::memcpy(id, bytes.data() + pos, 4);
        std::uint32_t size = read_u32(bytes.data() + pos + 4);
        std::size_t body = pos + 8;
        if (body + size > bytes.size()) size = static_cast<std::uint32_t>(bytes.size() - body);
        if (std::memcmp(id, "fmt ", 4) == 0 && size >= 16) {
            format = read_u16(bytes.data() + body);
            channels = read_u16(bytes.data() + body + 2);
            rate = read_u32(bytes.data() + body + 4);
            bits = read_u16(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = size;
        }
        pos = body + size + (size & 1); // chunks are word aligned
    }

    if (!have_fmt || data == nullptr) {
        throw UnsupportedFormatError("wav file missing fmt/data chunk: " + path.string());
    }
    // 0xFFFE = WAVE_FORMAT_EXTENSIBLE is not handled; 1 = PCM, 3 = IEEE float.
    if (format != 1 && format != 3) {
        throw UnsupportedFormatError("unsupported wav format tag " + std::to_string(format) +
                                     " in " + path.string());
    }
    if (channels < 1 || channels > 2) {
        throw UnsupportedFormatError("unsupported channel count " + std::to_string(channels) +
                                     " in " + path.string());
    }
    if (rate == 0) throw UnsupportedFormatError("zero sample rate in " + path.string());
    if (format == 1 && bits != 8 && bits != 16 && bits != 24) {
        throw UnsupportedFormatError("unsupported PCM bit depth " + std::to_string(bits) +
                                     " in " + path.string());
    }
    if (format == 3 && bits != 32) {
        throw UnsupportedFormatError("unsupported float bit depth " + std::to_string(bits) +
                                     " in " + path.string());
    }

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_bytes = bytes_per_sample * channels;
    const std::size_t n_frames = frame_bytes ? data_size / frame_bytes : 0;

    WavData out;
    out.sample_rate = static_cast<double>(rate);
    out.channels.assign(channels, std::vector<double>(n_frames));

    for (std::size_t f = 0; f < n_frames; ++f) {
        for (std::uint16_t c = 0; c < channels; ++c) {
            const unsigned char* p = data + f * frame_bytes + c * bytes_per_sample;
            double v = 0.0;
            if (format == 3) {
                float fv;
                std::memcpy(&fv, p, 4);
                v = fv;
            } else if (bits == 16) {
                std::int16_t s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
                v = s / 32768.0;
            } else if (bits == 8) {
                v = (static_cast<int>(p[0]) - 128) / 128.0;
            } else { // 24-bit
                std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
                if (s & 0x800000) s |= ~0xFFFFFF;
                v = s / 8388608.0;
            }
            out.channels[c][f] = std::clamp(v, -1.0, 1.0);
        }
    }
    return out;
}

void write_wav_mono16(const std::filesystem::path& path,
                      const std::vector<double>& samples, double sample_rate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write wav file: " + path.string());

    auto put_u32 = [&](std::uint32_t v) {
        char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
        out.write(b, 4);
    };
    auto put_u16 = [&](std::uint16_t v) {
        char b[2] = {char(v), char(v >> 8)};
        out.write(b, 2);
    };

    const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
    out.write("RIFF", 4);
    put_u32(36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(16);
    put_u16(1); // PCM
    put_u16(1); // mono
    const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(sample_rate));
    put_u32(rate);
    put_u32(rate * 2);
    put_u16(2);
    put_u16(16);
    out.write("data", 4);
    put_u32(data_size);
    for (double v : samples) {
        double c = std::clamp(v, -1.0, 1.0);
        auto s = static_cast<std::int16_t>(std::lround(c * 32767.0));
        put_u16(static_cast<std::uint16_t>(s));
    }
    if (!out) throw IoError("short write: " + path.string());
}

std::vector<double> mix_to_mono(const WavData& data) {
    if (data.channels.empty()) return {};
    if (data.channels.size() == 1) return data.channels[0];
    const std::size_t n = data.channels[0].size();
    std::vector<double> mono(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const auto& ch : data.channels) sum += ch[i];
        mono[i] = sum / static_cast<double>(data.channels.size());
    }
    return mono;
}

std::vector<double> resample_sinc(const std::vector<double>& x,
                                  double fs_in, double fs_out) {
    if (x.empty()) return {};
    if (fs_in == fs_out) return x;

    const double ratio = fs_out / fs_in;
    const std::size_t n_out = static_cast<std::size_t>(std::llround(
        static_cast<double>(x.size()) * ratio));
    std::vector<double> out(n_out);

    // Anti-alias when downsampling: cutoff at the smaller Nyquist.
    const double cutoff = std::min(1.0, ratio); // relative to fs_in/2
    const int half_taps = 32;
    const double support = half_taps / cutoff;

    for (std::size_t i = 0; i < n_out; ++i) {
        const double t = static_cast<double>(i) / ratio; // position in input samples
        const long lo = static_cast<long>(std::ceil(t - support));
        const long hi = static_cast<long>(std::floor(t + support));
        double acc = 0.0, wsum = 0.0;
        for (long j = lo; j <= hi; ++j) {
            const double d = (t - static_cast<double>(j)) * cutoff;
            double s;
            if (std::abs(d) < 1e-12) {
                s = 1.0;
            } else {
                s = std::sin(kPi * d) / (kPi * d);
            }
            // Hann window over the kernel support
            const double u = (t - static_cast<double>(j)) / support;
            const double w = 0.5 * (1.0 + std::cos(kPi * std::clamp(u, -1.0, 1.0)));
            const double k = s * w;
            wsum += k;
            if (j >= 0 && j < static_cast<long>(x.size())) acc += k * x[static_cast<std::size_t>(j)];
        }
        out[i] = wsum != 0.0 ? std::clamp(acc / wsum, -1.0, 1.0) : 0.0;
    }
    return out;
}

} // namespace emovox::wav
