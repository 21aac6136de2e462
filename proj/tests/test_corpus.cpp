#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>

#include "emovox/corpus.hpp"
#include "emovox/errors.hpp"
#include "emovox/wav.hpp"
#include "synth.hpp"

using namespace emovox;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "emovox_corpus_tests";
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

// minimal stereo/float writers for reader coverage
void write_wav_stereo16(const fs::path& path, const std::vector<double>& left,
                        const std::vector<double>& right, std::uint32_t rate) {
    std::ofstream out(path, std::ios::binary);
    auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { out.write(reinterpret_cast<char*>(&v), 2); };
    const std::uint32_t data = static_cast<std::uint32_t>(left.size() * 4);
    out.write("RIFF", 4);
    u32(36 + data);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    u32(16);
    u16(1);
    u16(2);
    u32(rate);
    u32(rate * 4);
    u16(4);
    u16(16);
    out.write("data", 4);
    u32(data);
    for (std::size_t i = 0; i < left.size(); ++i) {
        u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(
            std::lround(std::clamp(left[i], -1.0, 1.0) * 32767))));
        u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(
            std::lround(std::clamp(right[i], -1.0, 1.0) * 32767))));
    }
}

void write_wav_float32(const fs::path& path, const std::vector<double>& samples,
                       std::uint32_t rate) {
    std::ofstream out(path, std::ios::binary);
    auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { out.write(reinterpret_cast<char*>(&v), 2); };
    const std::uint32_t data = static_cast<std::uint32_t>(samples.size() * 4);
    out.write("RIFF", 4);
    u32(36 + data);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    u32(16);
    u16(3);
    u16(1);
    u32(rate);
    u32(rate * 4);
    u16(4);
    u16(32);
    out.write("data", 4);
    u32(data);
    for (double v : samples) {
        float f = static_cast<float>(v);
        out.write(reinterpret_cast<char*>(&f), 4);
    }
}

} // namespace

TEST_CASE("emotion labels: canonical order and parsing") {
    const auto emotions = all_emotions();
    CHECK(emotions.size() == 6);
    CHECK(to_string(emotions[0]) == "anger");
    CHECK(to_string(emotions[1]) == "disgust");
    CHECK(to_string(emotions[2]) == "fear");
    CHECK(to_string(emotions[3]) == "happy");
    CHECK(to_string(emotions[4]) == "neutral");
    CHECK(to_string(emotions[5]) == "sad");
    CHECK(parse_emotion("happy") == Emotion::Happy);
    CHECK_FALSE(parse_emotion("joy").has_value());
}

TEST_CASE("map_labels matches the fixed arousal/valence tables") {
    CHECK(map_labels(Emotion::Happy) == std::pair{Arousal::Active, Valence::Positive});
    CHECK(map_labels(Emotion::Neutral) == std::pair{Arousal::Neutral, Valence::Neutral});
    CHECK(map_labels(Emotion::Disgust) == std::pair{Arousal::Passive, Valence::Negative});
    CHECK(map_labels(Emotion::Anger) == std::pair{Arousal::Active, Valence::Negative});
    CHECK(map_labels(Emotion::Fear) == std::pair{Arousal::Active, Valence::Negative});
    CHECK(map_labels(Emotion::Sad) == std::pair{Arousal::Passive, Valence::Negative});
}

TEST_CASE("map_labels preimages partition the six emotions") {
    std::map<Arousal, int> arousal_counts;
    std::map<Valence, int> valence_counts;
    for (Emotion e : all_emotions()) {
        ++arousal_counts[arousal_of(e)];
        ++valence_counts[valence_of(e)];
    }
    CHECK(arousal_counts[Arousal::Active] == 3);
    CHECK(arousal_counts[Arousal::Passive] == 2);
    CHECK(arousal_counts[Arousal::Neutral] == 1);
    CHECK(valence_counts[Valence::Positive] == 1);
    CHECK(valence_counts[Valence::Negative] == 4);
    CHECK(valence_counts[Valence::Neutral] == 1);
}

TEST_CASE("load_manifest: valid rows, speakers, and rejection cases") {
    const auto dir = temp_dir();
    const auto path = dir / "manifest.csv";

    write_text(path,
               "utterance_id,wav_path,speaker_id,emotion\n"
               "u1,a.wav,spk1,happy\n"
               "u2,b.wav,spk1,sad\n"
               "u3,c.wav,spk2,anger\n");
    const auto manifest = load_manifest(path);
    CHECK(manifest.entries.size() == 3);
    CHECK(manifest.speakers() == std::vector<std::string>{"spk1", "spk2"});

    write_text(path,
               "utterance_id,wav_path,speaker_id,emotion\n"
               "u1,a.wav,spk1,joy\n");
    CHECK_THROWS_WITH_AS(load_manifest(path),
                         doctest::Contains("joy"), ValidationError);
    CHECK_THROWS_WITH_AS(load_manifest(path),
                         doctest::Contains("row 2"), ValidationError);

    write_text(path,
               "utterance_id,wav_path,speaker_id,emotion\n"
               "u1,a.wav,spk1,happy\n"
               "u1,b.wav,spk1,sad\n");
    CHECK_THROWS_AS(load_manifest(path), ValidationError);

    write_text(path, "id,path,speaker,label\nu1,a.wav,s,happy\n");
    CHECK_THROWS_AS(load_manifest(path), FormatError);

    CHECK_THROWS_AS(load_manifest(dir / "missing.csv"), IoError);
}

TEST_CASE("manifest round-trips through write_manifest") {
    const auto dir = temp_dir();
    const auto path = dir / "rt.csv";
    write_text(path,
               "utterance_id,wav_path,speaker_id,emotion\n"
               "u1,a.wav,spk1,happy\n"
               "u2,sub/b.wav,spk2,disgust\n");
    const auto manifest = load_manifest(path);

    const auto out1 = dir / "rt_out1.csv";
    const auto out2 = dir / "rt_out2.csv";
    write_manifest(manifest, out1);
    const auto reloaded = load_manifest(out1);
    REQUIRE(reloaded.entries.size() == manifest.entries.size());
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        CHECK(reloaded.entries[i].utterance_id == manifest.entries[i].utterance_id);
        CHECK(reloaded.entries[i].wav_path == manifest.entries[i].wav_path);
        CHECK(reloaded.entries[i].speaker_id == manifest.entries[i].speaker_id);
        CHECK(reloaded.entries[i].emotion == manifest.entries[i].emotion);
    }
    write_manifest(reloaded, out2);
    CHECK(read_bytes(out1) == read_bytes(out2));
}

TEST_CASE("load_utterance: 16-bit mono at the pipeline rate") {
    const auto dir = temp_dir();
    const auto wav_path = dir / "mono16.wav";
    wav::write_wav_mono16(wav_path, synth::sine(220.0, 1.0, 16000.0, 0.5), 16000.0);

    CorpusManifest manifest;
    manifest.base_dir = dir;
    ManifestEntry entry{"u1", "mono16.wav", "spk1", Emotion::Happy};
    const auto utt = load_utterance(manifest, entry);
    CHECK(utt.samples.size() == 16000);
    CHECK(utt.sample_rate == 16000.0);
    double max_abs = 0.0;
    for (double v : utt.samples) {
        CHECK(std::isfinite(v));
        max_abs = std::max(max_abs, std::abs(v));
    }
    CHECK(max_abs <= 1.0);
    CHECK(max_abs == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("load_utterance: stereo mixdown averages channels, length preserved") {
    const auto dir = temp_dir();
    const auto wav_path = dir / "stereo.wav";
    const auto left = synth::sine(220.0, 0.5, 16000.0, 0.8);
    std::vector<double> right(left.size(), 0.0); // silent right channel
    write_wav_stereo16(wav_path, left, right, 16000);

    CorpusManifest manifest;
    manifest.base_dir = dir;
    ManifestEntry entry{"u1", "stereo.wav", "spk1", Emotion::Happy};
    const auto utt = load_utterance(manifest, entry);
    CHECK(utt.samples.size() == left.size());
    // average of (x, 0) halves the amplitude
    double max_abs = 0.0;
    for (double v : utt.samples) max_abs = std::max(max_abs, std::abs(v));
    CHECK(max_abs == doctest::Approx(0.4).epsilon(0.02));
}

TEST_CASE("load_utterance: float32 input accepted and clamped to [-1,1]") {
    const auto dir = temp_dir();
    const auto wav_path = dir / "f32.wav";
    auto samples = synth::sine(300.0, 0.25, 16000.0, 1.2); // deliberately hot
    write_wav_float32(wav_path, samples, 16000);

    CorpusManifest manifest;
    manifest.base_dir = dir;
    ManifestEntry entry{"u1", "f32.wav", "spk1", Emotion::Sad};
    const auto utt = load_utterance(manifest, entry);
    for (double v : utt.samples) CHECK(std::abs(v) <= 1.0);
}

TEST_CASE("load_utterance: 8 kHz input is resampled, frequency preserved") {
    const auto dir = temp_dir();
    const auto wav_path = dir / "rate8k.wav";
    wav::write_wav_mono16(wav_path, synth::sine(1000.0, 1.0, 8000.0, 0.5), 8000.0);

    CorpusManifest manifest;
    manifest.base_dir = dir;
    ManifestEntry entry{"u1", "rate8k.wav", "spk1", Emotion::Fear};
    const auto utt = load_utterance(manifest, entry);
    CHECK(utt.samples.size() >= 2 * 8000 - 1);
    CHECK(utt.samples.size() <= 2 * 8000 + 1);

    // oracle: the resampled sine keeps its analytic frequency; count zero
    // crossings over the stable interior
    std::size_t crossings = 0;
    const std::size_t lo = 1000, hi = utt.samples.size() - 1000;
    for (std::size_t i = lo + 1; i < hi; ++i) {
        if ((utt.samples[i - 1] < 0.0) != (utt.samples[i] < 0.0)) ++crossings;
    }
    const double seconds = static_cast<double>(hi - lo) / utt.sample_rate;
    const double freq = static_cast<double>(crossings) / (2.0 * seconds);
    CHECK(freq == doctest::Approx(1000.0).epsilon(0.01));
}

TEST_CASE("load_utterance: unsupported formats are rejected") {
    const auto dir = temp_dir();
    const auto bad = dir / "bad.wav";
    write_text(bad, "this is not a wav file at all, padded to look real enough");
    CorpusManifest manifest;
    manifest.base_dir = dir;
    ManifestEntry entry{"u1", "bad.wav", "spk1", Emotion::Happy};
    CHECK_THROWS_AS(load_utterance(manifest, entry), UnsupportedFormatError);

    ManifestEntry missing{"u2", "missing.wav", "spk1", Emotion::Happy};
    CHECK_THROWS_AS(load_utterance(manifest, missing), IoError);
}

TEST_CASE("speaker_gender heuristic") {
    CHECK(speaker_gender("f1") == Gender::Female);
    CHECK(speaker_gender("M03") == Gender::Male);
    CHECK(speaker_gender("spk") == Gender::Unknown);
    CHECK(speaker_gender("") == Gender::Unknown);
}
