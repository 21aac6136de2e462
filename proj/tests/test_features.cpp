#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "emovox/errors.hpp"
#include "emovox/features.hpp"
#include "emovox/rng.hpp"
#include "synth.hpp"

using namespace emovox;

namespace {

constexpr double kFs = 16000.0;
constexpr double kBinHz = kFs / 1024.0; // FFT resolution

std::span<const double> first_frame(const std::vector<double>& samples) {
    return std::span<const double>(samples.data(), 960);
}

Utterance make_utterance(std::vector<double> samples, const std::string& id = "u") {
    Utterance utt;
    utt.utterance_id = id;
    utt.speaker_id = "spk";
    utt.sample_rate = kFs;
    utt.samples = std::move(samples);
    return utt;
}

// index of a statistic within the 331-vector: stream * 5 + stat
enum Stat { kMean = 0, kStd, kMin, kMax, kRange };
double stat_of(const std::vector<double>& v, int stream, Stat s) {
    return v[static_cast<std::size_t>(stream * 5 + s)];
}

} // namespace

TEST_CASE("frame_signal: counts and boundaries") {
    const auto samples = synth::sine(220.0, 1.0, kFs); // 16000 samples
    const auto frames = frame_signal(samples, kFs);
    CHECK(frames.size() == 95); // 1 + (16000-960)/160
    CHECK(frames[0].samples.size() == 960);
    CHECK(frames[1].start == 160);
    CHECK(frames[94].start == 94 * 160);

    const std::vector<double> exactly_one(960, 0.1);
    CHECK(frame_signal(exactly_one, kFs).size() == 1);

    const std::vector<double> too_short(959, 0.1);
    CHECK_THROWS_AS(frame_signal(too_short, kFs), TooShortError);
}

TEST_CASE("detect_voicing: pure sine is voiced with accurate f0") {
    const auto samples = synth::sine(220.0, 0.06, kFs, 0.9);
    const auto v = detect_voicing(first_frame(samples), kFs);
    CHECK(v.voiced);
    CHECK(v.f0_hz == doctest::Approx(220.0).epsilon(2.0 / 220.0));
}

TEST_CASE("detect_voicing: white noise is unvoiced in >=99% of seeded trials") {
    int unvoiced = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto noise = synth::white_noise(960, 0.8, 7000 + static_cast<std::uint64_t>(trial));
        if (!detect_voicing(noise, kFs).voiced) ++unvoiced;
    }
    CHECK(unvoiced >= 990);
}

TEST_CASE("detect_voicing: zero frame is unvoiced; rms gate applies") {
    const std::vector<double> zeros(960, 0.0);
    CHECK_FALSE(detect_voicing(zeros, kFs).voiced);

    const auto quiet = synth::sine(220.0, 0.06, kFs, 0.005);
    CHECK(detect_voicing(first_frame(quiet), kFs).voiced);            // no gate
    CHECK_FALSE(detect_voicing(first_frame(quiet), kFs, 0.5).voiced); // gated
}

TEST_CASE("frame_features: pure 1000 Hz sine has a one-line spectrum") {
    const auto samples = synth::sine(1000.0, 0.06, kFs, 0.9);
    const auto ft = frame_features(first_frame(samples), kFs, 1000.0);
    CHECK(ft.centroid == doctest::Approx(1000.0).epsilon(kBinHz / 1000.0));
    CHECK(ft.spread <= 2.0 * kBinHz);
    CHECK(ft.flatness <= 0.01);
    CHECK(std::abs(ft.roughness) <= 1e-9); // one partial, no pairs
    CHECK(ft.zcr == doctest::Approx(1000.0).epsilon(0.02));
    CHECK(ft.rolloff == doctest::Approx(1000.0).epsilon(2.0 * kBinHz / 1000.0));
}

TEST_CASE("frame_features: zero frame raises DegenerateSpectrumError") {
    const std::vector<double> zeros(960, 0.0);
    CHECK_THROWS_AS(frame_features(zeros, kFs, 100.0), DegenerateSpectrumError);
}

TEST_CASE("frame_features: formants recover the resonator poles within 60 Hz") {
    const std::vector<double> poles = {700.0, 1220.0, 2600.0, 3400.0};
    const std::vector<double> bws = {80.0, 90.0, 120.0, 130.0};
    const auto vowel = synth::resonant_vowel(poles, bws, 100.0, 0.5, kFs);

    // analyze a frame away from the onset transient
    std::span<const double> frame(vowel.data() + 3200, 960);
    const auto ft = frame_features(frame, kFs, 100.0);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(ft.formant_freq[i] == doctest::Approx(poles[i]).epsilon(60.0 / poles[i]));
        CHECK(ft.formant_bw[i] > 0.0);
        CHECK(ft.formant_bw[i] < 400.0);
    }
}

TEST_CASE("append_derivatives: constants, ramps, single frame") {
    const double hop = 0.010;
    auto make_row = [](double v) {
        FrameFeatures ft;
        ft.f0 = v;
        ft.energy = v;
        ft.centroid = v;
        return ft;
    };

    SUBCASE("constant stream -> zero derivatives") {
        std::vector<FrameFeatures> seq(5, make_row(3.0));
        const auto rows = append_derivatives(seq, hop);
        REQUIRE(rows.size() == 5);
        for (const auto& row : rows) {
            for (int j = kFrameFeatureCount; j < kStreamCount; ++j) {
                CHECK(row[static_cast<std::size_t>(j)] == 0.0);
            }
        }
    }

    SUBCASE("linear ramp -> slope at interior points") {
        const double a = 7.0;
        std::vector<FrameFeatures> seq;
        for (int t = 0; t < 6; ++t) seq.push_back(make_row(a * t * hop));
        const auto rows = append_derivatives(seq, hop);
        for (std::size_t t = 1; t + 1 < rows.size(); ++t) {
            CHECK(rows[t][kFrameFeatureCount] == doctest::Approx(a).epsilon(1e-12));
        }
        // one-sided ends equal the same slope on a line
        CHECK(rows.front()[kFrameFeatureCount] == doctest::Approx(a).epsilon(1e-12));
        CHECK(rows.back()[kFrameFeatureCount] == doctest::Approx(a).epsilon(1e-12));
    }

    SUBCASE("single frame -> zero derivative row") {
        std::vector<FrameFeatures> seq(1, make_row(2.0));
        const auto rows = append_derivatives(seq, hop);
        REQUIRE(rows.size() == 1);
        for (int j = kFrameFeatureCount; j < kStreamCount; ++j) {
            CHECK(rows[0][static_cast<std::size_t>(j)] == 0.0);
        }
    }
}

TEST_CASE("aggregate_statistics: hand-computed cases") {
    std::array<double, kStreamCount> row1{}, row2{};
    row1.fill(1.0);
    row2.fill(3.0);

    SUBCASE("single row") {
        const auto out = aggregate_statistics({row1});
        REQUIRE(out.size() == 330);
        for (int s = 0; s < kStreamCount; ++s) {
            CHECK(stat_of(out, s, kMean) == 1.0);
            CHECK(stat_of(out, s, kStd) == 0.0);
            CHECK(stat_of(out, s, kMin) == 1.0);
            CHECK(stat_of(out, s, kMax) == 1.0);
            CHECK(stat_of(out, s, kRange) == 0.0);
        }
    }

    SUBCASE("values {1,3}: mean 2, population std 1, range 2") {
        const auto out = aggregate_statistics({row1, row2});
        CHECK(stat_of(out, 0, kMean) == 2.0);
        CHECK(stat_of(out, 0, kStd) == 1.0);
        CHECK(stat_of(out, 0, kMin) == 1.0);
        CHECK(stat_of(out, 0, kMax) == 3.0);
        CHECK(stat_of(out, 0, kRange) == 2.0);
    }

    SUBCASE("66 streams -> 330 outputs") {
        CHECK(aggregate_statistics({row1}).size() == 330);
    }
}

TEST_CASE("speaking_rate: silence, bursts, continuous tone") {
    SUBCASE("all-zero audio -> 0") {
        const std::vector<double> zeros(19200, 0.0);
        CHECK(speaking_rate(zeros, kFs) == 0.0);
    }

    SUBCASE("4 bursts of 100 ms separated by 200 ms over 1.2 s -> 4/1.2") {
        std::vector<double> samples(static_cast<std::size_t>(1.2 * kFs), 0.0);
        const auto tone = synth::sine(200.0, 1.2, kFs, 0.8);
        for (int b = 0; b < 4; ++b) {
            const auto start = static_cast<std::size_t>(b * 0.3 * kFs);
            const auto len = static_cast<std::size_t>(0.1 * kFs);
            for (std::size_t i = 0; i < len; ++i) samples[start + i] = tone[start + i];
        }
        CHECK(speaking_rate(samples, kFs) == doctest::Approx(4.0 / 1.2).epsilon(1e-9));
    }

    SUBCASE("single continuous 1 s tone -> 1.0") {
        const auto tone = synth::sine(200.0, 1.0, kFs, 0.8);
        CHECK(speaking_rate(tone, kFs) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("extract_feature_vector: dimension, determinism, silence") {
    const auto utt = make_utterance(synth::harmonic_tone(180.0, 1.0, kFs, 0.8, 0.01,
                                                         5.0, 99, 0.8));
    const auto fv = extract_feature_vector(utt);
    REQUIRE(fv.values.size() == kFeatureDim);
    for (double v : fv.values) CHECK(std::isfinite(v));

    const auto fv2 = extract_feature_vector(utt);
    CHECK(fv.values == fv2.values); // bit-identical

    const auto silent = make_utterance(std::vector<double>(16000, 0.0));
    CHECK_THROWS_AS(extract_feature_vector(silent), NoVoicedFramesError);
}

TEST_CASE("statistic blocks satisfy min <= mean <= max and range = max-min") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto utt = make_utterance(synth::harmonic_tone(
            120.0 + 40.0 * static_cast<double>(seed), 1.0, kFs, 1.0, 0.02, 5.0, seed, 0.7));
        const auto fv = extract_feature_vector(utt);
        for (int s = 0; s < kStreamCount; ++s) {
            const double mean = stat_of(fv.values, s, kMean);
            const double lo = stat_of(fv.values, s, kMin);
            const double hi = stat_of(fv.values, s, kMax);
            CHECK(lo <= mean + 1e-12);
            CHECK(mean <= hi + 1e-12);
            CHECK(stat_of(fv.values, s, kRange) == doctest::Approx(hi - lo).epsilon(1e-12));
            CHECK(stat_of(fv.values, s, kStd) >= 0.0);
        }
    }
}

TEST_CASE("amplitude-invariant streams are unchanged when the waveform is halved") {
    auto samples = synth::harmonic_tone(200.0, 1.0, kFs, 1.0, 0.01, 5.0, 31, 0.8);
    const auto fv_full = extract_feature_vector(make_utterance(samples));
    for (double& v : samples) v *= 0.5;
    const auto fv_half = extract_feature_vector(make_utterance(samples));

    // f0, zcr, centroid, rolloff, brightness, flatness streams (all 5 stats)
    const int invariant_streams[] = {0, 22, 23, 24, 25, 30};
    for (int s : invariant_streams) {
        for (int stat = 0; stat < 5; ++stat) {
            const double a = fv_full.values[static_cast<std::size_t>(s * 5 + stat)];
            const double b = fv_half.values[static_cast<std::size_t>(s * 5 + stat)];
            CHECK(std::abs(a - b) <= 1e-6 * std::max({std::abs(a), std::abs(b), 1.0}));
        }
    }
}

TEST_CASE("pure-tone oracle: mean f0 within 2 Hz, mean centroid within one bin") {
    for (double freq : {150.0, 220.0, 440.0}) {
        const auto fv = extract_feature_vector(make_utterance(synth::sine(freq, 1.0, kFs, 0.8)));
        CHECK(stat_of(fv.values, 0, kMean) == doctest::Approx(freq).epsilon(2.0 / freq));
        CHECK(stat_of(fv.values, 25, kMean) == doctest::Approx(freq).epsilon(kBinHz / freq));
    }
}

TEST_CASE("prepending one hop of silence barely moves voiced statistics") {
    const auto base = synth::sine(220.0, 1.0, kFs, 0.8);
    const auto fv1 = extract_feature_vector(make_utterance(base));
    std::vector<double> shifted(160, 0.0);
    shifted.insert(shifted.end(), base.begin(), base.end());
    const auto fv2 = extract_feature_vector(make_utterance(shifted));

    CHECK(std::abs(stat_of(fv1.values, 0, kMean) - stat_of(fv2.values, 0, kMean)) <= 1.0);
    CHECK(std::abs(stat_of(fv1.values, 25, kMean) - stat_of(fv2.values, 25, kMean)) <= kBinHz);
    const double e1 = stat_of(fv1.values, 1, kMean);
    const double e2 = stat_of(fv2.values, 1, kMean);
    CHECK(std::abs(e1 - e2) <= 0.05 * std::abs(e1));
}

TEST_CASE("feature_names: 331 unique names, documented order") {
    const auto& names = feature_names();
    REQUIRE(names.size() == kFeatureDim);
    CHECK(names.front() == "f0_mean");
    CHECK(names[1] == "f0_std");
    CHECK(names[5] == "energy_mean");
    CHECK(names[33 * 5] == "d_f0_mean"); // derivative block starts at stream 33
    CHECK(names.back() == "speaking_rate");
    std::set<std::string> unique(names.begin(), names.end());
    CHECK(unique.size() == names.size());
}

TEST_CASE("feature order doc matches feature_names()") {
    const std::filesystem::path doc =
        std::filesystem::path(EMOVOX_SOURCE_DIR) / "docs" / "feature_order.md";
    REQUIRE(std::filesystem::exists(doc));
    std::ifstream in(doc);
    std::string line;
    std::vector<std::string> documented;
    while (std::getline(in, line)) {
        // table rows look like: | 1 | f0_mean |
        if (line.size() > 2 && line[0] == '|' && std::isdigit(line[2])) {
            const auto second = line.find('|', 1);
            const auto third = line.find('|', second + 1);
            if (second != std::string::npos && third != std::string::npos) {
                std::string name = line.substr(second + 1, third - second - 1);
                name.erase(0, name.find_first_not_of(' '));
                name.erase(name.find_last_not_of(' ') + 1);
                documented.push_back(name);
            }
        }
    }
    CHECK(documented == feature_names());
}

TEST_CASE("feature cache round-trips bitwise and deterministically") {
    const auto dir = std::filesystem::temp_directory_path() / "emovox_feature_tests";
    std::filesystem::create_directories(dir);
    const auto path1 = dir / "cache1.csv";
    const auto path2 = dir / "cache2.csv";

    FeatureTable table;
    Rng rng(5);
    for (int i = 0; i < 3; ++i) {
        FeatureRecord rec;
        rec.utterance_id = "u" + std::to_string(i);
        rec.speaker_id = i % 2 ? "f1" : "m1";
        rec.emotion = all_emotions()[static_cast<std::size_t>(i)];
        for (int j = 0; j < kFeatureDim; ++j) {
            rec.values.push_back(rng.next_gaussian() * 1e3);
        }
        table.push_back(rec);
    }
    write_feature_cache(table, path1);
    const auto reloaded = read_feature_cache(path1);
    REQUIRE(reloaded.size() == table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(reloaded[i].utterance_id == table[i].utterance_id);
        CHECK(reloaded[i].values == table[i].values); // bit-exact doubles
    }
    write_feature_cache(reloaded, path2);
    std::ifstream a(path1, std::ios::binary), b(path2, std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}
