#ifndef EMOVOX_CORPUS_HPP
#define EMOVOX_CORPUS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "emovox/labels.hpp"

namespace emovox {

// All audio is resampled to this rate on load; the feature extraction
// parameters (frame sizes, mel bank, LPC order) assume it.
inline constexpr double kPipelineSampleRate = 16000.0;

struct Utterance {
    std::string utterance_id;
    std::string speaker_id;
    std::vector<double> samples; // mono, amplitudes in [-1, 1]
    double sample_rate = kPipelineSampleRate;
    Emotion emotion = Emotion::Neutral;

    double duration_seconds() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

struct ManifestEntry {
    std::string utterance_id;
    std::string wav_path; // as written in the manifest (relative to its directory)
    std::string speaker_id;
    Emotion emotion = Emotion::Neutral;
};

struct CorpusManifest {
    std::vector<ManifestEntry> entries;
    std::filesystem::path base_dir; // directory of the manifest file

    // Distinct speaker ids in sorted order.
    std::vector<std::string> speakers() const;
    std::filesystem::path resolve_path(const ManifestEntry& entry) const;
};

// Manifest CSV, header exactly: utterance_id,wav_path,speaker_id,emotion
CorpusManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

// Loads, mixes to mono, scales to [-1,1] and resamples to `target_rate`.
Utterance load_utterance(const CorpusManifest& manifest, const ManifestEntry& entry,
                         double target_rate = kPipelineSampleRate);

// Speaker gender convention: speaker ids starting with 'f'/'F' are female,
// 'm'/'M' male, anything else unknown. Used only for report breakdowns.
enum class Gender { Female, Male, Unknown };
Gender speaker_gender(const std::string& speaker_id);
std::string_view to_string(Gender g);

} // namespace emovox

#endif
