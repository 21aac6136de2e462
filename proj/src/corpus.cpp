#include "emovox/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "emovox/csv.hpp"
#include "emovox/errors.hpp"
#include "emovox/wav.hpp"

namespace emovox {

namespace {
const std::vector<std::string> kManifestHeader = {"utterance_id", "wav_path",
                                                  "speaker_id", "emotion"};
}

std::vector<std::string> CorpusManifest::speakers() const {
    std::set<std::string> s;
    for (const auto& e : entries) s.insert(e.speaker_id);
    return {s.begin(), s.end()};
}

std::filesystem::path CorpusManifest::resolve_path(const ManifestEntry& entry) const {
    std::filesystem::path p(entry.wav_path);
    if (p.is_absolute()) return p;
    return base_dir / p;
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
    csv::Table table = csv::read_file(path);
    if (table.header != kManifestHeader) {
        throw FormatError("bad manifest header in " + path.string() +
                          "; expected utterance_id,wav_path,speaker_id,emotion");
    }

    CorpusManifest manifest;
    manifest.base_dir = path.has_parent_path() ? path.parent_path()
                                               : std::filesystem::path(".");
    std::set<std::string> seen_ids;
    std::size_t row_no = 1; // header is row 1
    for (const auto& row : table.rows) {
        ++row_no;
        ManifestEntry entry;
        entry.utterance_id = row[0];
        entry.wav_path = row[1];
        entry.speaker_id = row[2];
        if (entry.utterance_id.empty() || entry.wav_path.empty() || entry.speaker_id.empty()) {
            std::ostringstream msg;
            msg << path.string() << ": row " << row_no << " has an empty field";
            throw ValidationError(msg.str());
        }
        auto emotion = parse_emotion(row[3]);
        if (!emotion) {
            std::ostringstream msg;
            msg << path.string() << ": row " << row_no << " has unknown emotion '" << row[3] << "'";
            throw ValidationError(msg.str());
        }
        entry.emotion = *emotion;
        if (!seen_ids.insert(entry.utterance_id).second) {
            std::ostringstream msg;
            msg << path.string() << ": row " << row_no << " duplicates utterance_id '"
                << entry.utterance_id << "'";
            throw ValidationError(msg.str());
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    out << csv::join_row(kManifestHeader) << "\n";
    for (const auto& e : manifest.entries) {
        out << csv::join_row({e.utterance_id, e.wav_path, e.speaker_id,
                              std::string(to_string(e.emotion))})
            << "\n";
    }
    if (!out) throw IoError("short write: " + path.string());
}

Utterance load_utterance(const CorpusManifest& manifest, const ManifestEntry& entry,
                         double target_rate) {
    const auto wav_path = manifest.resolve_path(entry);
    wav::WavData data = wav::read_wav(wav_path);
    std::vector<double> mono = wav::mix_to_mono(data);
    if (mono.empty()) throw UnsupportedFormatError("empty audio: " + wav_path.string());
    if (data.sample_rate != target_rate) {
        mono = wav::resample_sinc(mono, data.sample_rate, target_rate);
    }

    Utterance utt;
    utt.utterance_id = entry.utterance_id;
    utt.speaker_id = entry.speaker_id;
    utt.emotion = entry.emotion;
    utt.sample_rate = target_rate;
    utt.samples = std::move(mono);
    return utt;
}

Gender speaker_gender(const std::string& speaker_id) {
    if (speaker_id.empty()) return Gender::Unknown;
    char c = speaker_id[0];
    if (c == 'f' || c == 'F') return Gender::Female;
    if (c == 'm' || c == 'M') return Gender::Male;
    return Gender::Unknown;
}

std::string_view to_string(Gender g) {
    switch (g) {
        case Gender::Female: return "female";
        case Gender::Male: return "male";
        case Gender::Unknown: return "unknown";
    }
    return "?";
}

} // namespace emovox
