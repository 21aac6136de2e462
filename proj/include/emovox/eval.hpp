#ifndef EMOVOX_EVAL_HPP
#define EMOVOX_EVAL_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emovox/corpus.hpp"
#include "emovox/features.hpp"
#include "emovox/fusion.hpp"

namespace emovox {

// ---- leave-one-subject-out split ----

struct LosoFold {
    std::string test_speaker;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

// One fold per speaker, ordered by speaker id. Throws TooFewSpeakersError
// when fewer than two speakers are present.
std::vector<LosoFold> loso_split(const CorpusManifest& manifest);
std::vector<LosoFold> loso_split(const FeatureTable& table);

// ---- metrics ----

struct ConfusionMatrix {
    std::vector<std::vector<std::size_t>> counts; // truth x predicted
    std::vector<std::vector<double>> percent;     // rows sum to 100 (or 0)
    std::vector<bool> empty_rows;                 // truth classes never seen
};

// entry (i,j) = 100 * count(truth=i, pred=j) / count(truth=i).
// Throws LengthMismatchError when the sequences differ in length.
ConfusionMatrix confusion_matrix(const std::vector<int>& truths,
                                 const std::vector<int>& predictions,
                                 std::size_t n_classes);

struct ScoredResult {
    double max_confidence = 0.0;
    bool correct = false;
};

struct CoveragePoint {
    double coverage_target = 1.0;
    double realized_coverage = 1.0;
    double threshold = 0.0;
    double accuracy_classified = 0.0;
    std::optional<double> accuracy_rejected;
    std::size_t n_classified = 0;
    std::size_t n_rejected = 0;
};

// For each coverage: calibrate a threshold on the results themselves, split,
// and compute accuracy on both sides.
std::vector<CoveragePoint> coverage_accuracy(const std::vector<ScoredResult>& results,
                                             const std::vector<double>& coverages);

// ---- LOSO evaluation ----

struct FoldSummary {
    std::string speaker;
    std::size_t n = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    std::vector<double> thresholds; // per coverage-grid entry
};

struct UtteranceOutcome {
    std::string utterance_id;
    std::string speaker_id;
    int fold = 0;
    int truth = 0;
    int predicted = 0;
    double max_confidence = 0.0;
};

struct EvaluationReport {
    std::string taxonomy_name;
    std::vector<std::string> classes;
    std::vector<double> coverage_grid;
    std::vector<FoldSummary> folds;
    std::size_t total = 0;
    std::size_t correct = 0;
    double overall_accuracy = 0.0; // micro, utterance weighted
    double macro_accuracy = 0.0;   // mean of fold accuracies
    std::optional<double> accuracy_female_speakers;
    std::optional<double> accuracy_male_speakers;
    ConfusionMatrix confusion;
    std::vector<CoveragePoint> coverage; // thresholds averaged over folds
    std::vector<UtteranceOutcome> outcomes;
};

// Full LOSO protocol over a feature table: per fold, z-normalize train
// speakers with their own stats, normalize the test speaker per config
// policy, train the OAA ensemble on training folds only and classify the
// held-out speaker. Coverage thresholds come from the training-fold
// confidences. Per-fold seeds derive from cfg.seed and the speaker id, so
// results do not depend on `jobs`.
EvaluationReport run_loso(const FeatureTable& table, const Taxonomy& taxonomy,
                          const EnsembleConfig& cfg, int jobs = 1);

// ---- human annotations ----

struct AnnotationRow {
    std::string worker_id;
    std::string utterance_id;
    Emotion emotion_response = Emotion::Neutral;
    Arousal apn_response = Arousal::Neutral;
    Valence pnn_response = Valence::Neutral;
    bool confident = false;
    std::string worker_gender; // "female", "male" or empty
    std::optional<int> worker_age;
};

struct AnnotationSet {
    std::vector<AnnotationRow> rows;
    bool has_demographics = false;
};

// CSV header:
// worker_id,utterance_id,emotion_response,apn_response,pnn_response,confidence_flag[,worker_gender,worker_age]
AnnotationSet import_human_annotations(const std::filesystem::path& path,
                                       const CorpusManifest& manifest);

struct SplitAccuracy {
    std::size_t n = 0;
    std::size_t correct = 0;
    double accuracy() const;
    double prevalence = 0.0; // share of the group's rows
};

struct HumanGroupReport {
    std::string group; // all | female | male (worker gender)
    std::size_t n = 0;
    std::size_t correct = 0;
    double accuracy() const;
    std::optional<double> accuracy_female_speakers;
    std::optional<double> accuracy_male_speakers;
    SplitAccuracy confident;
    SplitAccuracy unsure;
};

struct HumanReport {
    std::string taxonomy_name;
    std::vector<std::string> classes;
    HumanGroupReport all;
    std::optional<HumanGroupReport> female_workers;
    std::optional<HumanGroupReport> male_workers;
    ConfusionMatrix confusion;
    // sample counts by worker gender and age bucket, emitted only when the
    // demographic columns are present
    std::map<std::string, std::map<std::string, std::size_t>> counts_by_gender_age;
};

HumanReport human_report(const AnnotationSet& annotations, const CorpusManifest& manifest,
                         const Taxonomy& taxonomy);

// ---- rendering ----

std::string render_system_report_text(const EvaluationReport& report);
std::string render_human_report_text(const HumanReport& report);
nlohmann::ordered_json system_report_json(const EvaluationReport& report);
nlohmann::ordered_json human_report_json(const HumanReport& report);

} // namespace emovox

#endif
