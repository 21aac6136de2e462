#ifndef EMOVOX_FUSION_HPP
#define EMOVOX_FUSION_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emovox/labels.hpp"
#include "emovox/learn.hpp"

namespace emovox {

// Classification target: the six emotions, arousal (APN) or valence (PNN).
// Class lists are in canonical (alphabetical) order.
struct Taxonomy {
    std::string name;                 // emotion6 | apn | pnn
    std::vector<std::string> classes; // ordered label list

    int class_of(Emotion e) const;

    static Taxonomy emotion6();
    static Taxonomy apn();
    static Taxonomy pnn();
    static Taxonomy by_name(const std::string& name); // throws ValidationError
};

enum class SmotePolicy { None, MatchMajority };
enum class NormPolicy { SpeakerSelf, TrainGlobal, None };

std::string_view to_string(SmotePolicy p);
std::string_view to_string(NormPolicy p);
std::optional<SmotePolicy> parse_smote_policy(std::string_view s);
std::optional<NormPolicy> parse_norm_policy(std::string_view s);

struct EnsembleConfig {
    double C = 1.0;
    std::optional<double> gamma;         // nullopt: 1 / (dims * Var(X))
    double tol = 1e-3;
    int rfe_target_k = 100;
    double rfe_step = 0.10;
    int smote_k = 5;
    SmotePolicy smote_policy = SmotePolicy::MatchMajority;
    NormPolicy norm_policy = NormPolicy::SpeakerSelf;
    double default_threshold = 0.0;
    std::vector<double> coverage_grid = {0.5, 0.8, 1.0};
    std::uint64_t seed = 42;
    int max_epochs = 2000;
};

struct ClassificationResult {
    std::string utterance_id;
    std::vector<double> confidences; // per class, in [0,1]
    int predicted = 0;               // argmax, ties to the lowest class index
    double max_confidence = 0.0;
    bool rejected = false;
};

struct OaaEnsemble {
    Taxonomy taxonomy;
    std::vector<BinarySvmModel> models; // one per class, shared selection
    FeatureSelection selection;
    int input_dim = 0;
    NormPolicy norm_policy = NormPolicy::SpeakerSelf;
    double default_threshold = 0.0;
    // thresholds calibrated on training-set confidences, one per coverage
    std::vector<std::pair<double, double>> coverage_thresholds;
    std::uint64_t seed = 0;
};

// Trains one binary RBF SVM per taxonomy class (positive class SMOTE-balanced
// per config), with a selection shared across classes and per-class Platt
// calibration on the real (non-synthetic) training vectors.
OaaEnsemble train_oaa_ensemble(const std::vector<std::vector<double>>& X,
                               const std::vector<int>& class_ids,
                               const Taxonomy& taxonomy,
                               const EnsembleConfig& cfg);

// Highest-confidence fusion; never rejects.
ClassificationResult classify(const OaaEnsemble& ensemble, std::span<const double> x);

// As classify, but flags rejected = (max_confidence < threshold). The argmax
// prediction is still reported for diagnostics.
ClassificationResult classify_with_rejection(const OaaEnsemble& ensemble,
                                             std::span<const double> x,
                                             double threshold);

// Threshold admitting ceil(coverage * n) of the given confidences: the
// k-th largest value, so that {c : c >= threshold} has size >= k.
double calibrate_threshold(const std::vector<double>& max_confidences,
                           double target_coverage);

// Versioned JSON model file; doubles round-trip bit exactly.
void save_ensemble(const OaaEnsemble& ensemble, const std::filesystem::path& path);
OaaEnsemble load_ensemble(const std::filesystem::path& path);

// Classification output CSV:
// utterance_id,taxonomy,predicted,max_confidence,rejected,conf_<class>...
std::string classification_csv_header(const Taxonomy& taxonomy);
std::string classification_csv_row(const Taxonomy& taxonomy,
                                   const ClassificationResult& result);

} // namespace emovox

#endif
