#ifndef EMOVOX_CONFIG_HPP
#define EMOVOX_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emovox/fusion.hpp"

namespace emovox {

// Experiment configuration; every hyperparameter the reference experiments
// leave open lives here. Serializes to a flat key = value file.
struct RunConfig {
    std::string taxonomy = "emotion6"; // emotion6 | apn | pnn | all
    double svm_c = 1.0;
    std::optional<double> gamma;       // empty -> "scale": 1/(dims * Var(X))
    double svm_tol = 1e-3;
    int max_epochs = 2000;
    int rfe_target_k = 100;
    double rfe_step = 0.10;
    int smote_k = 5;
    SmotePolicy smote_policy = SmotePolicy::MatchMajority;
    NormPolicy norm_policy = NormPolicy::SpeakerSelf;
    std::vector<double> coverage = {0.5, 0.8, 1.0};
    double threshold = 0.0; // default rejection threshold for classify
    std::uint64_t seed = 42;
    int jobs = 0; // 0 = hardware concurrency

    EnsembleConfig ensemble_config() const;
    int effective_jobs() const;

    static RunConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
    std::string serialize() const;
};

} // namespace emovox

#endif
