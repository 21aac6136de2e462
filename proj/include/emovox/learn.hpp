#ifndef EMOVOX_LEARN_HPP
#define EMOVOX_LEARN_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "emovox/features.hpp"

namespace emovox {

// ---- speaker z-score normalization ----

struct SpeakerStats {
    std::string speaker_id;
    std::vector<double> mean;
    std::vector<double> std; // floored at kStdFloor
};

inline constexpr double kStdFloor = 1e-8;

// Per-speaker per-feature mean and population std over that speaker's
// vectors only.
std::map<std::string, SpeakerStats> fit_speaker_stats(const FeatureTable& table);

std::vector<double> zscore_apply(const std::vector<double>& x, const SpeakerStats& stats);

// ---- SMOTE ----

// Synthetic minority samples: s = x + u * (nn - x) with u ~ Uniform[0,1) and
// nn a seeded-random pick among x's k nearest minority neighbors (Euclidean,
// k clamped to |minority|-1). Base points are cycled in order. Throws
// TooFewSamplesError when |minority| < 2.
std::vector<std::vector<double>> smote_oversample(
    const std::vector<std::vector<double>>& minority, int k, int n_synthetic,
    std::uint64_t seed);

// ---- binary SVM (SMO) ----

enum class KernelType { Rbf, Linear };

struct SvmTrainConfig {
    double C = 1.0;
    double gamma = 1.0; // RBF only
    KernelType kernel = KernelType::Rbf;
    double tol = 1e-3;      // KKT tolerance
    int max_epochs = 2000;  // outer SMO passes before NotConvergedError
    std::uint64_t seed = 0; // second-choice scan shuffling
};

struct BinarySvmModel {
    KernelType kernel = KernelType::Rbf;
    double gamma = 1.0;
    double C = 1.0;
    double bias = 0.0;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> dual_coeffs; // alpha_i * y_i
    double platt_a = -1.0;
    double platt_b = 0.0;
};

struct SvmDiagnostics {
    int epochs = 0;
    long take_steps = 0;
    double max_kkt_violation = 0.0;
    double dual_objective = 0.0;
    std::vector<double> alpha; // full vector, pre-pruning
    bool platt_fallback = false;
};

// Solves the soft-margin dual with sequential minimal optimization. Vectors
// with |alpha| <= 1e-10 are dropped from the model. Platt parameters are left
// at their defaults; use fit_platt afterwards.
BinarySvmModel train_binary_svm(const std::vector<std::vector<double>>& X,
                                const std::vector<int>& y, // +1 / -1
                                const SvmTrainConfig& cfg,
                                SvmDiagnostics* diagnostics = nullptr);

// f(x) = sum_i dual_coeff_i * K(x, sv_i) + bias
double svm_decision(const BinarySvmModel& model, std::span<const double> x);

// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij for a
// full alpha vector (diagnostics / oracle comparisons).
double svm_dual_objective(const std::vector<std::vector<double>>& X,
                          const std::vector<int>& y,
                          const std::vector<double>& alpha,
                          const SvmTrainConfig& cfg);

// ---- Platt calibration ----

struct PlattResult {
    double a = -1.0;
    double b = 0.0;
    bool fallback = false; // degenerate fit, defaults returned
};

// Logistic parameters minimizing the cross-entropy of p = 1/(1+exp(a*f+b))
// via damped Newton (at most 100 iterations). Falls back to (-1, 0) when the
// fit is degenerate or non-monotone (a >= 0).
PlattResult fit_platt(const std::vector<double>& decisions, const std::vector<int>& labels);

double platt_probability(double decision, double a, double b);

// ---- SVM-RFE ----

struct FeatureSelection {
    std::vector<int> selected;          // ascending index order, size target_k
    std::vector<int> elimination_order; // weakest first, survivors last
};

// Recursive feature elimination with a linear-kernel SVM and Guyon's w_j^2
// ranking; eliminates ceil(step * remaining) per round (never crossing
// target_k). Ties break toward the lower feature index.
FeatureSelection svm_rfe(const std::vector<std::vector<double>>& X,
                         const std::vector<int>& y, int target_k, double step,
                         double C, std::uint64_t seed);

// Shared selection for one-against-all ensembles: per round, the w_j^2
// scores of the per-class binary problems are summed.
FeatureSelection svm_rfe_multiclass(
    const std::vector<const std::vector<std::vector<double>>*>& class_X,
    const std::vector<const std::vector<int>*>& class_y, int target_k,
    double step, double C, std::uint64_t seed);

} // namespace emovox

#endif
