#include <algorithm>
#include <cmath>
#include <numeric>

#include "emovox/errors.hpp"
#include "emovox/learn.hpp"
#include "emovox/rng.hpp"

namespace emovox {

std::map<std::string, SpeakerStats> fit_speaker_stats(const FeatureTable& table) {
    std::map<std::string, std::vector<const FeatureRecord*>> by_speaker;
    for (const auto& rec : table) by_speaker[rec.speaker_id].push_back(&rec);

    std::map<std::string, SpeakerStats> out;
    for (const auto& [speaker, recs] : by_speaker) {
        const std::size_t dim = recs.front()->values.size();
        SpeakerStats stats;
        stats.speaker_id = speaker;
        stats.mean.assign(dim, 0.0);
        stats.std.assign(dim, 0.0);
        const double n = static_cast<double>(recs.size());
        for (const auto* rec : recs) {
            if (rec->values.size() != dim) {
                throw DimensionMismatchError("fit_speaker_stats: ragged features for speaker " +
                                             speaker);
            }
            for (std::size_t j = 0; j < dim; ++j) stats.mean[j] += rec->values[j];
        }
        for (std::size_t j = 0; j < dim; ++j) stats.mean[j] /= n;
        for (const auto* rec : recs) {
            for (std::size_t j = 0; j < dim; ++j) {
                const double d = rec->values[j] - stats.mean[j];
                stats.std[j] += d * d;
            }
        }
        for (std::size_t j = 0; j < dim; ++j) {
            stats.std[j] = std::max(std::sqrt(stats.std[j] / n), kStdFloor);
        }
        out.emplace(speaker, std::move(stats));
    }
    return out;
}

std::vector<double> zscore_apply(const std::vector<double>& x, const SpeakerStats& stats) {
    if (x.size() != stats.mean.size()) {
        throw DimensionMismatchError("zscore_apply: vector/stats dimension mismatch");
    }
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] = (x[j] - stats.mean[j]) / stats.std[j];
    }
    return out;
}

std::vector<std::vector<double>> smote_oversample(
    const std::vector<std::vector<double>>& minority, int k, int n_synthetic,
    std::uint64_t seed) {
    const std::size_t m = minority.size();
    if (m < 2) throw TooFewSamplesError("smote_oversample: need at least 2 minority samples");
    if (k < 1) throw ValidationError("smote_oversample: k must be >= 1");
    if (n_synthetic <= 0) return {};
    const std::size_t dim = minority[0].size();
    for (const auto& v : minority) {
        if (v.size() != dim) throw DimensionMismatchError("smote_oversample: ragged input");
    }
    const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), m - 1);

    // neighbor lists (ties break toward the lower index)
    std::vector<std::vector<std::size_t>> neighbors(m);
    std::vector<std::pair<double, std::size_t>> dists;
    for (std::size_t i = 0; i < m; ++i) {
        dists.clear();
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            double d2 = 0.0;
            for (std::size_t f = 0; f < dim; ++f) {
                const double d = minority[i][f] - minority[j][f];
                d2 += d * d;
            }
            dists.emplace_back(d2, j);
        }
        std::sort(dists.begin(), dists.end());
        neighbors[i].reserve(k_eff);
        for (std::size_t t = 0; t < k_eff; ++t) neighbors[i].push_back(dists[t].second);
    }

    Rng rng(derive_seed(seed, "smote"));
    std::vector<std::vector<double>> synthetic;
    synthetic.reserve(static_cast<std::size_t>(n_synthetic));
    for (int s = 0; s < n_synthetic; ++s) {
        const std::size_t base = static_cast<std::size_t>(s) % m;
        const std::size_t nn = neighbors[base][rng.next_index(k_eff)];
        const double u = rng.next_double();
        std::vector<double> v(dim);
        for (std::size_t f = 0; f < dim; ++f) {
            v[f] = minority[base][f] + u * (minority[nn][f] - minority[base][f]);
        }
        synthetic.push_back(std::move(v));
    }
    return synthetic;
}

double platt_probability(double decision, double a, double b) {
    const double z = a * decision + b;
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

PlattResult fit_platt(const std::vector<double>& decisions, const std::vector<int>& labels) {
    if (decisions.size() != labels.size()) {
        throw LengthMismatchError("fit_platt: |decisions| != |labels|");
    }
    if (decisions.empty()) throw EmptyInputError("fit_platt: empty input");
    bool has_pos = false, has_neg = false;
    for (int y : labels) {
        if (y == 1) has_pos = true;
        else if (y == -1) has_neg = true;
        else throw ValidationError("fit_platt: labels must be +1/-1");
    }
    if (!has_pos || !has_neg) throw ValidationError("fit_platt: both classes required");

    const std::size_t n = decisions.size();
    auto objective = [&](double a, double b) {
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = a * decisions[i] + b;
            // -log p for positives, -log(1-p) for negatives, stable form
            if (labels[i] == 1) {
                obj += z >= 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            } else {
                obj += z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
            }
        }
        return obj;
    };

    double a = 0.0, b = 0.0;
    double fval = objective(a, b);
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
        double g_a = 0.0, g_b = 0.0;
        double h_aa = 1e-12, h_ab = 0.0, h_bb = 1e-12;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = platt_probability(decisions[i], a, b);
            const double t = labels[i] == 1 ? 1.0 : 0.0;
            const double d = t - p; // dF/dz
            g_a += d * decisions[i];
            g_b += d;
            const double w = p * (1.0 - p);
            h_aa += w * decisions[i] * decisions[i];
            h_ab += w * decisions[i];
            h_bb += w;
        }
        if (std::abs(g_a) < 1e-10 && std::abs(g_b) < 1e-10) {
            converged = true;
            break;
        }
        const double det = h_aa * h_bb - h_ab * h_ab;
        if (det <= 0.0 || !std::isfinite(det)) break;
        const double da = -(h_bb * g_a - h_ab * g_b) / det;
        const double db = -(h_aa * g_b - h_ab * g_a) / det;

        double step = 1.0;
        bool improved = false;
        while (step >= 1e-10) {
            const double trial = objective(a + step * da, b + step * db);
            if (trial < fval - 1e-14 || (trial <= fval && step == 1.0)) {
                a += step * da;
                b += step * db;
                fval = trial;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            converged = true; // cannot make progress; treat as done
            break;
        }
    }
    (void)converged;

    PlattResult result;
    if (!std::isfinite(a) || !std::isfinite(b) || a >= 0.0) {
        result.a = -1.0;
        result.b = 0.0;
        result.fallback = true;
    } else {
        result.a = a;
        result.b = b;
    }
    return result;
}

namespace {

std::vector<std::vector<double>> restrict_columns(
    const std::vector<std::vector<double>>& X, const std::vector<int>& columns) {
    std::vector<std::vector<double>> out(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        out[i].reserve(columns.size());
        for (int c : columns) out[i].push_back(X[i][static_cast<std::size_t>(c)]);
    }
    return out;
}

// w_j^2 scores of one linear binary SVM over the given columns.
std::vector<double> linear_svm_scores(const std::vector<std::vector<double>>& X_sub,
                                      const std::vector<int>& y, double C,
                                      std::uint64_t seed) {
    SvmTrainConfig cfg;
    cfg.C = C;
    cfg.kernel = KernelType::Linear;
    cfg.tol = 1e-3;
    cfg.seed = seed;
    const BinarySvmModel model = train_binary_svm(X_sub, y, cfg);

    const std::size_t dim = X_sub[0].size();
    std::vector<double> w(dim, 0.0);
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            w[j] += model.dual_coeffs[i] * model.support_vectors[i][j];
        }
    }
    for (double& v : w) v *= v;
    return w;
}

} // namespace

FeatureSelection svm_rfe_multiclass(
    const std::vector<const std::vector<std::vector<double>>*>& class_X,
    const std::vector<const std::vector<int>*>& class_y, int target_k,
    double step, double C, std::uint64_t seed) {
    if (class_X.empty() || class_X.size() != class_y.size()) {
        throw ValidationError("svm_rfe: class problem lists are empty or mismatched");
    }
    if (step <= 0.0 || step > 1.0) throw ValidationError("svm_rfe: step must be in (0,1]");
    const int total = static_cast<int>(class_X[0]->at(0).size());
    if (target_k < 1 || target_k > total) {
        throw ValidationError("svm_rfe: target_k out of range");
    }

    std::vector<int> remaining(static_cast<std::size_t>(total));
    std::iota(remaining.begin(), remaining.end(), 0);
    FeatureSelection selection;
    selection.elimination_order.reserve(static_cast<std::size_t>(total));

    int round = 0;
    auto score_remaining = [&]() {
        std::vector<double> scores(remaining.size(), 0.0);
        for (std::size_t c = 0; c < class_X.size(); ++c) {
            const auto X_sub = restrict_columns(*class_X[c], remaining);
            const auto s = linear_svm_scores(
                X_sub, *class_y[c], C,
                derive_seed(seed, static_cast<std::uint64_t>(round) * 1000 + c));
            for (std::size_t j = 0; j < scores.size(); ++j) scores[j] += s[j];
        }
        return scores;
    };

    while (static_cast<int>(remaining.size()) > target_k) {
        const auto scores = score_remaining();
        ++round;

        const int excess = static_cast<int>(remaining.size()) - target_k;
        const int n_elim = std::min(
            static_cast<int>(std::ceil(step * static_cast<double>(remaining.size()))),
            excess);

        // weakest first; ties break toward the lower feature index
        std::vector<std::size_t> order(remaining.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] < scores[b];
            return remaining[a] < remaining[b];
        });

        std::vector<bool> drop(remaining.size(), false);
        for (int t = 0; t < n_elim; ++t) {
            drop[order[static_cast<std::size_t>(t)]] = true;
            selection.elimination_order.push_back(remaining[order[static_cast<std::size_t>(t)]]);
        }
        std::vector<int> next;
        next.reserve(remaining.size() - static_cast<std::size_t>(n_elim));
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            if (!drop[j]) next.push_back(remaining[j]);
        }
        remaining = std::move(next);
    }

    // rank the survivors with one more fit so the full elimination order is defined
    if (!remaining.empty()) {
        const auto scores = score_remaining();
        std::vector<std::size_t> order(remaining.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] < scores[b];
            return remaining[a] < remaining[b];
        });
        for (std::size_t t : order) selection.elimination_order.push_back(remaining[t]);
    }

    selection.selected = remaining; // already ascending
    return selection;
}

FeatureSelection svm_rfe(const std::vector<std::vector<double>>& X,
                         const std::vector<int>& y, int target_k, double step,
                         double C, std::uint64_t seed) {
    return svm_rfe_multiclass({&X}, {&y}, target_k, step, C, seed);
}

} // namespace emovox
