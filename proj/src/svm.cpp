#include <algorithm>
#include <cmath>
#include <sstream>

#include "emovox/errors.hpp"
#include "emovox/learn.hpp"
#include "emovox/rng.hpp"

namespace emovox {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Lazily memoized Gram rows.
class KernelCache {
public:
    KernelCache(const std::vector<std::vector<double>>& X, KernelType kernel, double gamma)
        : X_(X), kernel_(kernel), gamma_(gamma), rows_(X.size()) {
        self_dots_.resize(X.size());
        for (std::size_t i = 0; i < X.size(); ++i) self_dots_[i] = dot(X[i], X[i]);
    }

    const std::vector<double>& row(std::size_t i) {
        auto& r = rows_[i];
        if (r.empty()) {
            r.resize(X_.size());
            for (std::size_t j = 0; j < X_.size(); ++j) r[j] = compute(i, j);
        }
        return r;
    }

    double at(std::size_t i, std::size_t j) {
        if (!rows_[i].empty()) return rows_[i][j];
        if (!rows_[j].empty()) return rows_[j][i];
        return compute(i, j);
    }

private:
    double compute(std::size_t i, std::size_t j) const {
        const double d = dot(X_[i], X_[j]);
        if (kernel_ == KernelType::Linear) return d;
        const double dist2 = std::max(self_dots_[i] + self_dots_[j] - 2.0 * d, 0.0);
        return std::exp(-gamma_ * dist2);
    }

    const std::vector<std::vector<double>>& X_;
    KernelType kernel_;
    double gamma_;
    std::vector<double> self_dots_;
    std::vector<std::vector<double>> rows_;
};

class SmoSolver {
public:
    SmoSolver(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
              const SvmTrainConfig& cfg)
        : X_(X), y_(y), cfg_(cfg), n_(X.size()), cache_(X, cfg.kernel, cfg.gamma),
          rng_(derive_seed(cfg.seed, "smo")) {
        alpha_.assign(n_, 0.0);
        f_.assign(n_, 0.0); // all-zero alpha: f == b == 0
    }

    void solve(SvmDiagnostics* diag) {
        bool examine_all = true;
        int num_changed = 0;
        int epochs = 0;
        while (num_changed > 0 || examine_all) {
            if (++epochs > cfg_.max_epochs) {
                std::ostringstream msg;
                msg << "SMO did not converge within " << cfg_.max_epochs
                    << " epochs (max KKT violation " << kkt_violation() << ")";
                throw NotConvergedError(msg.str(), epochs, kkt_violation());
            }
            num_changed = 0;
            for (std::size_t i = 0; i < n_; ++i) {
                if (examine_all || (alpha_[i] > 0.0 && alpha_[i] < cfg_.C)) {
                    num_changed += examine(i);
                }
            }
            if (examine_all) {
                examine_all = false;
            } else if (num_changed == 0) {
                examine_all = true;
            }
        }
        if (diag) {
            diag->epochs = epochs;
            diag->take_steps = take_steps_;
            diag->max_kkt_violation = kkt_violation();
            diag->alpha = alpha_;
        }
    }

    const std::vector<double>& alpha() const { return alpha_; }
    double bias() const { return b_; }

    double kkt_violation() {
        double worst = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double margin = y_[i] * f_[i]; // y*f, optimal: >=1, <=1 or ==1
            double v = 0.0;
            if (alpha_[i] <= kAlphaEps) {
                v = std::max(0.0, 1.0 - margin);
            } else if (alpha_[i] >= cfg_.C - kAlphaEps) {
                v = std::max(0.0, margin - 1.0);
            } else {
                v = std::abs(margin - 1.0);
            }
            worst = std::max(worst, v);
        }
        return worst;
    }

private:
    static constexpr double kAlphaEps = 1e-10;
    static constexpr double kStepEps = 1e-12;

    double error(std::size_t i) const { return f_[i] - y_[i]; }

    int examine(std::size_t i2) {
        const double alph2 = alpha_[i2];
        const double e2 = error(i2);
        const double r2 = e2 * y_[i2];
        const bool violates = (r2 < -cfg_.tol && alph2 < cfg_.C) ||
                              (r2 > cfg_.tol && alph2 > 0.0);
        if (!violates) return 0;

        // second-choice heuristic: largest |E1 - E2| among non-bound points
        std::size_t best = n_;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (i == i2 || alpha_[i] <= 0.0 || alpha_[i] >= cfg_.C) continue;
            const double gap = std::abs(error(i) - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n_ && take_step(best, i2)) return 1;

        // sweep non-bound points from a seeded-random start
        const std::size_t start1 = rng_.next_index(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i1 = (start1 + k) % n_;
            if (i1 == i2 || alpha_[i1] <= 0.0 || alpha_[i1] >= cfg_.C) continue;
            if (take_step(i1, i2)) return 1;
        }

        // sweep everything
        const std::size_t start2 = rng_.next_index(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i1 = (start2 + k) % n_;
            if (i1 == i2) continue;
            if (take_step(i1, i2)) return 1;
        }
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double alph1 = alpha_[i1], alph2 = alpha_[i2];
        const int y1 = y_[i1], y2 = y_[i2];
        const double e1 = error(i1), e2 = error(i2);
        const double s = y1 * y2;
        const double C = cfg_.C;

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, alph2 - alph1);
            hi = std::min(C, C + alph2 - alph1);
        } else {
            lo = std::max(0.0, alph1 + alph2 - C);
            hi = std::min(C, alph1 + alph2);
        }
        if (lo >= hi) return false;

        const auto& row1 = cache_.row(i1);
        const auto& row2 = cache_.row(i2);
        const double k11 = row1[i1], k12 = row1[i2], k22 = row2[i2];
        const double eta = k11 + k22 - 2.0 * k12;

        double a2;
        if (eta > 0.0) {
            a2 = alph2 + y2 * (e1 - e2) / eta;
            a2 = std::clamp(a2, lo, hi);
        } else {
            // objective at the segment ends
            const double f1 = y1 * e1 - alph1 * k11 - s * alph2 * k12;
            const double f2 = y2 * e2 - alph2 * k22 - s * alph1 * k12;
            const double l1 = alph1 + s * (alph2 - lo);
            const double h1 = alph1 + s * (alph2 - hi);
            const double lobj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                                0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double hobj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                                0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (lobj < hobj - kStepEps) a2 = lo;
            else if (lobj > hobj + kStepEps) a2 = hi;
            else return false;
        }
        if (std::abs(a2 - alph2) < kStepEps * (a2 + alph2 + kStepEps)) return false;

        double a1 = alph1 + s * (alph2 - a2);
        if (a1 < 0.0) {
            a2 += s * a1;
            a1 = 0.0;
        } else if (a1 > C) {
            a2 += s * (a1 - C);
            a1 = C;
        }

        const double d1 = y1 * (a1 - alph1);
        const double d2 = y2 * (a2 - alph2);

        const double b1 = e1 + d1 * k11 + d2 * k12;
        const double b2 = e2 + d1 * k12 + d2 * k22;
        double delta_b;
        if (a1 > 0.0 && a1 < C) delta_b = b1;
        else if (a2 > 0.0 && a2 < C) delta_b = b2;
        else delta_b = 0.5 * (b1 + b2);

        alpha_[i1] = a1;
        alpha_[i2] = a2;
        b_ -= delta_b;
        for (std::size_t i = 0; i < n_; ++i) {
            f_[i] += d1 * row1[i] + d2 * row2[i] - delta_b;
        }
        ++take_steps_;
        return true;
    }

    const std::vector<std::vector<double>>& X_;
    const std::vector<int>& y_;
    SvmTrainConfig cfg_;
    std::size_t n_;
    KernelCache cache_;
    Rng rng_;
    std::vector<double> alpha_;
    std::vector<double> f_;
    double b_ = 0.0;
    long take_steps_ = 0;
};

} // namespace

BinarySvmModel train_binary_svm(const std::vector<std::vector<double>>& X,
                                const std::vector<int>& y,
                                const SvmTrainConfig& cfg,
                                SvmDiagnostics* diagnostics) {
    if (X.size() != y.size()) throw LengthMismatchError("train_binary_svm: |X| != |y|");
    if (X.empty()) throw EmptyInputError("train_binary_svm: empty training set");
    if (cfg.C <= 0.0) throw ValidationError("train_binary_svm: C must be positive");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw ValidationError("train_binary_svm: labels must be +1/-1");
    }
    if (!has_pos || !has_neg) {
        throw ValidationError("train_binary_svm: both classes must be present");
    }
    const std::size_t dim = X[0].size();
    for (const auto& row : X) {
        if (row.size() != dim) throw DimensionMismatchError("train_binary_svm: ragged X");
    }

    SmoSolver solver(X, y, cfg);
    solver.solve(diagnostics);

    BinarySvmModel model;
    model.kernel = cfg.kernel;
    model.gamma = cfg.gamma;
    model.C = cfg.C;
    model.bias = solver.bias();
    const auto& alpha = solver.alpha();
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (alpha[i] > 1e-10) {
            model.support_vectors.push_back(X[i]);
            model.dual_coeffs.push_back(alpha[i] * y[i]);
        }
    }
    if (diagnostics) {
        diagnostics->dual_objective = svm_dual_objective(X, y, alpha, cfg);
    }
    return model;
}

double svm_decision(const BinarySvmModel& model, std::span<const double> x) {
    double f = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        const auto& sv = model.support_vectors[i];
        if (sv.size() != x.size()) {
            throw DimensionMismatchError("svm_decision: input has dimension " +
                                         std::to_string(x.size()) + ", model expects " +
                                         std::to_string(sv.size()));
        }
        double k;
        if (model.kernel == KernelType::Linear) {
            double d = 0.0;
            for (std::size_t j = 0; j < sv.size(); ++j) d += sv[j] * x[j];
            k = d;
        } else {
            double dist2 = 0.0;
            for (std::size_t j = 0; j < sv.size(); ++j) {
                const double diff = sv[j] - x[j];
                dist2 += diff * diff;
            }
            k = std::exp(-model.gamma * dist2);
        }
        f += model.dual_coeffs[i] * k;
    }
    return f;
}

double svm_dual_objective(const std::vector<std::vector<double>>& X,
                          const std::vector<int>& y,
                          const std::vector<double>& alpha,
                          const SvmTrainConfig& cfg) {
    KernelCache cache(X, cfg.kernel, cfg.gamma);
    double obj = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) obj += alpha[i];
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] == 0.0) continue;
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            if (alpha[j] == 0.0) continue;
            obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * cache.at(i, j);
        }
    }
    return obj;
}

} // namespace emovox
