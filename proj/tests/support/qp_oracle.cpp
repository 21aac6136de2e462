#include "qp_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace emovox::oracle {

namespace {

double kernel_value(const std::vector<double>& a, const std::vector<double>& b,
                    emovox::KernelType kernel, double gamma) {
    if (kernel == emovox::KernelType::Linear) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

// projection onto {0 <= a <= C, y'a = 0} by bisection on the multiplier
std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y,
                            double C) {
    const std::size_t n = v.size();
    auto constraint = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = std::clamp(v[i] - lambda * y[i], 0.0, C);
            s += y[i] * a;
        }
        return s; // non-increasing in lambda
    };
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    double lo = -(C + vmax + 1.0), hi = C + vmax + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (constraint(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    const double lambda = 0.5 * (lo + hi);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(v[i] - lambda * y[i], 0.0, C);
    return out;
}

} // namespace

QpSolution solve_svm_dual(const std::vector<std::vector<double>>& X,
                          const std::vector<int>& y, double C,
                          emovox::KernelType kernel, double gamma,
                          int max_iterations) {
    const std::size_t n = X.size();
    std::vector<std::vector<double>> Q(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Q[i][j] = y[i] * y[j] * kernel_value(X[i], X[j], kernel, gamma);
        }
    }
    double lipschitz = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += std::abs(Q[i][j]);
        lipschitz = std::max(lipschitz, row);
    }
    const double step = 1.0 / lipschitz;

    std::vector<double> alpha(n, 0.0), qa(n, 0.0), grad(n), trial(n), dir(n);
    auto objective = [&]() {
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) obj += alpha[i] - 0.5 * alpha[i] * qa[i];
        return obj;
    };
    auto refresh_qa = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += Q[i][j] * alpha[j];
            qa[i] = s;
        }
    };

    refresh_qa();
    int stall = 0;
    for (int it = 0; it < max_iterations && stall < 50; ++it) {
        for (std::size_t i = 0; i < n; ++i) grad[i] = 1.0 - qa[i];
        for (std::size_t i = 0; i < n; ++i) trial[i] = alpha[i] + step * grad[i];
        trial = project(trial, y, C);
        double dnorm = 0.0, gd = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dir[i] = trial[i] - alpha[i];
            dnorm += dir[i] * dir[i];
            gd += grad[i] * dir[i];
        }
        if (dnorm < 1e-30) break;
        // exact line search along dir within [0, 1]
        double dqd = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += Q[i][j] * dir[j];
            dqd += dir[i] * s;
        }
        double t = 1.0;
        if (dqd > 0.0) t = std::clamp(gd / dqd, 0.0, 1.0);
        if (t <= 0.0) break;
        double improvement = t * gd - 0.5 * t * t * dqd;
        for (std::size_t i = 0; i < n; ++i) alpha[i] += t * dir[i];
        refresh_qa();
        stall = improvement < 1e-16 ? stall + 1 : 0;
    }

    QpSolution sol;
    sol.alpha = alpha;
    sol.objective = objective();

    // bias from the KKT conditions
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) {
        double f0 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            f0 += alpha[j] * y[j] * kernel_value(X[i], X[j], kernel, gamma);
        }
        residual[i] = y[i] - f0;
    }
    double free_sum = 0.0;
    int free_count = 0;
    double lower = -1e300, upper = 1e300;
    const double margin_eps = 1e-8 * C;
    for (std::size_t i = 0; i < n; ++i) {
        const bool at_zero = alpha[i] <= margin_eps;
        const bool at_c = alpha[i] >= C - margin_eps;
        if (!at_zero && !at_c) {
            free_sum += residual[i];
            ++free_count;
        } else if ((at_zero && y[i] == 1) || (at_c && y[i] == -1)) {
            lower = std::max(lower, residual[i]);
        } else {
            upper = std::min(upper, residual[i]);
        }
    }
    sol.bias = free_count ? free_sum / free_count : 0.5 * (lower + upper);
    return sol;
}

double oracle_decision(const QpSolution& sol, const std::vector<std::vector<double>>& X,
                       const std::vector<int>& y, emovox::KernelType kernel,
                       double gamma, const std::vector<double>& x) {
    double f = sol.bias;
    for (std::size_t i = 0; i < X.size(); ++i) {
        f += sol.alpha[i] * y[i] * kernel_value(X[i], x, kernel, gamma);
    }
    return f;
}

} // namespace emovox::oracle
