#ifndef EMOVOX_TESTS_QP_ORACLE_HPP
#define EMOVOX_TESTS_QP_ORACLE_HPP

#include <vector>

#include "emovox/learn.hpp"

namespace emovox::oracle {

struct QpSolution {
    std::vector<double> alpha;
    double objective = 0.0; // sum(alpha) - 1/2 a'Qa
    double bias = 0.0;
};

// Brute-force reference for the SVM dual: projected gradient ascent with an
// exact line search on max W(a) = 1'a - 1/2 a'Qa subject to 0 <= a <= C and
// y'a = 0.  Deliberately independent of the SMO implementation.
QpSolution solve_svm_dual(const std::vector<std::vector<double>>& X,
                          const std::vector<int>& y, double C,
                          emovox::KernelType kernel, double gamma,
                          int max_iterations = 200000);

// Decision value with the oracle's alpha/bias.
double oracle_decision(const QpSolution& sol, const std::vector<std::vector<double>>& X,
                       const std::vector<int>& y, emovox::KernelType kernel,
                       double gamma, const std::vector<double>& x);

} // namespace emovox::oracle

#endif
