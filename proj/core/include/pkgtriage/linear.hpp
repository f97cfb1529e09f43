#ifndef PKGTRIAGE_LINEAR_HPP
#define PKGTRIAGE_LINEAR_HPP

#include "pkgtriage/matrix.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace pkgtriage {

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// Objective for logistic regression: mean log-loss plus an L2 penalty of
// (l2/2)*||w||^2 on the weights (the bias is not penalized).
double logistic_loss(const Matrix& X, std::span<const int> y,
                     std::span<const double> w, double b, double l2);

void logistic_gradient(const Matrix& X, std::span<const int> y,
                       std::span<const double> w, double b, double l2,
                       std::vector<double>& grad_w, double& grad_b);

// One full-batch gradient-descent step; returns the objective value BEFORE
// the step.
double logistic_fit_step(std::vector<double>& w, double& b, const Matrix& X,
                         std::span<const int> y, double lr, double l2);

} // namespace pkgtriage

#endif // PKGTRIAGE_LINEAR_HPP
