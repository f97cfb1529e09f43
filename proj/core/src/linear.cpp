#include "pkgtriage/linear.hpp"

#include "pkgtriage/errors.hpp"

namespace pkgtriage {

double logistic_loss(const Matrix& X, std::span<const int> y,
                     std::span<const double> w, double b, double l2) {
    if (X.rows() != y.size()) throw LengthMismatch("labels vs rows");
    if (X.cols() != w.size()) throw DimensionMismatch("weights vs columns");
    double total = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        auto row = X.row(i);
        double z = b;
        for (std::size_t j = 0; j < row.size(); ++j) z += w[j] * row[j];
        double margin = y[i] ? z : -z;
        total += margin >= 0 ? std::log1p(std::exp(-margin))
                             : -margin + std::log1p(std::exp(margin));
    }
    double penalty = 0.0;
    for (double wj : w) penalty += wj * wj;
    return total / static_cast<double>(X.rows()) + 0.5 * l2 * penalty;
}

void logistic_gradient(const Matrix& X, std::span<const int> y,
                       std::span<const double> w, double b, double l2,
                       std::vector<double>& grad_w, double& grad_b) {
    if (X.rows() != y.size()) throw LengthMismatch("labels vs rows");
    if (X.cols() != w.size()) throw DimensionMismatch("weights vs columns");
    grad_w.assign(w.size(), 0.0);
    grad_b = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        auto row = X.row(i);
        double z = b;
        for (std::size_t j = 0; j < row.size(); ++j) z += w[j] * row[j];
        double err = sigmoid(z) - static_cast<double>(y[i]);
        for (std::size_t j = 0; j < row.size(); ++j) grad_w[j] += err * row[j];
        grad_b += err;
    }
    double inv_n = 1.0 / static_cast<double>(X.rows());
    for (std::size_t j = 0; j < w.size(); ++j) grad_w[j] = grad_w[j] * inv_n + l2 * w[j];
    grad_b *= inv_n;
}

double logistic_fit_step(std::vector<double>& w, double& b, const Matrix& X,
                         std::span<const int> y, double lr, double l2) {
    double loss = logistic_loss(X, y, w, b, l2);
    std::vector<double> grad_w;
    double grad_b = 0.0;
    logistic_gradient(X, y, w, b, l2, grad_w, grad_b);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * grad_w[j];
    b -= lr * grad_b;
    return loss;
}

} // namespace pkgtriage
