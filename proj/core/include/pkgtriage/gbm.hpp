#ifndef PKGTRIAGE_GBM_HPP
#define PKGTRIAGE_GBM_HPP

#include "pkgtriage/matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pkgtriage {

struct RegressionTreeParams {
    int max_depth = 3;
    int min_samples_leaf = 1;
    double min_gain = 1e-12;
};

struct RegressionTreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf: Newton step sum(residual) / sum(hessian)
};

// Regression tree over gradient/hessian pairs: splits maximize the
// squared-error gain of the residuals, leaf values are Newton steps.
class RegressionTree {
public:
    double value(std::span<const double> x) const;
    const std::vector<RegressionTreeNode>& nodes() const { return nodes_; }
    std::vector<RegressionTreeNode>& mutable_nodes() { return nodes_; }

private:
    std::vector<RegressionTreeNode> nodes_;
    friend class RegressionTreeBuilder;
};

RegressionTree fit_regression_tree(const Matrix& X,
                                   std::span<const double> residual,
                                   std::span<const double> hessian,
                                   const RegressionTreeParams& params);

// Per-feature quantile binning for histogram boosting. When a feature has at
// most max_bins distinct values the edges sit between consecutive distinct
// values and binning is lossless; otherwise edges come from quantiles of the
// observed values. A constant feature yields a single bin.
struct BinnedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint16_t> bins;              // row-major bin indices
    std::vector<std::vector<double>> edges;       // per-feature interior edges

    std::uint16_t at(std::size_t r, std::size_t c) const { return bins[r * cols + c]; }
    // Number of interior edges strictly below x = the bin index of x.
    std::uint16_t bin_of(double x, std::size_t feature) const;
    std::size_t bin_count(std::size_t feature) const { return edges[feature].size() + 1; }
};

BinnedMatrix histogram_bin(const Matrix& X, int max_bins);

// Same contract as fit_regression_tree but split search runs over bin
// boundaries; stored thresholds are the real-valued edges, so the resulting
// tree scores raw vectors directly.
RegressionTree fit_binned_regression_tree(const Matrix& X, const BinnedMatrix& binned,
                                          std::span<const double> residual,
                                          std::span<const double> hessian,
                                          const RegressionTreeParams& params);

// One stage of logistic gradient boosting from raw scores F (log-odds,
// starting at 0): fits a tree to the residuals y - sigmoid(F) with Newton
// leaves and applies F += learning_rate * tree(x). Training log-loss is
// non-increasing along the stage sequence on the bundled fixtures.
RegressionTree boost_fit_stage(const Matrix& X, std::span<const int> y,
                               std::vector<double>& F, double learning_rate,
                               const RegressionTreeParams& params);

// Binned variant sharing the same update rule.
RegressionTree boost_fit_stage_binned(const Matrix& X, const BinnedMatrix& binned,
                                      std::span<const int> y, std::vector<double>& F,
                                      double learning_rate,
                                      const RegressionTreeParams& params);

double boost_log_loss(std::span<const double> F, std::span<const int> y);

} // namespace pkgtriage

#endif // PKGTRIAGE_GBM_HPP
