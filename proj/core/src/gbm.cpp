#include "pkgtriage/gbm.hpp"

#include "pkgtriage/errors.hpp"
#include "pkgtriage/linear.hpp"
#include "value_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pkgtriage {

namespace {

using detail::GradientSums;
using detail::ValueStats;

constexpr double kHessianFloor = 1e-12;

struct BestGain {
    int feature = -1;
    std::size_t boundary = 0; // index of the last left-side distinct value
    double gain = 0.0;
    bool found = false;

    void consider(int f, std::size_t b, double g) {
        if (!found || g > gain) {
            feature = f;
            boundary = b;
            gain = g;
            found = true;
        }
    }
};

// Squared-error gain of splitting residual sums: SL^2/nL + SR^2/nR - S^2/n.
void scan_gains(const ValueStats<GradientSums>& stats, int feature, long n,
                double total_sum, int min_samples_leaf, BestGain& best) {
    if (stats.size() < 2) return;
    double parent = total_sum * total_sum / static_cast<double>(n);
    long left_n = 0;
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < stats.size(); ++i) {
        left_n += stats.slot(i).count;
        left_sum += stats.slot(i).sum_residual;
        long right_n = n - left_n;
        if (left_n < min_samples_leaf || right_n < min_samples_leaf) continue;
        double right_sum = total_sum - left_sum;
        double gain = left_sum * left_sum / static_cast<double>(left_n) +
                      right_sum * right_sum / static_cast<double>(right_n) - parent;
        best.consider(feature, i, gain);
    }
}

// Shared recursive builder; the Column policy supplies per-row ordinal keys
// and maps a chosen boundary back to a real-valued threshold.
template <class Column>
class RegressionBuilder {
public:
    RegressionBuilder(const Column& column, std::span<const double> residual,
                      std::span<const double> hessian, const RegressionTreeParams& params)
        : column_(column), residual_(residual), hessian_(hessian), params_(params) {}

    int build(std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
              int depth, std::vector<RegressionTreeNode>& nodes) {
        long n = static_cast<long>(end - begin);
        double sum_r = 0.0, sum_h = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            sum_r += residual_[rows[i]];
            sum_h += hessian_[rows[i]];
        }

        int index = static_cast<int>(nodes.size());
        nodes.push_back(RegressionTreeNode{});
        nodes[index].value = sum_r / std::max(sum_h, kHessianFloor);

        if (depth >= params_.max_depth || n < 2 * params_.min_samples_leaf)
            return index;

        BestGain best;
        std::span<const std::size_t> node_rows{rows.data() + begin, end - begin};
        for (int f = 0; f < column_.feature_count(); ++f) {
            stats_.build(
                node_rows, [&](std::size_t r) { return column_.key(r, f); },
                [&](GradientSums& slot, std::size_t r) {
                    slot.count++;
                    slot.sum_residual += residual_[r];
                });
            scan_gains(stats_, f, n, sum_r, params_.min_samples_leaf, best);
            if (best.found && best.feature == f) remember_boundary(f, best);
        }
        if (!best.found || best.gain < params_.min_gain) return index;

        double threshold = boundary_threshold_;
        std::size_t mid = partition(rows, begin, end, best.feature, threshold);
        nodes[index].feature = best.feature;
        nodes[index].threshold = threshold;
        int left = build(rows, begin, mid, depth + 1, nodes);
        int right = build(rows, mid, end, depth + 1, nodes);
        nodes[index].left = left;
        nodes[index].right = right;
        return index;
    }

private:
    void remember_boundary(int f, const BestGain& best) {
        boundary_threshold_ = column_.threshold(f, stats_.value(best.boundary),
                                                stats_.value(best.boundary + 1));
    }

    std::size_t partition(std::vector<std::size_t>& rows, std::size_t begin,
                          std::size_t end, int feature, double threshold) {
        scratch_.clear();
        std::size_t write = begin;
        for (std::size_t i = begin; i < end; ++i) {
            if (column_.raw(rows[i], feature) <= threshold) rows[write++] = rows[i];
            else scratch_.push_back(rows[i]);
        }
        std::copy(scratch_.begin(), scratch_.end(),
                  rows.begin() + static_cast<std::ptrdiff_t>(write));
        return write;
    }

    const Column& column_;
    std::span<const double> residual_;
    std::span<const double> hessian_;
    const RegressionTreeParams& params_;
    ValueStats<GradientSums> stats_;
    std::vector<std::size_t> scratch_;
    double boundary_threshold_ = 0.0;
};

struct ExactColumn {
    const Matrix& X;
    int feature_count() const { return static_cast<int>(X.cols()); }
    double key(std::size_t r, int f) const { return X.at(r, static_cast<std::size_t>(f)); }
    double raw(std::size_t r, int f) const { return key(r, f); }
    double threshold(int, double lo, double hi) const {
        double mid = (lo + hi) / 2.0;
        // Degenerate float spacing collapses onto the upper value; nudge down
        // so the partition predicate (x <= t) still separates the two sides.
        return mid < hi ? mid : lo;
    }
};

struct BinnedColumn {
    const Matrix& X;
    const BinnedMatrix& binned;
    int feature_count() const { return static_cast<int>(binned.cols); }
    double key(std::size_t r, int f) const {
        return static_cast<double>(binned.at(r, static_cast<std::size_t>(f)));
    }
    double raw(std::size_t r, int f) const { return X.at(r, static_cast<std::size_t>(f)); }
    double threshold(int f, double lo, double) const {
        return binned.edges[static_cast<std::size_t>(f)][static_cast<std::size_t>(lo)];
    }
};

template <class Column>
RegressionTree fit_with(const Column& column, std::size_t n_rows,
                        std::span<const double> residual, std::span<const double> hessian,
                        const RegressionTreeParams& params) {
    if (residual.size() != n_rows || hessian.size() != n_rows)
        throw DimensionMismatch("residual/hessian length != row count");
    RegressionTree tree;
    std::vector<std::size_t> rows(n_rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    RegressionBuilder<Column> builder(column, residual, hessian, params);
    builder.build(rows, 0, rows.size(), 0, tree.mutable_nodes());
    return tree;
}

} // namespace

double RegressionTree::value(std::span<const double> x) const {
    int index = 0;
    while (nodes_[static_cast<std::size_t>(index)].feature >= 0) {
        const auto& node = nodes_[static_cast<std::size_t>(index)];
        index = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                            : node.right;
    }
    return nodes_[static_cast<std::size_t>(index)].value;
}

RegressionTree fit_regression_tree(const Matrix& X, std::span<const double> residual,
                                   std::span<const double> hessian,
                                   const RegressionTreeParams& params) {
    return fit_with(ExactColumn{X}, X.rows(), residual, hessian, params);
}

RegressionTree fit_binned_regression_tree(const Matrix& X, const BinnedMatrix& binned,
                                          std::span<const double> residual,
                                          std::span<const double> hessian,
                                          const RegressionTreeParams& params) {
    return fit_with(BinnedColumn{X, binned}, X.rows(), residual, hessian, params);
}

std::uint16_t BinnedMatrix::bin_of(double x, std::size_t feature) const {
    const auto& e = edges[feature];
    auto it = std::lower_bound(e.begin(), e.end(), x);
    return static_cast<std::uint16_t>(it - e.begin());
}

BinnedMatrix histogram_bin(const Matrix& X, int max_bins) {
    if (max_bins < 2) throw Error("max_bins must be >= 2");
    BinnedMatrix out;
    out.rows = X.rows();
    out.cols = X.cols();
    out.edges.resize(X.cols());
    out.bins.resize(X.rows() * X.cols(), 0);

    std::vector<double> sorted(X.rows());
    for (std::size_t f = 0; f < X.cols(); ++f) {
        for (std::size_t r = 0; r < X.rows(); ++r) sorted[r] = X.at(r, f);
        std::sort(sorted.begin(), sorted.end());
        auto last = std::unique(sorted.begin(), sorted.end());
        auto distinct = static_cast<std::size_t>(last - sorted.begin());

        auto& edges = out.edges[f];
        if (distinct <= static_cast<std::size_t>(max_bins)) {
            // Lossless: one bin per distinct value.
            for (std::size_t i = 0; i + 1 < distinct; ++i) {
                double mid = (sorted[i] + sorted[i + 1]) / 2.0;
                if (mid > sorted[i] && mid < sorted[i + 1]) edges.push_back(mid);
                else if (sorted[i] < sorted[i + 1]) edges.push_back(sorted[i + 1]);
            }
        } else {
            // Approximate quantile edges over the raw (non-distinct) values.
            for (std::size_t r = 0; r < X.rows(); ++r) sorted[r] = X.at(r, f);
            std::sort(sorted.begin(), sorted.end());
            for (int b = 1; b < max_bins; ++b) {
                std::size_t pos = X.rows() * static_cast<std::size_t>(b) /
                                  static_cast<std::size_t>(max_bins);
                if (pos == 0 || pos >= X.rows()) continue;
                double edge = (sorted[pos - 1] + sorted[pos]) / 2.0;
                if (edges.empty() || edge > edges.back()) edges.push_back(edge);
            }
        }
        for (std::size_t r = 0; r < X.rows(); ++r)
            out.bins[r * out.cols + f] = out.bin_of(X.at(r, f), f);
    }
    return out;
}

namespace {

// Residuals are the negative log-loss gradients y - sigmoid(F); hessians are
// sigmoid(F) * (1 - sigmoid(F)).
void logloss_gradients(std::span<const double> F, std::span<const int> y,
                       std::vector<double>& residual, std::vector<double>& hessian) {
    residual.resize(F.size());
    hessian.resize(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) {
        double p = sigmoid(F[i]);
        residual[i] = static_cast<double>(y[i]) - p;
        hessian[i] = p * (1.0 - p);
    }
}

template <class FitTree>
RegressionTree stage_impl(const Matrix& X, std::span<const int> y,
                          std::vector<double>& F, double learning_rate,
                          FitTree&& fit_tree) {
    if (F.size() != X.rows() || y.size() != X.rows())
        throw DimensionMismatch("scores/labels length != row count");
    std::vector<double> residual, hessian;
    logloss_gradients(F, y, residual, hessian);
    RegressionTree tree = fit_tree(residual, hessian);
    for (std::size_t i = 0; i < F.size(); ++i)
        F[i] += learning_rate * tree.value(X.row(i));
    return tree;
}

} // namespace

RegressionTree boost_fit_stage(const Matrix& X, std::span<const int> y,
                               std::vector<double>& F, double learning_rate,
                               const RegressionTreeParams& params) {
    return stage_impl(X, y, F, learning_rate,
                      [&](const std::vector<double>& r, const std::vector<double>& h) {
                          return fit_regression_tree(X, r, h, params);
                      });
}

RegressionTree boost_fit_stage_binned(const Matrix& X, const BinnedMatrix& binned,
                                      std::span<const int> y, std::vector<double>& F,
                                      double learning_rate,
                                      const RegressionTreeParams& params) {
    return stage_impl(X, y, F, learning_rate,
                      [&](const std::vector<double>& r, const std::vector<double>& h) {
                          return fit_binned_regression_tree(X, binned, r, h, params);
                      });
}

double boost_log_loss(std::span<const double> F, std::span<const int> y) {
    double total = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) {
        double z = F[i];
        // log(1 + exp(-z)) for y=1, log(1 + exp(z)) for y=0, stably.
        double margin = y[i] ? z : -z;
        total += margin >= 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
    }
    return total / static_cast<double>(F.size());
}

} // namespace pkgtriage
