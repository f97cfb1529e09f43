#include "pkgtriage/tree.hpp"

#include "pkgtriage/errors.hpp"
#include "value_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pkgtriage {

double gini_impurity(long benign, long malicious) {
    if (benign == 0 && malicious == 0) throw EmptyNode();
    double n = static_cast<double>(benign + malicious);
    double pb = static_cast<double>(benign) / n;
    double pm = static_cast<double>(malicious) / n;
    return 1.0 - (pb * pb + pm * pm);
}

namespace {

using detail::ClassCounts;
using detail::ValueStats;

double node_gini(long n0, long n1) {
    double n = static_cast<double>(n0 + n1);
    double p0 = static_cast<double>(n0) / n;
    double p1 = static_cast<double>(n1) / n;
    return 1.0 - (p0 * p0 + p1 * p1);
}

// Candidates are generated in ascending (feature, threshold) order, so a
// strictly-greater update realizes the canonical tie-break.
struct BestCandidate {
    SplitCandidate split;
    bool found = false;

    void consider(int feature, double threshold, double decrease) {
        if (!found || decrease > split.impurity_decrease) {
            split = {feature, threshold, decrease};
            found = true;
        }
    }
};

// Scans one feature's sorted distinct values for the best midpoint split.
void scan_feature(const ValueStats<ClassCounts>& stats, int feature, long n0, long n1,
                  double parent_gini, int min_samples_leaf, BestCandidate& best) {
    if (stats.size() < 2) return;
    long n = n0 + n1;
    long left0 = 0, left1 = 0;
    for (std::size_t i = 0; i + 1 < stats.size(); ++i) {
        left0 += stats.slot(i).benign;
        left1 += stats.slot(i).malicious;
        long left_n = left0 + left1;
        long right_n = n - left_n;
        if (left_n < min_samples_leaf || right_n < min_samples_leaf) continue;
        double mid = (stats.value(i) + stats.value(i + 1)) / 2.0;
        if (mid >= stats.value(i + 1)) continue; // degenerate float spacing
        double weighted = (static_cast<double>(left_n) * node_gini(left0, left1) +
                           static_cast<double>(right_n) * node_gini(n0 - left0, n1 - left1)) /
                          static_cast<double>(n);
        best.consider(feature, mid, parent_gini - weighted);
    }
}

} // namespace

std::optional<SplitCandidate> best_split(const Matrix& X, std::span<const int> y,
                                         std::span<const int> feature_subset,
                                         double min_impurity_decrease,
                                         int min_samples_leaf) {
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});

    long n0 = 0, n1 = 0;
    for (std::size_t r : rows) (y[r] ? n1 : n0)++;
    if (n0 + n1 < 2 || n0 == 0 || n1 == 0) return std::nullopt;
    double parent = node_gini(n0, n1);

    BestCandidate best;
    ValueStats<ClassCounts> stats;
    for (int f : feature_subset) {
        stats.build(
            rows, [&](std::size_t r) { return X.at(r, static_cast<std::size_t>(f)); },
            [&](ClassCounts& slot, std::size_t r) { (y[r] ? slot.malicious : slot.benign)++; });
        scan_feature(stats, f, n0, n1, parent, min_samples_leaf, best);
    }
    if (!best.found || best.split.impurity_decrease < min_impurity_decrease)
        return std::nullopt;
    return best.split;
}

namespace {

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, std::span<const int> y,
                const DecisionTree::FitOptions& options)
        : X_(X), y_(y), options_(options) {
        if (options_.features_per_node == 0) {
            feature_scratch_.resize(X.cols());
            std::iota(feature_scratch_.begin(), feature_scratch_.end(), 0);
        }
    }

    int build(std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
              int depth, std::vector<TreeNode>& nodes) {
        long n0 = 0, n1 = 0;
        for (std::size_t i = begin; i < end; ++i) (y_[rows[i]] ? n1 : n0)++;
        long n = n0 + n1;

        int index = static_cast<int>(nodes.size());
        nodes.push_back(TreeNode{});
        nodes[index].score = static_cast<double>(n1) / static_cast<double>(n);

        const TreeParams& p = options_.params;
        if (depth >= p.max_depth || n0 == 0 || n1 == 0 || n < 2 * p.min_samples_leaf)
            return index;

        auto features = pick_features();
        auto split = options_.random_threshold
                         ? scan_random_threshold(rows, begin, end, features, n0, n1)
                         : scan_midpoints(rows, begin, end, features, n0, n1);
        if (!split || split->impurity_decrease < p.min_impurity_decrease) return index;

        std::size_t mid = partition(rows, begin, end, split->feature, split->threshold);
        nodes[index].feature = split->feature;
        nodes[index].threshold = split->threshold;
        int left = build(rows, begin, mid, depth + 1, nodes);
        int right = build(rows, mid, end, depth + 1, nodes);
        nodes[index].left = left;
        nodes[index].right = right;
        return index;
    }

private:
    std::span<const int> pick_features() {
        if (options_.features_per_node == 0) return feature_scratch_;
        auto d = static_cast<int>(X_.cols());
        int k = std::min(options_.features_per_node, d);
        feature_scratch_.resize(static_cast<std::size_t>(d));
        std::iota(feature_scratch_.begin(), feature_scratch_.end(), 0);
        for (int i = 0; i < k; ++i) {
            auto j = i + static_cast<int>(options_.rng->below(static_cast<std::uint64_t>(d - i)));
            std::swap(feature_scratch_[static_cast<std::size_t>(i)],
                      feature_scratch_[static_cast<std::size_t>(j)]);
        }
        feature_scratch_.resize(static_cast<std::size_t>(k));
        std::sort(feature_scratch_.begin(), feature_scratch_.end());
        return feature_scratch_;
    }

    std::optional<SplitCandidate> scan_midpoints(const std::vector<std::size_t>& rows,
                                                 std::size_t begin, std::size_t end,
                                                 std::span<const int> features, long n0,
                                                 long n1) {
        double parent = node_gini(n0, n1);
        BestCandidate best;
        std::span<const std::size_t> node_rows{rows.data() + begin, end - begin};
        for (int f : features) {
            stats_.build(
                node_rows,
                [&](std::size_t r) { return X_.at(r, static_cast<std::size_t>(f)); },
                [&](ClassCounts& slot, std::size_t r) {
                    (y_[r] ? slot.malicious : slot.benign)++;
                });
            scan_feature(stats_, f, n0, n1, parent, options_.params.min_samples_leaf, best);
        }
        if (!best.found) return std::nullopt;
        return best.split;
    }

    // Extra-trees style: one uniform threshold per candidate feature.
    // Constant features are skipped without consuming randomness.
    std::optional<SplitCandidate> scan_random_threshold(const std::vector<std::size_t>& rows,
                                                        std::size_t begin, std::size_t end,
                                                        std::span<const int> features,
                                                        long n0, long n1) {
        double parent = node_gini(n0, n1);
        long n = n0 + n1;
        BestCandidate best;
        for (int f : features) {
            auto col = static_cast<std::size_t>(f);
            double lo = X_.at(rows[begin], col), hi = lo;
            for (std::size_t i = begin + 1; i < end; ++i) {
                double v = X_.at(rows[i], col);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (lo == hi) continue;
            double threshold = options_.rng->uniform(lo, hi);
            if (threshold >= hi) continue;
            long left0 = 0, left1 = 0;
            for (std::size_t i = begin; i < end; ++i) {
                if (X_.at(rows[i], col) <= threshold) (y_[rows[i]] ? left1 : left0)++;
            }
            long left_n = left0 + left1, right_n = n - left_n;
            if (left_n < options_.params.min_samples_leaf ||
                right_n < options_.params.min_samples_leaf)
                continue;
            double weighted =
                (static_cast<double>(left_n) * node_gini(left0, left1) +
                 static_cast<double>(right_n) * node_gini(n0 - left0, n1 - left1)) /
                static_cast<double>(n);
            best.consider(f, threshold, parent - weighted);
        }
        if (!best.found) return std::nullopt;
        return best.split;
    }

    // Stable partition so the recursion visits rows in a reproducible order.
    std::size_t partition(std::vector<std::size_t>& rows, std::size_t begin,
                          std::size_t end, int feature, double threshold) {
        scratch_.clear();
        std::size_t write = begin;
        auto col = static_cast<std::size_t>(feature);
        for (std::size_t i = begin; i < end; ++i) {
            if (X_.at(rows[i], col) <= threshold) rows[write++] = rows[i];
            else scratch_.push_back(rows[i]);
        }
        std::copy(scratch_.begin(), scratch_.end(), rows.begin() + static_cast<std::ptrdiff_t>(write));
        return write;
    }

    const Matrix& X_;
    std::span<const int> y_;
    const DecisionTree::FitOptions& options_;
    std::vector<int> feature_scratch_;
    std::vector<std::size_t> scratch_;
    ValueStats<ClassCounts> stats_;
};

} // namespace

DecisionTree DecisionTree::fit(const Matrix& X, std::span<const int> y,
                               std::span<const std::size_t> rows,
                               const FitOptions& options) {
    if (X.rows() != y.size())
        throw DimensionMismatch("matrix rows != label count");
    if (rows.empty()) throw TooFewSamples("decision tree needs at least one row");

    DecisionTree tree;
    std::vector<std::size_t> working(rows.begin(), rows.end());
    TreeBuilder builder(X, y, options);
    builder.build(working, 0, working.size(), 0, tree.nodes_);
    return tree;
}

DecisionTree DecisionTree::fit(const Matrix& X, std::span<const int> y,
                               const FitOptions& options) {
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit(X, y, rows, options);
}

double DecisionTree::score(std::span<const double> x) const {
    int index = 0;
    while (nodes_[static_cast<std::size_t>(index)].feature >= 0) {
        const TreeNode& node = nodes_[static_cast<std::size_t>(index)];
        index = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                            : node.right;
    }
    return nodes_[static_cast<std::size_t>(index)].score;
}

DecisionTree DecisionTree::from_nodes(std::vector<TreeNode> nodes) {
    DecisionTree tree;
    tree.nodes_ = std::move(nodes);
    return tree;
}

int DecisionTree::depth() const {
    // Iterative depth over the flat node array.
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int depth = 0;
    while (!stack.empty()) {
        auto [index, d] = stack.back();
        stack.pop_back();
        depth = std::max(depth, d);
        const TreeNode& node = nodes_[static_cast<std::size_t>(index)];
        if (node.feature >= 0) {
            stack.push_back({node.left, d + 1});
            stack.push_back({node.right, d + 1});
        }
    }
    return depth;
}

} // namespace pkgtriage
