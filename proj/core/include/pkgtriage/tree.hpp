#ifndef PKGTRIAGE_TREE_HPP
#define PKGTRIAGE_TREE_HPP

#include "pkgtriage/matrix.hpp"
#include "pkgtriage/rng.hpp"

#include <optional>
#include <span>
#include <vector>

namespace pkgtriage {

// Gini impurity of a node from its (benign, malicious) counts: 1 - sum p^2.
// Throws EmptyNode when both counts are zero.
double gini_impurity(long benign, long malicious);

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    // Node-local weighted decrease:
    //   gini(node) - (n_left*gini(left) + n_right*gini(right)) / n.
    double impurity_decrease = 0.0;
};

struct TreeParams {
    int max_depth = 16;
    int min_samples_leaf = 1;
    double min_impurity_decrease = 1e-12;
};

// Exhaustive CART split search over midpoints between consecutive distinct
// feature values. Ties break canonically: lowest feature index, then lowest
// threshold. Returns nullopt when no split decreases impurity by at least
// min_impurity_decrease.
std::optional<SplitCandidate> best_split(const Matrix& X, std::span<const int> y,
                                         std::span<const int> feature_subset,
                                         double min_impurity_decrease = 1e-12,
                                         int min_samples_leaf = 1);

// Flat node storage; feature == -1 marks a leaf. Samples with
// x[feature] <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double score = 0.0; // leaf: malicious fraction of training samples
};

class DecisionTree {
public:
    struct FitOptions {
        TreeParams params;
        // 0 = consider every feature at each node; otherwise draw this many
        // distinct features per node from *rng (sorted ascending before the
        // scan, so the canonical tie-break applies within the subset).
        int features_per_node = 0;
        // Extra-trees style: one uniform random threshold in [min, max) per
        // candidate feature instead of the exhaustive midpoint scan.
        bool random_threshold = false;
        Rng* rng = nullptr;
    };

    // `rows` are training-row indices into X and may repeat (bootstrap).
    static DecisionTree fit(const Matrix& X, std::span<const int> y,
                            std::span<const std::size_t> rows,
                            const FitOptions& options);
    static DecisionTree fit(const Matrix& X, std::span<const int> y,
                            const FitOptions& options);

    double score(std::span<const double> x) const;

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    int depth() const;

    static DecisionTree from_nodes(std::vector<TreeNode> nodes);

private:
    std::vector<TreeNode> nodes_;
};

} // namespace pkgtriage

#endif // PKGTRIAGE_TREE_HPP
