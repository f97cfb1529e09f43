#include "pkgtriage/models.hpp"

#include "pkgtriage/errors.hpp"
#include "pkgtriage/linear.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace pkgtriage {

namespace {

constexpr std::array<ModelKind, 9> kAllKinds = {
    ModelKind::decision_tree,       ModelKind::random_forest,
    ModelKind::extra_trees,         ModelKind::bagging,
    ModelKind::gradient_boosting,   ModelKind::hist_gradient_boosting,
    ModelKind::knn,                 ModelKind::logistic_regression,
    ModelKind::gaussian_nb,
};

} // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::decision_tree: return "decision_tree";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::extra_trees: return "extra_trees";
    case ModelKind::bagging: return "bagging";
    case ModelKind::gradient_boosting: return "gradient_boosting";
    case ModelKind::hist_gradient_boosting: return "hist_gradient_boosting";
    case ModelKind::knn: return "knn";
    case ModelKind::logistic_regression: return "logistic_regression";
    case ModelKind::gaussian_nb: return "gaussian_nb";
    }
    return "decision_tree";
}

ModelKind model_kind_from_string(const std::string& name) {
    for (ModelKind kind : kAllKinds)
        if (to_string(kind) == name) return kind;
    throw Error("unknown model kind '" + name + "'");
}

std::span<const ModelKind> all_model_kinds() { return kAllKinds; }

FittedModel::FittedModel(ModelKind kind, std::size_t input_dimension, ModelParams params)
    : kind_(kind), input_dimension_(input_dimension), params_(std::move(params)) {}

namespace {

int sqrt_feature_count(std::size_t d) {
    auto k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    return std::max(1, std::min(k, static_cast<int>(d)));
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, Rng& rng) {
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng.below(n);
    return rows;
}

std::vector<std::size_t> identity_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

EnsembleModelParams fit_tree_ensemble(const Matrix& X, const LabelVector& y,
                                      const EnsembleParams& ensemble,
                                      const TreeParams& tree_params,
                                      bool random_threshold, std::uint64_t seed) {
    EnsembleModelParams out;
    out.members.resize(static_cast<std::size_t>(ensemble.members));
    int features_per_node = ensemble.features == FeatureSubsetMode::all
                                ? 0
                                : sqrt_feature_count(X.cols());
    detail::parallel_for(out.members.size(), [&](std::size_t m) {
        Rng rng(substream_seed(seed, m));
        auto rows = ensemble.bootstrap ? bootstrap_rows(X.rows(), rng)
                                       : identity_rows(X.rows());
        DecisionTree::FitOptions options;
        options.params = tree_params;
        options.features_per_node = features_per_node;
        options.random_threshold = random_threshold;
        options.rng = &rng;
        out.members[m] = DecisionTree::fit(X, y, rows, options);
    });
    return out;
}

BoostModelParams fit_boosting(const Matrix& X, const LabelVector& y,
                              const BoostParams& params, const BinnedMatrix* binned) {
    BoostModelParams out;
    out.learning_rate = params.learning_rate;
    out.stages.reserve(static_cast<std::size_t>(params.stages));
    std::vector<double> F(X.rows(), 0.0);
    for (int stage = 0; stage < params.stages; ++stage) {
        out.stages.push_back(
            binned ? boost_fit_stage_binned(X, *binned, y, F, params.learning_rate, params.tree)
                   : boost_fit_stage(X, y, F, params.learning_rate, params.tree));
    }
    return out;
}

GaussianNbParams fit_gaussian_nb(const Matrix& X, const LabelVector& y,
                                 double var_smoothing_factor) {
    std::size_t d = X.cols();
    GaussianNbParams out;
    out.mean_benign.assign(d, 0.0);
    out.mean_malicious.assign(d, 0.0);
    out.var_benign.assign(d, 0.0);
    out.var_malicious.assign(d, 0.0);

    long n0 = 0, n1 = 0;
    for (int label : y) (label ? n1 : n0)++;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        auto& mean = y[i] ? out.mean_malicious : out.mean_benign;
        for (std::size_t j = 0; j < d; ++j) mean[j] += X.at(i, j);
    }
    for (std::size_t j = 0; j < d; ++j) {
        out.mean_benign[j] /= static_cast<double>(n0);
        out.mean_malicious[j] /= static_cast<double>(n1);
    }
    for (std::size_t i = 0; i < X.rows(); ++i) {
        const auto& mean = y[i] ? out.mean_malicious : out.mean_benign;
        auto& var = y[i] ? out.var_malicious : out.var_benign;
        for (std::size_t j = 0; j < d; ++j) {
            double delta = X.at(i, j) - mean[j];
            var[j] += delta * delta;
        }
    }

    // Smoothing: add factor * max overall feature variance to every class
    // variance so constant features stay finite.
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < X.rows(); ++i) mean += X.at(i, j);
        mean /= static_cast<double>(X.rows());
        double var = 0.0;
        for (std::size_t i = 0; i < X.rows(); ++i) {
            double delta = X.at(i, j) - mean;
            var += delta * delta;
        }
        max_var = std::max(max_var, var / static_cast<double>(X.rows()));
    }
    double eps = var_smoothing_factor * max_var;
    if (eps <= 0.0) eps = var_smoothing_factor;
    for (std::size_t j = 0; j < d; ++j) {
        out.var_benign[j] = out.var_benign[j] / static_cast<double>(n0) + eps;
        out.var_malicious[j] = out.var_malicious[j] / static_cast<double>(n1) + eps;
    }

    double n = static_cast<double>(n0 + n1);
    out.log_prior_benign = std::log(static_cast<double>(n0) / n);
    out.log_prior_malicious = std::log(static_cast<double>(n1) / n);
    return out;
}

LogisticModelParams fit_logistic(const Matrix& X, const LabelVector& y,
                                 const LogisticParams& params) {
    LogisticModelParams out;
    out.weights.assign(X.cols(), 0.0);
    out.bias = 0.0;
    for (int epoch = 0; epoch < params.epochs; ++epoch)
        logistic_fit_step(out.weights, out.bias, X, y, params.learning_rate, params.l2);
    return out;
}

} // namespace

FittedModel fit(ModelKind kind, const Matrix& X, const LabelVector& y,
                const TrainConfig& config) {
    if (X.rows() != y.size())
        throw DimensionMismatch("matrix rows " + std::to_string(X.rows()) +
                                " != label count " + std::to_string(y.size()));
    if (X.rows() < 2) throw TooFewSamples("need at least 2 training samples");

    long n1 = std::accumulate(y.begin(), y.end(), 0L);
    long n0 = static_cast<long>(y.size()) - n1;
    if (n0 == 0 || n1 == 0) {
        // Degenerate single-class training data: constant model scoring that
        // class's probability 1 (rule-labeled subsets can produce this).
        return FittedModel(kind, X.cols(), ConstantModelParams{n0 == 0 ? 1.0 : 0.0});
    }

    switch (kind) {
    case ModelKind::decision_tree: {
        DecisionTree::FitOptions options;
        options.params = config.tree;
        return FittedModel(kind, X.cols(), TreeModelParams{DecisionTree::fit(X, y, options)});
    }
    case ModelKind::random_forest:
        return FittedModel(kind, X.cols(),
                           fit_tree_ensemble(X, y, config.forest, config.tree, false,
                                             config.seed));
    case ModelKind::extra_trees:
        return FittedModel(kind, X.cols(),
                           fit_tree_ensemble(X, y, config.extra_trees, config.tree, true,
                                             config.seed));
    case ModelKind::bagging:
        return FittedModel(kind, X.cols(),
                           fit_tree_ensemble(X, y, config.bagging, config.tree, false,
                                             config.seed));
    case ModelKind::gradient_boosting:
        return FittedModel(kind, X.cols(), fit_boosting(X, y, config.boost, nullptr));
    case ModelKind::hist_gradient_boosting: {
        BinnedMatrix binned = histogram_bin(X, config.hist_max_bins);
        return FittedModel(kind, X.cols(), fit_boosting(X, y, config.boost, &binned));
    }
    case ModelKind::knn: {
        KnnModelParams params;
        params.train = X;
        params.labels = y;
        params.k = config.knn.k;
        return FittedModel(kind, X.cols(), std::move(params));
    }
    case ModelKind::logistic_regression:
        return FittedModel(kind, X.cols(), fit_logistic(X, y, config.logistic));
    case ModelKind::gaussian_nb:
        return FittedModel(kind, X.cols(),
                           fit_gaussian_nb(X, y, config.nb_var_smoothing));
    }
    throw Error("unhandled model kind");
}

namespace {

double knn_score(const KnnModelParams& params, std::span<const double> x) {
    std::size_t n = params.train.rows();
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.k), n);
    // (squared distance, row index); distance ties break on the lower index.
    std::vector<std::pair<double, std::size_t>> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = params.train.row(i);
        double dist = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            double delta = row[j] - x[j];
            dist += delta * delta;
        }
        order[i] = {dist, i};
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                      order.end());
    long malicious = 0;
    for (std::size_t i = 0; i < k; ++i)
        malicious += params.labels[order[i].second];
    return static_cast<double>(malicious) / static_cast<double>(k);
}

double gaussian_nb_score(const GaussianNbParams& params, std::span<const double> x) {
    double log_b = params.log_prior_benign;
    double log_m = params.log_prior_malicious;
    constexpr double kLog2Pi = 1.8378770664093453;
    for (std::size_t j = 0; j < x.size(); ++j) {
        double db = x[j] - params.mean_benign[j];
        log_b -= 0.5 * (kLog2Pi + std::log(params.var_benign[j]) +
                        db * db / params.var_benign[j]);
        double dm = x[j] - params.mean_malicious[j];
        log_m -= 0.5 * (kLog2Pi + std::log(params.var_malicious[j]) +
                        dm * dm / params.var_malicious[j]);
    }
    double hi = std::max(log_b, log_m);
    double zb = std::exp(log_b - hi), zm = std::exp(log_m - hi);
    return zm / (zb + zm);
}

struct ScoreVisitor {
    std::span<const double> x;

    double operator()(const ConstantModelParams& p) const { return p.score; }
    double operator()(const TreeModelParams& p) const { return p.tree.score(x); }
    double operator()(const EnsembleModelParams& p) const {
        double total = 0.0;
        for (const auto& member : p.members) total += member.score(x);
        return total / static_cast<double>(p.members.size());
    }
    double operator()(const BoostModelParams& p) const {
        double raw = 0.0;
        for (const auto& stage : p.stages) raw += stage.value(x);
        return sigmoid(p.learning_rate * raw);
    }
    double operator()(const KnnModelParams& p) const { return knn_score(p, x); }
    double operator()(const LogisticModelParams& p) const {
        double z = p.bias;
        for (std::size_t j = 0; j < x.size(); ++j) z += p.weights[j] * x[j];
        return sigmoid(z);
    }
    double operator()(const GaussianNbParams& p) const { return gaussian_nb_score(p, x); }
};

} // namespace

double FittedModel::predict_score(std::span<const double> x) const {
    if (x.size() != input_dimension_)
        throw DimensionMismatch("input size " + std::to_string(x.size()) +
                                " != model dimension " + std::to_string(input_dimension_));
    double score = std::visit(ScoreVisitor{x}, params_);
    return std::clamp(score, 0.0, 1.0);
}

Prediction FittedModel::predict(std::span<const double> x, double threshold) const {
    double score = predict_score(x);
    return Prediction{score, score >= threshold ? Label::malicious : Label::benign};
}

} // namespace pkgtriage
