#ifndef PKGTRIAGE_MODELS_HPP
#define PKGTRIAGE_MODELS_HPP

#include "pkgtriage/gbm.hpp"
#include "pkgtriage/labeling.hpp"
#include "pkgtriage/matrix.hpp"
#include "pkgtriage/tree.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pkgtriage {

enum class ModelKind {
    decision_tree,
    random_forest,
    extra_trees,
    bagging,
    gradient_boosting,
    hist_gradient_boosting,
    knn,
    logistic_regression,
    gaussian_nb,
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
std::span<const ModelKind> all_model_kinds();

enum class FeatureSubsetMode { all, sqrt_total };

struct EnsembleParams {
    int members = 100;
    bool bootstrap = true;
    FeatureSubsetMode features = FeatureSubsetMode::sqrt_total;
};

struct BoostParams {
    int stages = 100;
    double learning_rate = 0.1;
    RegressionTreeParams tree{3, 1, 1e-12};
};

struct KnnParams {
    int k = 5;
};

struct LogisticParams {
    double learning_rate = 0.1;
    int epochs = 500;
    double l2 = 1e-4;
};

// Hyperparameters for every kind plus the root seed. The same (config, data)
// produces a bit-identical model. Defaults mirror common framework defaults.
struct TrainConfig {
    std::uint64_t seed = 42;
    TreeParams tree{};
    EnsembleParams forest{100, true, FeatureSubsetMode::sqrt_total};
    EnsembleParams extra_trees{100, false, FeatureSubsetMode::sqrt_total};
    EnsembleParams bagging{100, true, FeatureSubsetMode::all};
    BoostParams boost{};
    int hist_max_bins = 255;
    KnnParams knn{};
    LogisticParams logistic{};
    // Added to every class variance as factor * max feature variance.
    double nb_var_smoothing = 1e-9;
};

struct Prediction {
    double score = 0.0; // malicious-class probability estimate in [0, 1]
    Label label = Label::benign;
};

// --- learned parameter payloads (also the serialization surface) ---

struct ConstantModelParams {
    double score = 0.5;
};

struct TreeModelParams {
    DecisionTree tree;
};

struct EnsembleModelParams {
    std::vector<DecisionTree> members; // score = mean of member scores
};

struct BoostModelParams {
    std::vector<RegressionTree> stages; // score = sigmoid(lr * sum of stages)
    double learning_rate = 0.1;
};

struct KnnModelParams {
    Matrix train;
    std::vector<int> labels;
    int k = 5;
};

struct LogisticModelParams {
    std::vector<double> weights;
    double bias = 0.0;
};

struct GaussianNbParams {
    double log_prior_benign = 0.0;
    double log_prior_malicious = 0.0;
    std::vector<double> mean_benign, var_benign;
    std::vector<double> mean_malicious, var_malicious;
};

using ModelParams =
    std::variant<ConstantModelParams, TreeModelParams, EnsembleModelParams,
                 BoostModelParams, KnnModelParams, LogisticModelParams,
                 GaussianNbParams>;

// An immutable trained classifier scoring inputs in [0, 1]; safe to share
// across threads for scoring.
class FittedModel {
public:
    FittedModel() = default;
    FittedModel(ModelKind kind, std::size_t input_dimension, ModelParams params);

    ModelKind kind() const { return kind_; }
    std::size_t input_dimension() const { return input_dimension_; }
    const ModelParams& params() const { return params_; }

    // Throws DimensionMismatch when x.size() != input_dimension().
    double predict_score(std::span<const double> x) const;
    Prediction predict(std::span<const double> x, double threshold = 0.5) const;

    // Versioned JSON document; reloading reproduces scores within 1e-12.
    std::string to_json() const;
    static FittedModel from_json(const std::string& text);

private:
    ModelKind kind_ = ModelKind::decision_tree;
    std::size_t input_dimension_ = 0;
    ModelParams params_;
};

// Fits one classifier. Deterministic given (kind, X, y, config.seed);
// single-class training data yields a constant model. Throws
// DimensionMismatch or TooFewSamples.
FittedModel fit(ModelKind kind, const Matrix& X, const LabelVector& y,
                const TrainConfig& config);

} // namespace pkgtriage

#endif // PKGTRIAGE_MODELS_HPP
