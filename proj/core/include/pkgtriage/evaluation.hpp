#ifndef PKGTRIAGE_EVALUATION_HPP
#define PKGTRIAGE_EVALUATION_HPP

#include "pkgtriage/features.hpp"
#include "pkgtriage/labeling.hpp"
#include "pkgtriage/models.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pkgtriage {

// Stratified fold assignment: folds partition the samples, sizes differ by
// at most one, and per-fold class counts stay within one sample of perfect
// proportionality.
struct FoldPlan {
    int k = 0;
    std::vector<int> assignments; // per-sample fold index in [0, k)
};

// Deterministic given seed. Throws BadK (k < 2) or ClassTooSmall (a class
// with fewer than k samples).
FoldPlan stratified_kfold(std::span<const Label> labels, int k, std::uint64_t seed);

struct ConfusionCounts {
    long tp = 0, fp = 0, tn = 0, fn = 0; // malicious = positive
    long total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(std::span<const Label> predictions,
                          std::span<const Label> truth);

enum class Averaging { positive_class, weighted };

std::string to_string(Averaging a);
Averaging averaging_from_string(const std::string& s);

struct MetricSet {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
    double auc = 0.0;
    // Set when a zero denominator forced a metric to 0.
    bool zero_division = false;
};

// Accuracy, precision, recall, F1, FPR, FNR from the confusion counts plus
// AUC from the scores. FPR/FNR always treat malicious as positive; the
// averaging mode only affects precision/recall/F1 (positive-class or
// support-weighted two-class). Division by zero yields 0 with the flag set.
MetricSet compute_metrics(const ConfusionCounts& counts,
                          std::span<const double> scores,
                          std::span<const Label> truth, Averaging averaging);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points; // starts (0,0), ends (1,1), non-decreasing
};

// Threshold sweep over distinct scores descending, ties grouped into single
// points. Throws SingleClass unless both classes are present.
RocCurve roc_curve(std::span<const double> scores, std::span<const Label> truth);

// Trapezoidal area; equals the Mann-Whitney pair statistic within 1e-9.
double auc(const RocCurve& curve);

struct FoldResult {
    ModelKind model = ModelKind::decision_tree;
    int fold = 0;
    std::size_t encoder_dimension = 0;
    // Validation rows whose encoding activated an OOV slot; nonzero values
    // demonstrate the per-fold encoder never saw the validation rows.
    long validation_oov_hits = 0;
    MetricSet train;
    MetricSet validation;
    RocCurve validation_roc;
};

struct ModelSummary {
    ModelKind model = ModelKind::decision_tree;
    MetricSet mean_train;
    MetricSet mean_validation;
    // ROC over the pooled validation scores (every sample scored exactly once
    // while held out).
    RocCurve pooled_validation_roc;
};

struct EvaluationReport {
    int schema_version = 1;
    std::uint64_t seed = 42;
    int k = 10;
    Averaging averaging = Averaging::weighted;
    std::string count_mode = "standard";
    bool raw_counts = false;
    std::string dataset_fingerprint;
    std::size_t n_samples = 0;
    long n_benign = 0;
    long n_malicious = 0;
    std::vector<FoldResult> folds;    // ordered by (model name, fold)
    std::vector<ModelSummary> means;  // ordered by model name

    std::string to_json() const;
    static EvaluationReport from_json(const std::string& text);
};

struct CrossValidateOptions {
    int k = 10;
    std::uint64_t seed = 42;
    Averaging averaging = Averaging::weighted;
    bool raw_counts = false; // feed the three integers directly (ablation)
    double threshold = 0.5;  // for the confusion-based metrics
    TrainConfig train;       // per-model-kind hyperparameters
};

// Full harness: for every fold, fit the one-hot encoder on the training rows
// only, encode both splits, fit each model kind, score both splits, and
// compute train/validation metrics plus the validation ROC. Deterministic
// given the seed.
EvaluationReport cross_validate(std::span<const LabeledSample> samples,
                                std::span<const ModelKind> kinds,
                                const CrossValidateOptions& options);

EvaluationReport cross_validate(std::span<const LabeledSample> samples,
                                std::span<const ModelKind> kinds, int k,
                                std::uint64_t seed);

// FNV-1a 64 over the canonical sample serialization.
std::string dataset_fingerprint(std::span<const LabeledSample> samples);

} // namespace pkgtriage

#endif // PKGTRIAGE_EVALUATION_HPP
