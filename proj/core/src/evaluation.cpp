#include "pkgtriage/evaluation.hpp"

#include "pkgtriage/errors.hpp"
#include "pkgtriage/rng.hpp"
#include "parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

using nlohmann::json;

namespace pkgtriage {

std::string to_string(Averaging a) {
    return a == Averaging::weighted ? "weighted" : "positive_class";
}

Averaging averaging_from_string(const std::string& s) {
    if (s == "weighted") return Averaging::weighted;
    if (s == "positive_class") return Averaging::positive_class;
    throw Error("unknown averaging mode '" + s + "'");
}

FoldPlan stratified_kfold(std::span<const Label> labels, int k, std::uint64_t seed) {
    if (k < 2) throw BadK("k must be >= 2, got " + std::to_string(k));

    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i] == Label::malicious ? 1 : 0].push_back(i);
    for (int c = 0; c < 2; ++c) {
        if (by_class[c].size() < static_cast<std::size_t>(k))
            throw ClassTooSmall(std::string(c ? "malicious" : "benign") + " has " +
                                std::to_string(by_class[c].size()) + " samples, need >= " +
                                std::to_string(k));
    }

    FoldPlan plan;
    plan.k = k;
    plan.assignments.assign(labels.size(), -1);

    // Each class is shuffled and dealt in chunks; the folds receiving the
    // remainder chunks rotate across classes so total fold sizes stay within
    // one of each other.
    int extra_offset = 0;
    for (int c = 0; c < 2; ++c) {
        auto& indices = by_class[c];
        Rng rng(substream_seed(seed, static_cast<std::uint64_t>(c)));
        for (std::size_t i = indices.size(); i > 1; --i) {
            auto j = rng.below(i);
            std::swap(indices[i - 1], indices[j]);
        }
        auto q = indices.size() / static_cast<std::size_t>(k);
        int r = static_cast<int>(indices.size() % static_cast<std::size_t>(k));
        std::size_t cursor = 0;
        for (int fold = 0; fold < k; ++fold) {
            int rotated = (fold - extra_offset + k) % k;
            std::size_t take = q + (rotated < r ? 1 : 0);
            for (std::size_t t = 0; t < take; ++t)
                plan.assignments[indices[cursor++]] = fold;
        }
        extra_offset = (extra_offset + r) % k;
    }
    return plan;
}

ConfusionCounts confusion(std::span<const Label> predictions,
                          std::span<const Label> truth) {
    if (predictions.size() != truth.size())
        throw LengthMismatch("predictions " + std::to_string(predictions.size()) +
                             " vs truth " + std::to_string(truth.size()));
    ConfusionCounts out;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        bool pred_mal = predictions[i] == Label::malicious;
        bool true_mal = truth[i] == Label::malicious;
        if (pred_mal && true_mal) out.tp++;
        else if (pred_mal && !true_mal) out.fp++;
        else if (!pred_mal && true_mal) out.fn++;
        else out.tn++;
    }
    return out;
}

namespace {

double ratio_or_zero(long num, long den, bool& flagged) {
    if (den == 0) {
        flagged = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

MetricSet compute_metrics(const ConfusionCounts& counts,
                          std::span<const double> scores,
                          std::span<const Label> truth, Averaging averaging) {
    if (scores.size() != truth.size())
        throw LengthMismatch("scores " + std::to_string(scores.size()) + " vs truth " +
                             std::to_string(truth.size()));
    long n = counts.total();
    if (static_cast<std::size_t>(n) != truth.size())
        throw LengthMismatch("confusion total " + std::to_string(n) +
                             " vs truth " + std::to_string(truth.size()));

    MetricSet m;
    bool flagged = false;
    m.accuracy = ratio_or_zero(counts.tp + counts.tn, n, flagged);
    m.fpr = ratio_or_zero(counts.fp, counts.fp + counts.tn, flagged);
    m.fnr = ratio_or_zero(counts.fn, counts.fn + counts.tp, flagged);

    double precision_mal = ratio_or_zero(counts.tp, counts.tp + counts.fp, flagged);
    double recall_mal = ratio_or_zero(counts.tp, counts.tp + counts.fn, flagged);
    if (averaging == Averaging::positive_class) {
        m.precision = precision_mal;
        m.recall = recall_mal;
    } else {
        // Support-weighted mean of the per-class values; benign plays the
        // positive role for its own precision/recall.
        double precision_ben = ratio_or_zero(counts.tn, counts.tn + counts.fn, flagged);
        double recall_ben = ratio_or_zero(counts.tn, counts.tn + counts.fp, flagged);
        long support_mal = counts.tp + counts.fn;
        long support_ben = counts.tn + counts.fp;
        m.precision = (static_cast<double>(support_mal) * precision_mal +
                       static_cast<double>(support_ben) * precision_ben) /
                      static_cast<double>(n);
        m.recall = (static_cast<double>(support_mal) * recall_mal +
                    static_cast<double>(support_ben) * recall_ben) /
                   static_cast<double>(n);
    }
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    else {
        m.f1 = 0.0;
        flagged = true;
    }
    m.auc = auc(roc_curve(scores, truth));
    m.zero_division = flagged;
    return m;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const Label> truth) {
    if (scores.size() != truth.size())
        throw LengthMismatch("scores vs truth");
    long n_pos = 0, n_neg = 0;
    for (Label t : truth) (t == Label::malicious ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw SingleClass();

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        double s = scores[order[i]];
        // Tied scores collapse into a single sweep point.
        while (i < order.size() && scores[order[i]] == s) {
            (truth[order[i]] == Label::malicious ? tp : fp)++;
            ++i;
        }
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                                static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    return curve;
}

double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    return area;
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

MetricSet mean_of(std::span<const MetricSet> sets) {
    MetricSet mean;
    for (const auto& s : sets) {
        mean.accuracy += s.accuracy;
        mean.precision += s.precision;
        mean.recall += s.recall;
        mean.f1 += s.f1;
        mean.fpr += s.fpr;
        mean.fnr += s.fnr;
        mean.auc += s.auc;
        mean.zero_division = mean.zero_division || s.zero_division;
    }
    auto n = static_cast<double>(sets.size());
    mean.accuracy /= n;
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    mean.fpr /= n;
    mean.fnr /= n;
    mean.auc /= n;
    return mean;
}

struct FoldData {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> validation_rows;
    Matrix train_X;
    Matrix validation_X;
    LabelVector train_y;
    LabelVector validation_y;
    std::vector<Label> train_labels;
    std::vector<Label> validation_labels;
    std::size_t encoder_dimension = 0;
    long validation_oov_hits = 0;
};

MetricSet split_metrics(const FittedModel& model, const Matrix& X,
                        std::span<const Label> truth, double threshold,
                        Averaging averaging, std::vector<double>& scores_out) {
    scores_out.resize(X.rows());
    std::vector<Label> predicted(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        scores_out[i] = model.predict_score(X.row(i));
        predicted[i] = scores_out[i] >= threshold ? Label::malicious : Label::benign;
    }
    auto counts = confusion(predicted, truth);
    return compute_metrics(counts, scores_out, truth, averaging);
}

} // namespace

std::string dataset_fingerprint(std::span<const LabeledSample> samples) {
    std::string canonical;
    for (const auto& s : samples) {
        canonical += s.id.spec();
        canonical += ',';
        canonical += to_string(s.label);
        canonical += ',';
        canonical += std::to_string(s.n_commands) + "," + std::to_string(s.n_domains) +
                      "," + std::to_string(s.n_ips);
        canonical += '\n';
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical)));
    return std::string("fnv1a64:") + buf;
}

EvaluationReport cross_validate(std::span<const LabeledSample> samples,
                                std::span<const ModelKind> kinds,
                                const CrossValidateOptions& options) {
    std::vector<Label> labels(samples.size());
    std::vector<FeatureCounts> counts(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        labels[i] = samples[i].label;
        counts[i] = {samples[i].n_commands, samples[i].n_domains, samples[i].n_ips};
    }

    FoldPlan plan = stratified_kfold(labels, options.k, options.seed);

    // Encoders are refitted inside every fold on the training rows only; the
    // validation rows can therefore activate OOV slots, which is recorded.
    std::vector<FoldData> folds(static_cast<std::size_t>(options.k));
    for (int f = 0; f < options.k; ++f) {
        auto& fold = folds[static_cast<std::size_t>(f)];
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (plan.assignments[i] == f) fold.validation_rows.push_back(i);
            else fold.train_rows.push_back(i);
        }
        std::vector<FeatureCounts> train_counts, validation_counts;
        for (auto r : fold.train_rows) {
            train_counts.push_back(counts[r]);
            fold.train_y.push_back(labels[r] == Label::malicious ? 1 : 0);
            fold.train_labels.push_back(labels[r]);
        }
        for (auto r : fold.validation_rows) {
            validation_counts.push_back(counts[r]);
            fold.validation_y.push_back(labels[r] == Label::malicious ? 1 : 0);
            fold.validation_labels.push_back(labels[r]);
        }
        if (options.raw_counts) {
            fold.train_X = raw_count_matrix(train_counts);
            fold.validation_X = raw_count_matrix(validation_counts);
            fold.encoder_dimension = 3;
        } else {
            EncoderSpec spec = EncoderSpec::fit(train_counts);
            fold.train_X = encode_matrix(spec, train_counts);
            fold.validation_X = encode_matrix(spec, validation_counts);
            fold.encoder_dimension = spec.dimension();
            for (const auto& c : validation_counts)
                if (spec.hits_oov(c)) fold.validation_oov_hits++;
        }
    }

    struct Task {
        ModelKind kind;
        int fold;
    };
    std::vector<Task> tasks;
    for (ModelKind kind : kinds)
        for (int f = 0; f < options.k; ++f) tasks.push_back({kind, f});

    std::vector<FoldResult> results(tasks.size());
    std::vector<std::vector<double>> validation_scores(tasks.size());
    detail::parallel_for(tasks.size(), [&](std::size_t t) {
        const Task& task = tasks[t];
        const FoldData& fold = folds[static_cast<std::size_t>(task.fold)];

        TrainConfig config = options.train;
        config.seed = substream_seed(substream_seed(options.seed,
                                                    static_cast<std::uint64_t>(task.fold)),
                                     static_cast<std::uint64_t>(task.kind));
        FittedModel model = fit(task.kind, fold.train_X, fold.train_y, config);

        FoldResult& r = results[t];
        r.model = task.kind;
        r.fold = task.fold;
        r.encoder_dimension = fold.encoder_dimension;
        r.validation_oov_hits = fold.validation_oov_hits;

        std::vector<double> scores;
        r.train = split_metrics(model, fold.train_X, fold.train_labels,
                                options.threshold, options.averaging, scores);
        r.validation = split_metrics(model, fold.validation_X, fold.validation_labels,
                                     options.threshold, options.averaging, scores);
        r.validation_roc = roc_curve(scores, fold.validation_labels);
        validation_scores[t] = std::move(scores);
    });

    EvaluationReport report;
    report.seed = options.seed;
    report.k = options.k;
    report.averaging = options.averaging;
    report.raw_counts = options.raw_counts;
    report.dataset_fingerprint = dataset_fingerprint(samples);
    report.n_samples = samples.size();
    for (Label l : labels) (l == Label::malicious ? report.n_malicious : report.n_benign)++;

    // Deterministic report order: model name ascending, then fold.
    std::vector<std::size_t> order(tasks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto na = to_string(tasks[a].kind), nb = to_string(tasks[b].kind);
        if (na != nb) return na < nb;
        return tasks[a].fold < tasks[b].fold;
    });
    for (auto t : order) report.folds.push_back(std::move(results[t]));

    std::vector<ModelKind> sorted_kinds(kinds.begin(), kinds.end());
    std::sort(sorted_kinds.begin(), sorted_kinds.end(), [](ModelKind a, ModelKind b) {
        return to_string(a) < to_string(b);
    });
    for (ModelKind kind : sorted_kinds) {
        ModelSummary summary;
        summary.model = kind;
        std::vector<MetricSet> train_sets, validation_sets;
        for (const auto& fr : report.folds) {
            if (fr.model != kind) continue;
            train_sets.push_back(fr.train);
            validation_sets.push_back(fr.validation);
        }
        summary.mean_train = mean_of(train_sets);
        summary.mean_validation = mean_of(validation_sets);

        // Pool the held-out scores: every sample is scored exactly once.
        std::vector<double> pooled(samples.size(), 0.0);
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (tasks[t].kind != kind) continue;
            const FoldData& fold = folds[static_cast<std::size_t>(tasks[t].fold)];
            for (std::size_t i = 0; i < fold.validation_rows.size(); ++i)
                pooled[fold.validation_rows[i]] = validation_scores[t][i];
        }
        summary.pooled_validation_roc = roc_curve(pooled, labels);
        report.means.push_back(std::move(summary));
    }
    return report;
}

EvaluationReport cross_validate(std::span<const LabeledSample> samples,
                                std::span<const ModelKind> kinds, int k,
                                std::uint64_t seed) {
    CrossValidateOptions options;
    options.k = k;
    options.seed = seed;
    return cross_validate(samples, kinds, options);
}

namespace {

json metrics_to_json(const MetricSet& m) {
    return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
            {"f1", m.f1},             {"fpr", m.fpr},             {"fnr", m.fnr},
            {"auc", m.auc},           {"zero_division", m.zero_division}};
}

MetricSet metrics_from_json(const json& j) {
    MetricSet m;
    m.accuracy = j.at("accuracy").get<double>();
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.fpr = j.at("fpr").get<double>();
    m.fnr = j.at("fnr").get<double>();
    m.auc = j.at("auc").get<double>();
    m.zero_division = j.at("zero_division").get<bool>();
    return m;
}

json roc_to_json(const RocCurve& curve) {
    json arr = json::array();
    for (const auto& p : curve.points) arr.push_back({p.fpr, p.tpr});
    return arr;
}

RocCurve roc_from_json(const json& arr) {
    RocCurve curve;
    for (const auto& p : arr)
        curve.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return curve;
}

} // namespace

std::string EvaluationReport::to_json() const {
    json doc;
    doc["schema_version"] = schema_version;
    doc["seed"] = seed;
    doc["k"] = k;
    doc["averaging"] = to_string(averaging);
    doc["count_mode"] = count_mode;
    doc["raw_counts"] = raw_counts;
    doc["dataset_fingerprint"] = dataset_fingerprint;
    doc["n_samples"] = n_samples;
    doc["n_benign"] = n_benign;
    doc["n_malicious"] = n_malicious;

    json fold_arr = json::array();
    for (const auto& f : folds) {
        fold_arr.push_back({{"model", to_string(f.model)},
                            {"fold", f.fold},
                            {"encoder_dimension", f.encoder_dimension},
                            {"validation_oov_hits", f.validation_oov_hits},
                            {"train", metrics_to_json(f.train)},
                            {"validation", metrics_to_json(f.validation)},
                            {"validation_roc", roc_to_json(f.validation_roc)}});
    }
    doc["folds"] = fold_arr;

    json mean_arr = json::array();
    for (const auto& m : means) {
        mean_arr.push_back({{"model", to_string(m.model)},
                            {"train", metrics_to_json(m.mean_train)},
                            {"validation", metrics_to_json(m.mean_validation)},
                            {"pooled_validation_roc", roc_to_json(m.pooled_validation_roc)}});
    }
    doc["means"] = mean_arr;
    return doc.dump(2) + "\n";
}

EvaluationReport EvaluationReport::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("report document: ") + e.what());
    }
    EvaluationReport report;
    report.schema_version = doc.at("schema_version").get<int>();
    if (report.schema_version != 1)
        throw Error("unsupported report schema_version " +
                    std::to_string(report.schema_version));
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.k = doc.at("k").get<int>();
    report.averaging = averaging_from_string(doc.at("averaging").get<std::string>());
    report.count_mode = doc.at("count_mode").get<std::string>();
    report.raw_counts = doc.at("raw_counts").get<bool>();
    report.dataset_fingerprint = doc.at("dataset_fingerprint").get<std::string>();
    report.n_samples = doc.at("n_samples").get<std::size_t>();
    report.n_benign = doc.at("n_benign").get<long>();
    report.n_malicious = doc.at("n_malicious").get<long>();
    for (const auto& f : doc.at("folds")) {
        FoldResult fr;
        fr.model = model_kind_from_string(f.at("model").get<std::string>());
        fr.fold = f.at("fold").get<int>();
        fr.encoder_dimension = f.at("encoder_dimension").get<std::size_t>();
        fr.validation_oov_hits = f.at("validation_oov_hits").get<long>();
        fr.train = metrics_from_json(f.at("train"));
        fr.validation = metrics_from_json(f.at("validation"));
        fr.validation_roc = roc_from_json(f.at("validation_roc"));
        report.folds.push_back(std::move(fr));
    }
    for (const auto& m : doc.at("means")) {
        ModelSummary summary;
        summary.model = model_kind_from_string(m.at("model").get<std::string>());
        summary.mean_train = metrics_from_json(m.at("train"));
        summary.mean_validation = metrics_from_json(m.at("validation"));
        summary.pooled_validation_roc = roc_from_json(m.at("pooled_validation_roc"));
        report.means.push_back(std::move(summary));
    }
    return report;
}

} // namespace pkgtriage
