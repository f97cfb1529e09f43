#include "pkgtriage/report_render.hpp"

#include <algorithm>
#include <cstdio>

namespace pkgtriage {

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string csv_float(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_table(std::string& out, const std::string& title,
                  const std::vector<ModelSummary>& ranked, bool validation,
                  TableFormat format) {
    if (format == TableFormat::markdown) {
        out += "## " + title + "\n\n";
        out += "| model | accuracy | precision | recall | f1 | fpr | fnr | auc |\n";
        out += "|---|---|---|---|---|---|---|---|\n";
        for (const auto& m : ranked) {
            const MetricSet& s = validation ? m.mean_validation : m.mean_train;
            out += "| " + to_string(m.model) + " | " + fixed4(s.accuracy) + " | " +
                   fixed4(s.precision) + " | " + fixed4(s.recall) + " | " + fixed4(s.f1) +
                   " | " + fixed4(s.fpr) + " | " + fixed4(s.fnr) + " | " + fixed4(s.auc) +
                   " |\n";
        }
        out += "\n";
    } else {
        out += "split,model,accuracy,precision,recall,f1,fpr,fnr,auc\n";
        for (const auto& m : ranked) {
            const MetricSet& s = validation ? m.mean_validation : m.mean_train;
            out += (validation ? std::string("validation") : std::string("train")) + "," +
                   to_string(m.model) + "," + csv_float(s.accuracy) + "," +
                   csv_float(s.precision) + "," + csv_float(s.recall) + "," +
                   csv_float(s.f1) + "," + csv_float(s.fpr) + "," + csv_float(s.fnr) +
                   "," + csv_float(s.auc) + "\n";
        }
    }
}

} // namespace

std::vector<ModelSummary> rank_models(const EvaluationReport& report) {
    std::vector<ModelSummary> ranked = report.means;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const ModelSummary& a, const ModelSummary& b) {
                         if (a.mean_validation.auc != b.mean_validation.auc)
                             return a.mean_validation.auc > b.mean_validation.auc;
                         return to_string(a.model) < to_string(b.model);
                     });
    return ranked;
}

std::string render_tables(const EvaluationReport& report, TableFormat format) {
    auto ranked = rank_models(report);
    std::string out;
    if (format == TableFormat::markdown) {
        out += "# Evaluation report\n\n";
        out += "- samples: " + std::to_string(report.n_samples) + " (" +
               std::to_string(report.n_malicious) + " malicious, " +
               std::to_string(report.n_benign) + " benign)\n";
        out += "- folds: " + std::to_string(report.k) +
               ", seed: " + std::to_string(report.seed) + "\n";
        // Weighted averaging reports support-weighted two-class precision and
        // recall; switch to positive_class for malicious-only rates.
        out += "- averaging: " + to_string(report.averaging) + "\n";
        out += "- dataset: " + report.dataset_fingerprint + "\n\n";
    }
    append_table(out, "Training set (per-fold means)", ranked, false, format);
    append_table(out, "Validation set (per-fold means)", ranked, true, format);
    return out;
}

std::string roc_points_csv(const ModelSummary& summary) {
    std::string out = "fpr,tpr\n";
    for (const auto& p : summary.pooled_validation_roc.points)
        out += csv_float(p.fpr) + "," + csv_float(p.tpr) + "\n";
    return out;
}

std::string render_roc_svg(const EvaluationReport& report) {
    constexpr int kWidth = 720, kHeight = 540;
    constexpr double kLeft = 70, kRight = 480, kTop = 40, kBottom = 480;
    static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                    "#bcbd22"};

    auto x_of = [&](double fpr) { return kLeft + fpr * (kRight - kLeft); };
    auto y_of = [&](double tpr) { return kBottom - tpr * (kBottom - kTop); };

    std::string svg;
    char buf[256];
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes and reference diagonal.
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  kLeft, kBottom, kRight, kBottom);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  kLeft, kBottom, kLeft, kTop);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                  "stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n",
                  x_of(0.0), y_of(0.0), x_of(1.0), y_of(1.0));
    svg += buf;
    for (int tick = 0; tick <= 5; ++tick) {
        double v = tick / 5.0;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" "
                      "text-anchor=\"middle\">%.1f</text>\n",
                      x_of(v), kBottom + 16, v);
        svg += buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" "
                      "text-anchor=\"end\">%.1f</text>\n",
                      kLeft - 6, y_of(v) + 4, v);
        svg += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" "
                  "text-anchor=\"middle\">False Positive Rate</text>\n",
                  (kLeft + kRight) / 2, kBottom + 38.0);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" text-anchor=\"middle\" "
                  "transform=\"rotate(-90 %.1f %.1f)\">True Positive Rate</text>\n",
                  kLeft - 44.0, (kTop + kBottom) / 2, kLeft - 44.0, (kTop + kBottom) / 2);
    svg += buf;

    auto ranked = rank_models(report);
    for (std::size_t m = 0; m < ranked.size(); ++m) {
        const char* color = kColors[m % (sizeof kColors / sizeof kColors[0])];
        std::string points;
        for (const auto& p : ranked[m].pooled_validation_roc.points) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x_of(p.fpr), y_of(p.tpr));
            points += buf;
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";

        double ly = kTop + 16.0 * static_cast<double>(m);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                      "stroke=\"%s\" stroke-width=\"3\"/>\n",
                      kRight + 14.0, ly, kRight + 34.0, ly, color);
        svg += buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\">%s (auc %.4f)</text>\n",
                      kRight + 40.0, ly + 4, to_string(ranked[m].model).c_str(),
                      ranked[m].mean_validation.auc);
        svg += buf;
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace pkgtriage
