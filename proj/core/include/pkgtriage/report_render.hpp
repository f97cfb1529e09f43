#ifndef PKGTRIAGE_REPORT_RENDER_HPP
#define PKGTRIAGE_REPORT_RENDER_HPP

#include "pkgtriage/evaluation.hpp"

#include <string>
#include <vector>

namespace pkgtriage {

// Model summaries ordered by descending mean validation AUC; ties break on
// the model name ascending.
std::vector<ModelSummary> rank_models(const EvaluationReport& report);

enum class TableFormat { markdown, csv };

// Train-set and validation-set tables in the column order
// Accuracy, Precision, Recall, F1, FPR, FNR, AUC; rows follow rank_models.
std::string render_tables(const EvaluationReport& report, TableFormat format);

// Pooled validation ROC of one model as `fpr,tpr` lines.
std::string roc_points_csv(const ModelSummary& summary);

// All pooled validation curves on one axis pair.
std::string render_roc_svg(const EvaluationReport& report);

} // namespace pkgtriage

#endif // PKGTRIAGE_REPORT_RENDER_HPP
