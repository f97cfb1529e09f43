// pkgtriage: classify open-source packages as benign or malicious from
// dynamic-analysis behavior reports. Pipeline subcommands mirror the stages:
// ingest -> label -> featurize -> evaluate -> classify -> report.

#include "pkgtriage/csv.hpp"
#include "pkgtriage/errors.hpp"
#include "pkgtriage/evaluation.hpp"
#include "pkgtriage/features.hpp"
#include "pkgtriage/ingest.hpp"
#include "pkgtriage/labeling.hpp"
#include "pkgtriage/models.hpp"
#include "pkgtriage/report_render.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pkgtriage;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMalicious = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileUnreadable(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

std::vector<ModelKind> parse_kinds(const std::string& spec) {
    std::vector<ModelKind> kinds;
    if (spec == "all") {
        auto all = all_model_kinds();
        return {all.begin(), all.end()};
    }
    std::istringstream in(spec);
    std::string name;
    while (std::getline(in, name, ',')) {
        if (!name.empty()) kinds.push_back(model_kind_from_string(name));
    }
    if (kinds.empty()) throw Error("no model kinds given");
    return kinds;
}

// --- ingest ---

int cmd_ingest(const std::string& reports_dir, const std::string& out_path,
               const std::string& count_mode) {
    (void)count_mode; // table export always records full lists
    if (!fs::is_directory(reports_dir)) {
        std::cerr << "error: not a directory: " << reports_dir << "\n";
        return kExitError;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(reports_dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<BehaviorReport> reports;
    std::size_t unparseable = 0;
    for (const auto& file : files) {
        try {
            reports.push_back(parse_report(read_file(file.string())));
        } catch (const Error& e) {
            std::cerr << "warning: skipping " << file.string() << ": " << e.what() << "\n";
            ++unparseable;
        }
    }
    if (reports.empty()) {
        std::cerr << "error: no parseable reports in " << reports_dir << "\n";
        return kExitError;
    }

    auto table = build_table(std::move(reports));
    std::cout << "parsed rows: " << table.size();
    if (unparseable) std::cout << " (" << unparseable << " files skipped)";
    std::cout << "\n";

    auto deduped = dedupe(table);
    std::cout << "after dedupe: " << deduped.size() << "\n";
    auto complete = drop_incomplete(deduped);
    std::cout << "after completeness filter: " << complete.size() << "\n";

    std::size_t duplicates = table.size() - deduped.size();
    std::size_t incomplete = deduped.size() - complete.size();
    std::cout << table.size() << " read, " << duplicates << " duplicates removed, "
              << incomplete << " incomplete removed\n";

    write_file(out_path, table_to_csv(complete));
    std::cout << "wrote " << out_path << " (" << complete.size() << " rows)\n";
    return kExitOk;
}

// --- label ---

int cmd_label(const std::string& in_path, const std::string& advisories_path,
              const std::string& rules_path, const std::string& benign_path,
              const std::string& count_mode_name, const std::string& out_path) {
    auto table = table_from_csv(read_file(in_path));
    AdvisorySet advisories;
    if (!advisories_path.empty()) advisories = load_advisories(advisories_path);
    RuleConfig rules = rules_path.empty() ? default_rules() : load_rules(rules_path);
    AdvisorySet allowlist;
    if (!benign_path.empty()) allowlist = load_advisories(benign_path);

    std::vector<std::string> warnings;
    auto samples = assign_labels(table, advisories, rules, allowlist, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    CountMode mode = count_mode_from_string(count_mode_name);
    long malicious = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto counts = extract_counts(table.rows[i], mode);
        samples[i].n_commands = counts.n_commands;
        samples[i].n_domains = counts.n_domains;
        samples[i].n_ips = counts.n_ips;
        if (samples[i].label == Label::malicious) ++malicious;
    }

    write_file(out_path, labeled_to_csv(samples, count_mode_name));
    std::cout << samples.size() << " labeled: " << malicious << " malicious, "
              << (static_cast<long>(samples.size()) - malicious) << " benign\n";
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

// --- featurize ---

int cmd_featurize(const std::string& in_path, const std::string& out_path,
                  const std::string& encoder_out, bool raw_counts) {
    auto samples = labeled_from_csv(read_file(in_path));
    if (samples.empty()) {
        std::cerr << "error: no samples in " << in_path << "\n";
        return kExitError;
    }
    std::vector<FeatureCounts> counts;
    std::vector<int> labels;
    std::vector<PackageId> ids;
    for (const auto& s : samples) {
        counts.push_back({s.n_commands, s.n_domains, s.n_ips});
        labels.push_back(s.label == Label::malicious ? 1 : 0);
        ids.push_back(s.id);
    }

    if (raw_counts) {
        std::string out = csv::format_meta_line(
            "features", {{"schema_version", "1"}, {"raw_counts", "true"}});
        out += "label,n_commands,n_domains,n_ips,package\n";
        for (std::size_t i = 0; i < samples.size(); ++i) {
            out += csv::format_row({labels[i] ? "malicious" : "benign",
                                    std::to_string(counts[i].n_commands),
                                    std::to_string(counts[i].n_domains),
                                    std::to_string(counts[i].n_ips), ids[i].spec()});
        }
        write_file(out_path, out);
    } else {
        EncoderSpec spec = EncoderSpec::fit(counts);
        write_file(out_path, encoded_to_csv(spec, counts, labels, ids));
        if (!encoder_out.empty()) write_file(encoder_out, spec.to_json());
        std::cout << "encoder dimension: " << spec.dimension() << "\n";
    }
    std::cout << "wrote " << out_path << " (" << samples.size() << " rows)\n";
    return kExitOk;
}

// --- evaluate ---

json parse_json_document(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(what + ": " + e.what());
    }
}

void write_model_bundle(const std::string& path, const FittedModel& model,
                        const EncoderSpec* encoder, const std::string& count_mode,
                        bool raw_counts, double threshold) {
    json doc;
    doc["schema_version"] = 1;
    doc["count_mode"] = count_mode;
    doc["raw_counts"] = raw_counts;
    doc["threshold"] = threshold;
    doc["model"] = parse_json_document(model.to_json(), "model");
    if (encoder) doc["encoder"] = parse_json_document(encoder->to_json(), "encoder");
    write_file(path, doc.dump(2) + "\n");
}

int cmd_evaluate(const std::string& features_path, const std::string& kinds_spec,
                 int k, std::uint64_t seed, const std::string& averaging_name,
                 double threshold, bool raw_counts, const std::string& out_path,
                 const std::string& roc_dir, const std::string& format_name,
                 const std::string& model_out, const std::string& model_kind_name) {
    std::string count_mode;
    auto samples = labeled_from_csv(read_file(features_path), &count_mode);
    auto kinds = parse_kinds(kinds_spec);

    CrossValidateOptions options;
    options.k = k;
    options.seed = seed;
    options.averaging = averaging_from_string(averaging_name);
    options.threshold = threshold;
    options.raw_counts = raw_counts;

    EvaluationReport report = cross_validate(samples, kinds, options);
    report.count_mode = count_mode;

    write_file(out_path, report.to_json());
    std::cout << "wrote " << out_path << "\n";

    TableFormat format = format_name == "csv" ? TableFormat::csv : TableFormat::markdown;
    std::string tables_path =
        out_path + (format == TableFormat::csv ? ".tables.csv" : ".tables.md");
    write_file(tables_path, render_tables(report, format));
    std::cout << "wrote " << tables_path << "\n";

    if (!roc_dir.empty()) {
        fs::create_directories(roc_dir);
        for (const auto& summary : report.means) {
            auto path = fs::path(roc_dir) / (to_string(summary.model) + ".csv");
            write_file(path.string(), roc_points_csv(summary));
        }
        auto svg_path = fs::path(roc_dir) / "roc_curves.svg";
        write_file(svg_path.string(), render_roc_svg(report));
        std::cout << "wrote ROC files to " << roc_dir << "\n";
    }

    auto ranked = rank_models(report);
    std::cout << "validation ranking (mean AUC):\n";
    for (const auto& m : ranked) {
        char line[128];
        std::snprintf(line, sizeof line, "  %-24s %.4f\n", to_string(m.model).c_str(),
                      m.mean_validation.auc);
        std::cout << line;
    }

    if (!model_out.empty()) {
        ModelKind deploy_kind =
            model_kind_name.empty() ? ranked.front().model
                                    : model_kind_from_string(model_kind_name);
        std::vector<FeatureCounts> counts;
        LabelVector labels;
        for (const auto& s : samples) {
            counts.push_back({s.n_commands, s.n_domains, s.n_ips});
            labels.push_back(s.label == Label::malicious ? 1 : 0);
        }
        TrainConfig config = options.train;
        config.seed = seed;
        if (raw_counts) {
            FittedModel model = fit(deploy_kind, raw_count_matrix(counts), labels, config);
            write_model_bundle(model_out, model, nullptr, count_mode, true, threshold);
        } else {
            EncoderSpec spec = EncoderSpec::fit(counts);
            FittedModel model =
                fit(deploy_kind, encode_matrix(spec, counts), labels, config);
            write_model_bundle(model_out, model, &spec, count_mode, false, threshold);
        }
        std::cout << "wrote " << model_out << " (" << to_string(deploy_kind)
                  << ", fitted on all " << samples.size() << " samples)\n";
    }
    return kExitOk;
}

// --- classify ---

int cmd_classify(const std::string& model_path, const std::string& report_path,
                 double threshold_override, bool threshold_given,
                 const std::string& rules_path) {
    json bundle = parse_json_document(read_file(model_path), "model bundle");
    if (bundle.at("schema_version").get<int>() != 1)
        throw Error("unsupported model bundle schema_version");
    FittedModel model = FittedModel::from_json(bundle.at("model").dump());
    CountMode mode = count_mode_from_string(bundle.at("count_mode").get<std::string>());
    bool raw_counts = bundle.at("raw_counts").get<bool>();
    double threshold =
        threshold_given ? threshold_override : bundle.at("threshold").get<double>();

    BehaviorReport report = parse_report(read_file(report_path));
    FeatureCounts counts = extract_counts(report, mode);

    std::vector<double> x;
    if (raw_counts) {
        x = {static_cast<double>(counts.n_commands), static_cast<double>(counts.n_domains),
             static_cast<double>(counts.n_ips)};
    } else {
        if (!bundle.contains("encoder")) throw Error("model bundle lacks encoder spec");
        EncoderSpec spec = EncoderSpec::from_json(bundle.at("encoder").dump());
        x = spec.encode(counts);
    }

    Prediction prediction = model.predict(x, threshold);
    RuleConfig rules = rules_path.empty() ? default_rules() : load_rules(rules_path);
    auto evidence = label_by_rules(report, rules);

    std::string reasons = evidence.reasons.empty() ? "-" : csv::join_list(evidence.reasons);
    char line[64];
    std::snprintf(line, sizeof line, "%.6f", prediction.score);
    std::cout << to_string(prediction.label) << " " << line << " " << reasons << "\n";
    return prediction.label == Label::malicious ? kExitMalicious : kExitOk;
}

// --- report ---

int cmd_report(const std::string& in_path, const std::string& format_name,
               const std::string& out_path) {
    auto report = EvaluationReport::from_json(read_file(in_path));
    TableFormat format = format_name == "csv" ? TableFormat::csv : TableFormat::markdown;
    std::string rendered = render_tables(report, format);
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        write_file(out_path, rendered);
        std::cout << "wrote " << out_path << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"package behavior triage toolkit"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse raw reports into a sample table");
    std::string reports_dir, ingest_out, ingest_count_mode = "standard";
    ingest->add_option("--reports-dir", reports_dir, "directory of report documents")
        ->required();
    ingest->add_option("--out", ingest_out, "output sample table CSV")->required();
    ingest->add_option("--count-mode", ingest_count_mode, "standard|distinct|raw");

    // label
    auto* label = app.add_subcommand("label", "assign ground-truth labels");
    std::string label_in, advisories_path, rules_path, benign_path, label_out;
    std::string label_count_mode = "standard";
    label->add_option("--in", label_in, "sample table CSV")->required();
    label->add_option("--advisories", advisories_path, "advisory feed file");
    label->add_option("--rules", rules_path, "rules config JSON");
    label->add_option("--benign", benign_path, "known-benign allowlist file");
    label->add_option("--count-mode", label_count_mode, "standard|distinct|raw");
    label->add_option("--out", label_out, "output labeled CSV")->required();

    // featurize
    auto* featurize = app.add_subcommand("featurize", "one-hot encode labeled counts");
    std::string feat_in, feat_out, encoder_out;
    bool feat_raw = false;
    featurize->add_option("--in", feat_in, "labeled CSV")->required();
    featurize->add_option("--out", feat_out, "output feature CSV")->required();
    featurize->add_option("--encoder-out", encoder_out, "output encoder spec JSON");
    featurize->add_flag("--raw-counts", feat_raw, "bypass one-hot encoding");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "stratified k-fold cross-validation");
    std::string eval_features, kinds_spec = "all", eval_out, roc_dir, eval_format = "md";
    std::string averaging = "weighted", model_out, model_kind;
    int k = 10;
    std::uint64_t seed = 42;
    double eval_threshold = 0.5;
    bool eval_raw = false;
    evaluate->add_option("--features", eval_features, "labeled CSV")->required();
    evaluate->add_option("--kinds", kinds_spec, "'all' or comma-separated model kinds");
    evaluate->add_option("--k", k, "fold count (default 10)");
    evaluate->add_option("--seed", seed, "harness seed (default 42)");
    evaluate->add_option("--averaging", averaging, "weighted|positive_class");
    evaluate->add_option("--threshold", eval_threshold, "score threshold (default 0.5)");
    evaluate->add_flag("--raw-counts", eval_raw, "feed raw counts instead of one-hot");
    evaluate->add_option("--out", eval_out, "output report JSON")->required();
    evaluate->add_option("--roc-dir", roc_dir, "directory for ROC exports");
    evaluate->add_option("--format", eval_format, "table format: md|csv");
    evaluate->add_option("--model-out", model_out, "fit a model on all samples and save it");
    evaluate->add_option("--model-kind", model_kind,
                         "kind for --model-out (default: top-ranked)");

    // classify
    auto* classify = app.add_subcommand("classify", "score one report with a saved model");
    std::string model_path, report_path, classify_rules;
    double classify_threshold = 0.5;
    classify->add_option("--model", model_path, "model bundle JSON")->required();
    classify->add_option("--report", report_path, "behavior report document")->required();
    auto* threshold_opt =
        classify->add_option("--threshold", classify_threshold, "override bundle threshold");
    classify->add_option("--rules", classify_rules, "rules config for printed reasons");

    // report
    auto* report = app.add_subcommand("report", "render tables from a report document");
    std::string report_in, report_format = "md", report_out;
    report->add_option("--in", report_in, "report JSON")->required();
    report->add_option("--format", report_format, "md|csv");
    report->add_option("--out", report_out, "output path (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(ingest))
            return cmd_ingest(reports_dir, ingest_out, ingest_count_mode);
        if (app.got_subcommand(label))
            return cmd_label(label_in, advisories_path, rules_path, benign_path,
                             label_count_mode, label_out);
        if (app.got_subcommand(featurize))
            return cmd_featurize(feat_in, feat_out, encoder_out, feat_raw);
        if (app.got_subcommand(evaluate))
            return cmd_evaluate(eval_features, kinds_spec, k, seed, averaging,
                                eval_threshold, eval_raw, eval_out, roc_dir, eval_format,
                                model_out, model_kind);
        if (app.got_subcommand(classify))
            return cmd_classify(model_path, report_path, classify_threshold,
                                threshold_opt->count() > 0, classify_rules);
        if (app.got_subcommand(report))
            return cmd_report(report_in, report_format, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
