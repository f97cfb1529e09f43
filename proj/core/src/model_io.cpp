#include "pkgtriage/models.hpp"

#include "pkgtriage/errors.hpp"

#include <json.hpp>

using nlohmann::json;

namespace pkgtriage {

namespace {

constexpr int kModelSchemaVersion = 1;

json tree_nodes_to_json(const std::vector<TreeNode>& nodes) {
    json arr = json::array();
    for (const auto& n : nodes)
        arr.push_back({n.feature, n.threshold, n.left, n.right, n.score});
    return arr;
}

std::vector<TreeNode> tree_nodes_from_json(const json& arr) {
    std::vector<TreeNode> nodes;
    nodes.reserve(arr.size());
    for (const auto& item : arr) {
        TreeNode n;
        n.feature = item.at(0).get<int>();
        n.threshold = item.at(1).get<double>();
        n.left = item.at(2).get<int>();
        n.right = item.at(3).get<int>();
        n.score = item.at(4).get<double>();
        nodes.push_back(n);
    }
    return nodes;
}

json regression_nodes_to_json(const std::vector<RegressionTreeNode>& nodes) {
    json arr = json::array();
    for (const auto& n : nodes)
        arr.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return arr;
}

RegressionTree regression_tree_from_json(const json& arr) {
    RegressionTree tree;
    auto& nodes = tree.mutable_nodes();
    nodes.reserve(arr.size());
    for (const auto& item : arr) {
        RegressionTreeNode n;
        n.feature = item.at(0).get<int>();
        n.threshold = item.at(1).get<double>();
        n.left = item.at(2).get<int>();
        n.right = item.at(3).get<int>();
        n.value = item.at(4).get<double>();
        nodes.push_back(n);
    }
    return tree;
}

struct ParamsToJson {
    json operator()(const ConstantModelParams& p) const {
        return {{"type", "constant"}, {"score", p.score}};
    }
    json operator()(const TreeModelParams& p) const {
        return {{"type", "tree"}, {"nodes", tree_nodes_to_json(p.tree.nodes())}};
    }
    json operator()(const EnsembleModelParams& p) const {
        json members = json::array();
        for (const auto& m : p.members) members.push_back(tree_nodes_to_json(m.nodes()));
        return {{"type", "ensemble"}, {"members", members}};
    }
    json operator()(const BoostModelParams& p) const {
        json stages = json::array();
        for (const auto& s : p.stages) stages.push_back(regression_nodes_to_json(s.nodes()));
        return {{"type", "boost"},
                {"learning_rate", p.learning_rate},
                {"stages", stages}};
    }
    json operator()(const KnnModelParams& p) const {
        json rows = json::array();
        for (std::size_t i = 0; i < p.train.rows(); ++i) {
            auto row = p.train.row(i);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        return {{"type", "knn"}, {"k", p.k}, {"rows", rows}, {"labels", p.labels}};
    }
    json operator()(const LogisticModelParams& p) const {
        return {{"type", "logistic"}, {"weights", p.weights}, {"bias", p.bias}};
    }
    json operator()(const GaussianNbParams& p) const {
        return {{"type", "gaussian_nb"},
                {"log_prior_benign", p.log_prior_benign},
                {"log_prior_malicious", p.log_prior_malicious},
                {"mean_benign", p.mean_benign},
                {"var_benign", p.var_benign},
                {"mean_malicious", p.mean_malicious},
                {"var_malicious", p.var_malicious}};
    }
};

ModelParams params_from_json(const json& doc) {
    const std::string type = doc.at("type").get<std::string>();
    if (type == "constant") {
        return ConstantModelParams{doc.at("score").get<double>()};
    }
    if (type == "tree") {
        return TreeModelParams{DecisionTree::from_nodes(tree_nodes_from_json(doc.at("nodes")))};
    }
    if (type == "ensemble") {
        EnsembleModelParams p;
        for (const auto& m : doc.at("members"))
            p.members.push_back(DecisionTree::from_nodes(tree_nodes_from_json(m)));
        return p;
    }
    if (type == "boost") {
        BoostModelParams p;
        p.learning_rate = doc.at("learning_rate").get<double>();
        for (const auto& s : doc.at("stages"))
            p.stages.push_back(regression_tree_from_json(s));
        return p;
    }
    if (type == "knn") {
        KnnModelParams p;
        p.k = doc.at("k").get<int>();
        p.labels = doc.at("labels").get<std::vector<int>>();
        for (const auto& row : doc.at("rows")) {
            auto values = row.get<std::vector<double>>();
            p.train.push_row(values);
        }
        return p;
    }
    if (type == "logistic") {
        LogisticModelParams p;
        p.weights = doc.at("weights").get<std::vector<double>>();
        p.bias = doc.at("bias").get<double>();
        return p;
    }
    if (type == "gaussian_nb") {
        GaussianNbParams p;
        p.log_prior_benign = doc.at("log_prior_benign").get<double>();
        p.log_prior_malicious = doc.at("log_prior_malicious").get<double>();
        p.mean_benign = doc.at("mean_benign").get<std::vector<double>>();
        p.var_benign = doc.at("var_benign").get<std::vector<double>>();
        p.mean_malicious = doc.at("mean_malicious").get<std::vector<double>>();
        p.var_malicious = doc.at("var_malicious").get<std::vector<double>>();
        return p;
    }
    throw Error("unknown model parameter type '" + type + "'");
}

} // namespace

std::string FittedModel::to_json() const {
    json doc;
    doc["schema_version"] = kModelSchemaVersion;
    doc["kind"] = to_string(kind_);
    doc["input_dimension"] = input_dimension_;
    doc["params"] = std::visit(ParamsToJson{}, params_);
    return doc.dump(2) + "\n";
}

FittedModel FittedModel::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("model document: ") + e.what());
    }
    int version = doc.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
        throw Error("unsupported model schema_version " + std::to_string(version));
    return FittedModel(model_kind_from_string(doc.at("kind").get<std::string>()),
                       doc.at("input_dimension").get<std::size_t>(),
                       params_from_json(doc.at("params")));
}

} // namespace pkgtriage
