#include "pkgtriage/features.hpp"

#include "pkgtriage/csv.hpp"
#include "pkgtriage/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

using nlohmann::json;

namespace pkgtriage {

std::string to_string(CountMode m) {
    switch (m) {
    case CountMode::standard: return "standard";
    case CountMode::distinct: return "distinct";
    case CountMode::raw: return "raw";
    }
    return "standard";
}

CountMode count_mode_from_string(const std::string& s) {
    if (s == "standard") return CountMode::standard;
    if (s == "distinct") return CountMode::distinct;
    if (s == "raw") return CountMode::raw;
    throw Error("unknown count mode '" + s + "'");
}

namespace {

long count_of(const std::vector<std::string>& items, bool distinct) {
    if (!distinct) return static_cast<long>(items.size());
    return static_cast<long>(std::set<std::string>(items.begin(), items.end()).size());
}

} // namespace

FeatureCounts extract_counts(const BehaviorReport& report, CountMode mode) {
    bool commands_distinct = mode == CountMode::distinct;
    bool network_distinct = mode != CountMode::raw;
    return FeatureCounts{
        count_of(report.commands, commands_distinct),
        count_of(report.domains, network_distinct),
        count_of(report.ips, network_distinct),
    };
}

EncoderSpec EncoderSpec::fit(std::span<const FeatureCounts> train) {
    if (train.empty()) throw EmptyTrainingSet();
    EncoderSpec spec;
    std::array<std::set<long>, kBlocks> seen;
    for (const auto& counts : train) {
        auto values = counts.as_array();
        for (int b = 0; b < kBlocks; ++b) seen[b].insert(values[b]);
    }
    for (int b = 0; b < kBlocks; ++b)
        spec.vocab_[b].assign(seen[b].begin(), seen[b].end());
    return spec;
}

std::size_t EncoderSpec::dimension() const {
    std::size_t dim = 0;
    for (const auto& block : vocab_) dim += block.size() + 1;
    return dim;
}

std::vector<double> EncoderSpec::encode(const FeatureCounts& counts) const {
    std::vector<double> out(dimension(), 0.0);
    auto values = counts.as_array();
    std::size_t offset = 0;
    for (int b = 0; b < kBlocks; ++b) {
        const auto& vocab = vocab_[b];
        auto it = std::lower_bound(vocab.begin(), vocab.end(), values[b]);
        std::size_t pos = (it != vocab.end() && *it == values[b])
                              ? static_cast<std::size_t>(it - vocab.begin())
                              : vocab.size(); // OOV slot
        out[offset + pos] = 1.0;
        offset += vocab.size() + 1;
    }
    return out;
}

bool EncoderSpec::hits_oov(const FeatureCounts& counts) const {
    auto values = counts.as_array();
    for (int b = 0; b < kBlocks; ++b)
        if (!std::binary_search(vocab_[b].begin(), vocab_[b].end(), values[b]))
            return true;
    return false;
}

std::string EncoderSpec::to_json() const {
    json doc;
    doc["schema_version"] = 1;
    for (int b = 0; b < kBlocks; ++b) doc["blocks"][kBlockNames[b]] = vocab_[b];
    return doc.dump(2) + "\n";
}

EncoderSpec EncoderSpec::from_json(const std::string& text) {
    json doc = json::parse(text);
    EncoderSpec spec;
    for (int b = 0; b < kBlocks; ++b) {
        spec.vocab_[b] = doc.at("blocks").at(kBlockNames[b]).get<std::vector<long>>();
        if (!std::is_sorted(spec.vocab_[b].begin(), spec.vocab_[b].end()))
            throw Error("encoder vocabulary not sorted");
    }
    return spec;
}

std::string encoded_to_csv(const EncoderSpec& spec,
                           std::span<const FeatureCounts> counts,
                           std::span<const int> labels,
                           std::span<const PackageId> ids) {
    if (counts.size() != labels.size() || counts.size() != ids.size())
        throw LengthMismatch("counts/labels/ids");
    std::string out = csv::format_meta_line("features", {{"schema_version", "1"}});
    std::vector<std::string> header{"label"};
    for (int b = 0; b < EncoderSpec::kBlocks; ++b) {
        std::size_t width = spec.vocabulary(b).size() + 1;
        for (std::size_t p = 0; p < width; ++p)
            header.push_back(std::string(EncoderSpec::kBlockNames[b]) + ":" +
                             std::to_string(p));
    }
    header.push_back("package");
    out += csv::format_row(header);

    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::vector<std::string> cells;
        cells.push_back(labels[i] ? "malicious" : "benign");
        for (double v : spec.encode(counts[i]))
            cells.push_back(v == 1.0 ? "1" : "0");
        cells.push_back(ids[i].spec());
        out += csv::format_row(cells);
    }
    return out;
}

Matrix encode_matrix(const EncoderSpec& spec, std::span<const FeatureCounts> counts) {
    Matrix m(counts.size(), spec.dimension());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        auto encoded = spec.encode(counts[i]);
        std::copy(encoded.begin(), encoded.end(), m.row(i).begin());
    }
    return m;
}

Matrix raw_count_matrix(std::span<const FeatureCounts> counts) {
    Matrix m(counts.size(), 3);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        auto values = counts[i].as_array();
        for (int b = 0; b < 3; ++b) m.at(i, b) = static_cast<double>(values[b]);
    }
    return m;
}

} // namespace pkgtriage
