#ifndef PKGTRIAGE_FEATURES_HPP
#define PKGTRIAGE_FEATURES_HPP

#include "pkgtriage/ingest.hpp"
#include "pkgtriage/matrix.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace pkgtriage {

// How list entries turn into counts. The standard mode counts commands as
// runtime events (raw list length) and domains/IPs as distinct endpoints;
// the other two modes force one behavior for all three features.
enum class CountMode { standard, distinct, raw };

std::string to_string(CountMode m);
CountMode count_mode_from_string(const std::string& s);

struct FeatureCounts {
    long n_commands = 0;
    long n_domains = 0;
    long n_ips = 0;

    bool operator==(const FeatureCounts&) const = default;
    std::array<long, 3> as_array() const { return {n_commands, n_domains, n_ips}; }
};

FeatureCounts extract_counts(const BehaviorReport& report,
                             CountMode mode = CountMode::standard);

// Fitted one-hot vocabulary. Each feature block holds the sorted distinct
// training values plus a trailing out-of-vocabulary slot; block order is
// fixed as (commands, domains, ips).
class EncoderSpec {
public:
    static constexpr int kBlocks = 3;
    static constexpr const char* kBlockNames[kBlocks] = {"commands", "domains", "ips"};

    // Vocabulary = sorted distinct values per feature seen in train.
    // Throws EmptyTrainingSet.
    static EncoderSpec fit(std::span<const FeatureCounts> train);

    std::size_t dimension() const;
    const std::vector<long>& vocabulary(int block) const { return vocab_[block]; }

    // One-hot encoding: within each block the position of the matching value
    // is 1; unseen values set the block's OOV position (its last slot).
    std::vector<double> encode(const FeatureCounts& counts) const;

    // True when encoding `counts` would activate at least one OOV slot.
    bool hits_oov(const FeatureCounts& counts) const;

    std::string to_json() const;
    static EncoderSpec from_json(const std::string& text);

    bool operator==(const EncoderSpec&) const = default;

private:
    std::array<std::vector<long>, kBlocks> vocab_;
};

// Featurized dataset export: header `label,<block:pos columns...>,package`
// where the last position of each block is its OOV slot.
std::string encoded_to_csv(const EncoderSpec& spec,
                           std::span<const FeatureCounts> counts,
                           std::span<const int> labels,
                           std::span<const PackageId> ids);

// Encodes a whole sample set; raw_counts bypasses one-hot and feeds the
// three integers directly (ablation mode).
Matrix encode_matrix(const EncoderSpec& spec, std::span<const FeatureCounts> counts);
Matrix raw_count_matrix(std::span<const FeatureCounts> counts);

} // namespace pkgtriage

#endif // PKGTRIAGE_FEATURES_HPP
