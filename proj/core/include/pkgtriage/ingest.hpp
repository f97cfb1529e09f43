#ifndef PKGTRIAGE_INGEST_HPP
#define PKGTRIAGE_INGEST_HPP

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

namespace pkgtriage {

enum class Ecosystem { npm, pypi, rubygems, crates };

std::string to_string(Ecosystem e);
Ecosystem ecosystem_from_string(const std::string& s);

// (ecosystem, name, version) is the unique identity of a sample.
struct PackageId {
    Ecosystem ecosystem = Ecosystem::npm;
    std::string name;
    std::string version;

    auto tie() const { return std::tie(ecosystem, name, version); }
    bool operator==(const PackageId& o) const { return tie() == o.tie(); }
    bool operator<(const PackageId& o) const { return tie() < o.tie(); }

    // "npm:left-pad:1.3.0"
    std::string spec() const;
};

enum class Phase { install, import, combined };

std::string to_string(Phase p);
Phase phase_from_string(const std::string& s);

// Parsed sandbox output for one package version. Lists may be empty but are
// never absent after parsing; the present.* flags record whether each behavior
// section existed in the raw document (an explicit empty list is valid data,
// an absent section marks the row incomplete).
struct BehaviorReport {
    PackageId id;
    Phase phase = Phase::combined;
    std::vector<std::string> commands;
    std::vector<std::string> domains; // lowercase hostnames
    std::vector<std::string> ips;     // validated v4/v6 addresses
    std::vector<std::string> files;   // carried through, not featurized

    struct Presence {
        bool commands = false;
        bool domains = false;
        bool ips = false;
        bool all() const { return commands && domains && ips; }
    } present;
};

// Immutable once built; rows keep input order.
struct SampleTable {
    std::vector<BehaviorReport> rows;
    int schema_version = 1;

    std::size_t size() const { return rows.size(); }
};

// Parses one raw report document (JSON, see README for the schema).
// Reports carrying both install and import phases merge into phase=combined
// by list concatenation. Unknown fields are ignored. Hostnames are
// lowercased; IP strings must parse as valid v4/v6 addresses.
// Throws MalformedReport or MissingIdentity.
BehaviorReport parse_report(const std::string& raw);

// One row per input report, preserving input order. Deduplication is a
// separate step.
SampleTable build_table(std::vector<BehaviorReport> reports);

// Keeps the first occurrence of each PackageId; output order is input order
// with later duplicates removed.
SampleTable dedupe(const SampleTable& table);

// Removes rows whose source document lacked any of the three behavior
// sections. Present-but-empty lists are kept.
SampleTable drop_incomplete(const SampleTable& table);

// Tabular export, header:
//   ecosystem,name,version,phase,n_commands,n_domains,n_ips,
//   commands_joined,domains_joined,ips_joined
// The n_* columns are informational (raw command count, distinct
// domain/ip counts); the joined columns preserve the full lists, so a round
// trip through this format preserves all three count statistics exactly.
std::string table_to_csv(const SampleTable& table);
SampleTable table_from_csv(const std::string& text);

} // namespace pkgtriage

#endif // PKGTRIAGE_INGEST_HPP
