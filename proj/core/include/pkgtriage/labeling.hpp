#ifndef PKGTRIAGE_LABELING_HPP
#define PKGTRIAGE_LABELING_HPP

#include "pkgtriage/ingest.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pkgtriage {

// Malicious is the positive class everywhere downstream.
enum class Label { benign, malicious };

std::string to_string(Label l);
Label label_from_string(const std::string& s);

// Behavior rules. A sensitive-command pattern matches on the basename of the
// command's first whitespace-separated token, not anywhere in the command
// line ("npm install curl-shim" does not fire the curl rule). Multi-token
// patterns such as "bash -c" additionally require the following argument
// tokens to match in order.
struct RuleConfig {
    std::vector<std::string> sensitive_command_patterns;
    std::set<std::string> domain_denylist; // lowercase hostnames
    std::set<std::string> ip_denylist;
};

// Default sensitive-command patterns. The underlying data source names only
// curl and exec; the rest of this list is a documented project choice and is
// overridable through the rules file.
RuleConfig default_rules();

// Loads a rules file: a flat JSON object with keys `sensitive_commands`,
// `domain_denylist` and `ip_denylist`, each a list of strings.
RuleConfig load_rules(const std::string& path);

// Known-malicious package identifiers; version "*" matches any version of
// that name+ecosystem.
class AdvisorySet {
public:
    void insert(const PackageId& id);
    bool contains(const PackageId& id) const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

private:
    std::set<PackageId> entries_;
};

// Parses an advisory file: UTF-8 text, one `ecosystem:name:version` per
// line, `*` wildcard version, `#` comments. Duplicate lines collapse.
// Throws FileUnreadable or MalformedLine (with line number).
AdvisorySet load_advisories(const std::string& path);
AdvisorySet parse_advisories(const std::string& text);

struct LabelEvidence {
    Label label = Label::benign;
    std::vector<std::string> reasons; // non-empty iff label == malicious
};

// Malicious iff any command matches a sensitive pattern OR any contacted
// domain/IP is denylisted; reasons enumerate every match in report order.
LabelEvidence label_by_rules(const BehaviorReport& report, const RuleConfig& rules);

struct FeatureCounts; // features.hpp

struct LabeledSample {
    PackageId id;
    Label label = Label::benign;
    std::vector<std::string> reasons;
    // Count features, filled by the labeling pipeline (see features.hpp).
    long n_commands = 0;
    long n_domains = 0;
    long n_ips = 0;
};

// Labels every row of a deduped, complete table: malicious if the id is in
// the advisory set or a behavior rule fires, else benign. When an allowlist
// is given, allowlisted packages that are not advisory-listed stay benign
// even if rules fire; each suppression appends a warning line.
std::vector<LabeledSample> assign_labels(const SampleTable& table,
                                         const AdvisorySet& advisories,
                                         const RuleConfig& rules);
std::vector<LabeledSample> assign_labels(const SampleTable& table,
                                         const AdvisorySet& advisories,
                                         const RuleConfig& rules,
                                         const AdvisorySet& allowlist,
                                         std::vector<std::string>* warnings);

// Labeled sample file, header:
//   ecosystem,name,version,label,reasons,n_commands,n_domains,n_ips
std::string labeled_to_csv(const std::vector<LabeledSample>& samples,
                           const std::string& count_mode);
std::vector<LabeledSample> labeled_from_csv(const std::string& text,
                                            std::string* count_mode = nullptr);

} // namespace pkgtriage

#endif // PKGTRIAGE_LABELING_HPP
