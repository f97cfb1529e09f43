#include "pkgtriage/labeling.hpp"

#include "pkgtriage/csv.hpp"
#include "pkgtriage/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace pkgtriage {

std::string to_string(Label l) {
    return l == Label::malicious ? "malicious" : "benign";
}

Label label_from_string(const std::string& s) {
    if (s == "malicious") return Label::malicious;
    if (s == "benign") return Label::benign;
    throw Error("unknown label '" + s + "'");
}

RuleConfig default_rules() {
    RuleConfig rules;
    rules.sensitive_command_patterns = {
        "curl", "wget", "nc", "ncat", "bash -c", "sh -c",
        "exec", "eval", "base64", "chmod",
    };
    return rules;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileUnreadable(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> tokenize(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> tokens;
    std::string t;
    while (in >> t) tokens.push_back(t);
    return tokens;
}

std::string basename_of(const std::string& path) {
    auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

// First pattern token must equal the basename of the command's executable
// token; remaining pattern tokens must match the following arguments in order.
bool pattern_matches(const std::vector<std::string>& pattern_tokens,
                     const std::vector<std::string>& command_tokens) {
    if (pattern_tokens.empty() || command_tokens.empty()) return false;
    if (basename_of(command_tokens[0]) != pattern_tokens[0]) return false;
    if (pattern_tokens.size() > command_tokens.size()) return false;
    for (std::size_t i = 1; i < pattern_tokens.size(); ++i)
        if (command_tokens[i] != pattern_tokens[i]) return false;
    return true;
}

} // namespace

RuleConfig load_rules(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error("rules file " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw Error("rules file " + path + ": not an object");
    RuleConfig rules;
    if (doc.contains("sensitive_commands")) {
        for (const auto& p : doc["sensitive_commands"]) {
            auto pattern = p.get<std::string>();
            if (pattern.empty()) throw Error("rules file " + path + ": empty pattern");
            rules.sensitive_command_patterns.push_back(pattern);
        }
    } else {
        rules.sensitive_command_patterns = default_rules().sensitive_command_patterns;
    }
    if (doc.contains("domain_denylist"))
        for (const auto& d : doc["domain_denylist"])
            rules.domain_denylist.insert(lower(d.get<std::string>()));
    if (doc.contains("ip_denylist"))
        for (const auto& ip : doc["ip_denylist"])
            rules.ip_denylist.insert(ip.get<std::string>());
    return rules;
}

void AdvisorySet::insert(const PackageId& id) { entries_.insert(id); }

bool AdvisorySet::contains(const PackageId& id) const {
    if (entries_.count(id)) return true;
    PackageId wildcard = id;
    wildcard.version = "*";
    return entries_.count(wildcard) > 0;
}

AdvisorySet parse_advisories(const std::string& text) {
    AdvisorySet set;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto begin = line.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        auto end = line.find_last_not_of(" \t");
        line = line.substr(begin, end - begin + 1);

        auto first = line.find(':');
        auto second = line.find(':', first == std::string::npos ? first : first + 1);
        if (first == std::string::npos || second == std::string::npos)
            throw MalformedLine(line_no, "expected ecosystem:name:version, got '" + line + "'");
        PackageId id;
        try {
            id.ecosystem = ecosystem_from_string(line.substr(0, first));
        } catch (const MalformedReport& e) {
            throw MalformedLine(line_no, e.what());
        }
        id.name = line.substr(first + 1, second - first - 1);
        id.version = line.substr(second + 1);
        if (id.name.empty()) throw MalformedLine(line_no, "empty package name");
        if (id.version.empty()) throw MalformedLine(line_no, "empty version");
        set.insert(id);
    }
    return set;
}

AdvisorySet load_advisories(const std::string& path) {
    return parse_advisories(read_file(path));
}

LabelEvidence label_by_rules(const BehaviorReport& report, const RuleConfig& rules) {
    LabelEvidence evidence;

    // Pre-tokenize patterns once; match order follows the report, so the
    // resulting label and reasons are independent of rule-list ordering.
    std::vector<std::vector<std::string>> pattern_tokens;
    pattern_tokens.reserve(rules.sensitive_command_patterns.size());
    for (const auto& p : rules.sensitive_command_patterns)
        pattern_tokens.push_back(tokenize(p));

    for (const auto& command : report.commands) {
        auto cmd_tokens = tokenize(command);
        // Report the longest matching pattern for this command so that
        // "bash -c" wins over a bare "bash" pattern.
        const std::string* matched = nullptr;
        std::size_t matched_len = 0;
        for (std::size_t i = 0; i < pattern_tokens.size(); ++i) {
            if (!pattern_matches(pattern_tokens[i], cmd_tokens)) continue;
            std::size_t len = pattern_tokens[i].size();
            const std::string& pattern = rules.sensitive_command_patterns[i];
            if (!matched || len > matched_len ||
                (len == matched_len && pattern < *matched)) {
                matched = &pattern;
                matched_len = len;
            }
        }
        if (matched) evidence.reasons.push_back("sensitive-command:" + *matched);
    }
    for (const auto& domain : report.domains) {
        if (rules.domain_denylist.count(domain))
            evidence.reasons.push_back("denylisted-domain:" + domain);
    }
    for (const auto& ip : report.ips) {
        if (rules.ip_denylist.count(ip))
            evidence.reasons.push_back("denylisted-ip:" + ip);
    }

    evidence.label = evidence.reasons.empty() ? Label::benign : Label::malicious;
    return evidence;
}

std::vector<LabeledSample> assign_labels(const SampleTable& table,
                                         const AdvisorySet& advisories,
                                         const RuleConfig& rules) {
    return assign_labels(table, advisories, rules, AdvisorySet{}, nullptr);
}

std::vector<LabeledSample> assign_labels(const SampleTable& table,
                                         const AdvisorySet& advisories,
                                         const RuleConfig& rules,
                                         const AdvisorySet& allowlist,
                                         std::vector<std::string>* warnings) {
    std::vector<LabeledSample> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        LabeledSample sample;
        sample.id = row.id;
        auto evidence = label_by_rules(row, rules);
        bool advisory_listed = advisories.contains(row.id);
        bool allowlisted = !advisory_listed && allowlist.contains(row.id);

        if (advisory_listed) {
            sample.label = Label::malicious;
            sample.reasons.push_back("advisory");
            sample.reasons.insert(sample.reasons.end(), evidence.reasons.begin(),
                                  evidence.reasons.end());
        } else if (allowlisted) {
            // Curated benign listing wins over behavior rules; surface the
            // disagreement instead of flipping the label.
            sample.label = Label::benign;
            if (!evidence.reasons.empty() && warnings) {
                warnings->push_back("allowlisted package " + row.id.spec() +
                                    " fired rules: " + csv::join_list(evidence.reasons));
            }
        } else {
            sample.label = evidence.label;
            sample.reasons = evidence.reasons;
        }
        out.push_back(std::move(sample));
    }
    return out;
}

std::string labeled_to_csv(const std::vector<LabeledSample>& samples,
                           const std::string& count_mode) {
    std::string out = csv::format_meta_line(
        "labeled", {{"schema_version", "1"}, {"count_mode", count_mode}});
    out += "ecosystem,name,version,label,reasons,n_commands,n_domains,n_ips\n";
    for (const auto& s : samples) {
        out += csv::format_row({
            to_string(s.id.ecosystem),
            s.id.name,
            s.id.version,
            to_string(s.label),
            csv::join_list(s.reasons),
            std::to_string(s.n_commands),
            std::to_string(s.n_domains),
            std::to_string(s.n_ips),
        });
    }
    return out;
}

std::vector<LabeledSample> labeled_from_csv(const std::string& text,
                                            std::string* count_mode) {
    auto doc = csv::parse(text);
    if (doc.header.size() != 8 || doc.header[3] != "label")
        throw Error("unexpected labeled sample header");
    if (count_mode) {
        auto it = doc.meta.find("count_mode");
        *count_mode = it == doc.meta.end() ? std::string("standard") : it->second;
    }
    std::vector<LabeledSample> out;
    for (const auto& cells : doc.rows) {
        if (cells.size() != 8) throw Error("labeled row has wrong cell count");
        LabeledSample s;
        s.id.ecosystem = ecosystem_from_string(cells[0]);
        s.id.name = cells[1];
        s.id.version = cells[2];
        s.label = label_from_string(cells[3]);
        s.reasons = csv::split_list(cells[4]);
        s.n_commands = std::stol(cells[5]);
        s.n_domains = std::stol(cells[6]);
        s.n_ips = std::stol(cells[7]);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace pkgtriage
