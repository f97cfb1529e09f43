#include "pkgtriage/ingest.hpp"

#include "pkgtriage/csv.hpp"
#include "pkgtriage/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <arpa/inet.h>
#include <cctype>
#include <set>

using nlohmann::json;

namespace pkgtriage {

std::string to_string(Ecosystem e) {
    switch (e) {
    case Ecosystem::npm: return "npm";
    case Ecosystem::pypi: return "pypi";
    case Ecosystem::rubygems: return "rubygems";
    case Ecosystem::crates: return "crates";
    }
    return "npm";
}

Ecosystem ecosystem_from_string(const std::string& s) {
    if (s == "npm") return Ecosystem::npm;
    if (s == "pypi") return Ecosystem::pypi;
    if (s == "rubygems") return Ecosystem::rubygems;
    if (s == "crates" || s == "crates.io") return Ecosystem::crates;
    throw MalformedReport("unknown ecosystem '" + s + "'");
}

std::string PackageId::spec() const {
    return to_string(ecosystem) + ":" + name + ":" + version;
}

std::string to_string(Phase p) {
    switch (p) {
    case Phase::install: return "install";
    case Phase::import: return "import";
    case Phase::combined: return "combined";
    }
    return "combined";
}

Phase phase_from_string(const std::string& s) {
    if (s == "install") return Phase::install;
    if (s == "import") return Phase::import;
    if (s == "combined") return Phase::combined;
    throw MalformedReport("unknown phase '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool valid_ip(const std::string& s) {
    unsigned char buf[sizeof(in6_addr)];
    return inet_pton(AF_INET, s.c_str(), buf) == 1 ||
           inet_pton(AF_INET6, s.c_str(), buf) == 1;
}

std::vector<std::string> string_list(const json& phase, const char* key) {
    std::vector<std::string> out;
    const auto& arr = phase.at(key);
    if (!arr.is_array()) throw MalformedReport(std::string(key) + " is not a list");
    for (const auto& item : arr) {
        if (!item.is_string())
            throw MalformedReport(std::string(key) + " contains a non-string entry");
        out.push_back(item.get<std::string>());
    }
    return out;
}

// Appends one phase object's lists; a key is only counted present when every
// phase object in the document carries it.
void merge_phase(const json& phase, BehaviorReport& report,
                 BehaviorReport::Presence& seen_in_all, bool first_phase) {
    BehaviorReport::Presence here;
    here.commands = phase.contains("commands");
    here.domains = phase.contains("dns");
    here.ips = phase.contains("ips");
    if (first_phase) {
        seen_in_all = here;
    } else {
        seen_in_all.commands &= here.commands;
        seen_in_all.domains &= here.domains;
        seen_in_all.ips &= here.ips;
    }

    // Blank entries are dropped during normalization: an empty string is not
    // a command, hostname or address, and tabular round trips could not
    // represent it.
    if (here.commands) {
        for (auto& cmd : string_list(phase, "commands"))
            if (!trim(cmd).empty()) report.commands.push_back(cmd);
    }
    if (here.domains) {
        for (auto& d : string_list(phase, "dns")) {
            auto host = lower(trim(d));
            if (!host.empty()) report.domains.push_back(host);
        }
    }
    if (here.ips) {
        for (auto& raw_ip : string_list(phase, "ips")) {
            auto ip = trim(raw_ip);
            if (ip.empty()) continue;
            if (!valid_ip(ip)) throw MalformedReport("invalid IP address '" + ip + "'");
            report.ips.push_back(ip);
        }
    }
    if (phase.contains("files")) {
        for (auto& f : string_list(phase, "files"))
            if (!f.empty()) report.files.push_back(f);
    }
}

} // namespace

BehaviorReport parse_report(const std::string& raw) {
    json doc;
    try {
        doc = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw MalformedReport(e.what());
    }
    if (!doc.is_object()) throw MalformedReport("top level is not an object");
    if (!doc.contains("package") || !doc["package"].is_object())
        throw MissingIdentity("no package object");

    const auto& pkg = doc["package"];
    BehaviorReport report;
    if (!pkg.contains("ecosystem") || !pkg["ecosystem"].is_string())
        throw MissingIdentity("no ecosystem");
    report.id.ecosystem = ecosystem_from_string(pkg["ecosystem"].get<std::string>());
    if (!pkg.contains("name") || !pkg["name"].is_string())
        throw MissingIdentity("no package name");
    report.id.name = trim(pkg["name"].get<std::string>());
    if (report.id.name.empty()) throw MissingIdentity("empty package name");
    if (!pkg.contains("version") || !pkg["version"].is_string())
        throw MissingIdentity("no package version");
    report.id.version = trim(pkg["version"].get<std::string>());
    if (report.id.version.empty()) throw MissingIdentity("empty package version");

    bool has_install = false, has_import = false;
    BehaviorReport::Presence presence;
    if (doc.contains("analysis")) {
        const auto& analysis = doc["analysis"];
        if (!analysis.is_object()) throw MalformedReport("analysis is not an object");
        has_install = analysis.contains("install");
        has_import = analysis.contains("import");
        if (has_install) merge_phase(analysis["install"], report, presence, true);
        if (has_import) merge_phase(analysis["import"], report, presence, !has_install);
    }
    report.present = (has_install || has_import) ? presence : BehaviorReport::Presence{};

    if (has_install && has_import) report.phase = Phase::combined;
    else if (has_install) report.phase = Phase::install;
    else if (has_import) report.phase = Phase::import;
    else report.phase = Phase::combined; // degenerate merge of zero phases

    return report;
}

SampleTable build_table(std::vector<BehaviorReport> reports) {
    SampleTable table;
    table.rows = std::move(reports);
    return table;
}

SampleTable dedupe(const SampleTable& table) {
    SampleTable out;
    out.schema_version = table.schema_version;
    std::set<PackageId> seen;
    for (const auto& row : table.rows) {
        if (seen.insert(row.id).second) out.rows.push_back(row);
    }
    return out;
}

SampleTable drop_incomplete(const SampleTable& table) {
    SampleTable out;
    out.schema_version = table.schema_version;
    for (const auto& row : table.rows) {
        if (row.present.all()) out.rows.push_back(row);
    }
    return out;
}

namespace {

std::size_t distinct_count(const std::vector<std::string>& items) {
    return std::set<std::string>(items.begin(), items.end()).size();
}

} // namespace

std::string table_to_csv(const SampleTable& table) {
    std::string out = csv::format_meta_line(
        "samples", {{"schema_version", std::to_string(table.schema_version)}});
    out += "ecosystem,name,version,phase,n_commands,n_domains,n_ips,"
           "commands_joined,domains_joined,ips_joined\n";
    for (const auto& row : table.rows) {
        out += csv::format_row({
            to_string(row.id.ecosystem),
            row.id.name,
            row.id.version,
            to_string(row.phase),
            std::to_string(row.commands.size()),
            std::to_string(distinct_count(row.domains)),
            std::to_string(distinct_count(row.ips)),
            csv::join_list(row.commands),
            csv::join_list(row.domains),
            csv::join_list(row.ips),
        });
    }
    return out;
}

SampleTable table_from_csv(const std::string& text) {
    auto doc = csv::parse(text);
    if (doc.header.size() != 10 || doc.header[0] != "ecosystem")
        throw MalformedReport("unexpected sample table header");
    SampleTable table;
    if (auto it = doc.meta.find("schema_version"); it != doc.meta.end())
        table.schema_version = std::stoi(it->second);
    for (const auto& cells : doc.rows) {
        if (cells.size() != 10)
            throw MalformedReport("sample row has " + std::to_string(cells.size()) +
                                  " cells, expected 10");
        BehaviorReport row;
        row.id.ecosystem = ecosystem_from_string(cells[0]);
        row.id.name = cells[1];
        row.id.version = cells[2];
        row.phase = phase_from_string(cells[3]);
        row.commands = csv::split_list(cells[7]);
        row.domains = csv::split_list(cells[8]);
        row.ips = csv::split_list(cells[9]);
        // Rows in tabular form passed the completeness filter by construction.
        row.present = {true, true, true};
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace pkgtriage
