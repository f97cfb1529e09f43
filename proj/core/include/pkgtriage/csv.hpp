#ifndef PKGTRIAGE_CSV_HPP
#define PKGTRIAGE_CSV_HPP

#include <map>
#include <string>
#include <vector>

namespace pkgtriage::csv {

// CSV conventions shared by every tabular export:
//  - cells containing ',' , '|' , '"' or a newline are double-quoted,
//    embedded quotes doubled;
//  - list-valued cells join their items with '|'; a literal '|' or '\'
//    inside an item is escaped as '\|' / '\\' so joins stay reversible;
//  - files may start with '#'-prefixed comment lines; the first one carries
//    document metadata as space-separated key=value pairs (schema_version
//    and friends) and is skipped by the readers.

std::string quote_cell(const std::string& cell);
std::string format_row(const std::vector<std::string>& cells);

std::string join_list(const std::vector<std::string>& items);
std::vector<std::string> split_list(const std::string& cell);

struct Document {
    std::map<std::string, std::string> meta; // from the first comment line
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Parses CSV text with quoted cells (including embedded newlines).
// Throws MalformedLine on unbalanced quotes.
Document parse(const std::string& text);

std::string format_meta_line(const std::string& doc_type,
                             const std::map<std::string, std::string>& meta);

} // namespace pkgtriage::csv

#endif // PKGTRIAGE_CSV_HPP
