#include "pkgtriage/csv.hpp"

#include "pkgtriage/errors.hpp"

#include <sstream>

namespace pkgtriage::csv {

std::string quote_cell(const std::string& cell) {
    bool needs_quote = cell.find_first_of(",|\"\n\r") != std::string::npos;
    if (!needs_quote) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string format_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += quote_cell(cells[i]);
    }
    out += '\n';
    return out;
}

std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += '|';
        for (char c : items[i]) {
            if (c == '|' || c == '\\') out += '\\';
            out += c;
        }
    }
    return out;
}

std::vector<std::string> split_list(const std::string& cell) {
    std::vector<std::string> items;
    if (cell.empty()) return items;
    std::string cur;
    bool escaped = false;
    for (char c : cell) {
        if (escaped) {
            cur += c;
            escaped = false;
        } else if (c == '\\') {
            escaped = true;
        } else if (c == '|') {
            items.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    items.push_back(cur);
    return items;
}

namespace {

void parse_meta_line(const std::string& line, std::map<std::string, std::string>& meta) {
    std::istringstream in(line.substr(1));
    std::string token;
    while (in >> token) {
        auto eq = token.find('=');
        if (eq != std::string::npos) {
            meta.emplace(token.substr(0, eq), token.substr(eq + 1));
        }
    }
}

} // namespace

Document parse(const std::string& text) {
    Document doc;
    std::vector<std::string> cells;
    std::string cur;
    bool in_quotes = false;
    bool cell_started = false;
    bool row_started = false;
    bool first_meta_seen = false;
    std::size_t line_no = 1;

    auto flush_cell = [&] {
        cells.push_back(cur);
        cur.clear();
        cell_started = false;
    };
    auto flush_row = [&] {
        flush_cell();
        if (doc.header.empty()) doc.header = cells;
        else doc.rows.push_back(cells);
        cells.clear();
        row_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
                if (c == '\n') ++line_no;
            }
            continue;
        }
        // Comment lines are only recognized at the start of a row.
        if (!row_started && !cell_started && c == '#') {
            auto eol = text.find('\n', i);
            std::string line = text.substr(i, eol == std::string::npos ? std::string::npos : eol - i);
            if (!first_meta_seen) {
                parse_meta_line(line, doc.meta);
                first_meta_seen = true;
            }
            if (eol == std::string::npos) break;
            i = eol;
            ++line_no;
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            cell_started = true;
            row_started = true;
            break;
        case ',':
            flush_cell();
            row_started = true;
            break;
        case '\r':
            break;
        case '\n':
            if (row_started || cell_started || !cur.empty()) flush_row();
            ++line_no;
            break;
        default:
            cur += c;
            cell_started = true;
            row_started = true;
            break;
        }
    }
    if (in_quotes) throw MalformedLine(line_no, "unterminated quoted cell");
    if (row_started || cell_started || !cur.empty()) flush_row();
    return doc;
}

std::string format_meta_line(const std::string& doc_type,
                             const std::map<std::string, std::string>& meta) {
    std::string out = "# pkgtriage " + doc_type;
    for (const auto& [k, v] : meta) out += " " + k + "=" + v;
    out += '\n';
    return out;
}

} // namespace pkgtriage::csv
