#pragma once

// Minimal comma-separated reader/writer: header row, optional double-quoted
// fields, blank lines skipped.

#include "brb/error.hpp"
#include "brb/evaluation.hpp"

#include <charconv>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace brb::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; // source line of each row

    std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"' && trim(cell).empty()) {
            cell.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            out.push_back(was_quoted ? cell : trim(cell));
            cell.clear();
            was_quoted = false;
        } else if (!(was_quoted && (c == ' ' || c == '\t' || c == '\r'))) {
            cell.push_back(c);
        }
    }
    out.push_back(was_quoted ? cell : trim(cell));
    return out;
}

inline Table parse(std::istream& in) {
    Table t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            t.rows.push_back(std::move(cells));
            t.line_numbers.push_back(line_no);
        }
    }
    if (!have_header) throw Error(ErrorCode::InvalidInput, "empty CSV input");
    return t;
}

inline Table parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
}

inline std::string escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string write(const Table& t) {
    std::string out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out.push_back(',');
            out += escape(cells[i]);
        }
        out.push_back('\n');
    };
    emit(t.header);
    for (const auto& r : t.rows) emit(r);
    return out;
}

inline std::optional<double> parse_number(std::string_view s) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

/// Score cases from a table with an optional `id` column, an optional
/// `benchmark` column and one numeric column per scoring system.
inline std::vector<eval::ScoredCase> to_cases(const Table& t) {
    const auto id_col = t.column("id");
    const auto bench_col = t.column("benchmark");
    std::vector<eval::ScoredCase> cases;
    cases.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const auto where = "line " + std::to_string(t.line_numbers[r]);
        if (row.size() != t.header.size())
            throw Error(ErrorCode::InvalidInput,
                        where + ": expected " + std::to_string(t.header.size()) + " cells, found " + std::to_string(row.size()),
                        where);
        eval::ScoredCase c;
        c.id = id_col ? row[*id_col] : std::to_string(r + 1);
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (id_col && i == *id_col) continue;
            if (bench_col && i == *bench_col) {
                if (row[i].empty()) continue;
                if (row[i] != "0" && row[i] != "1")
                    throw Error(ErrorCode::InvalidInput, where + ": benchmark must be 0 or 1", where + ".benchmark");
                c.benchmark = row[i] == "1" ? 1 : 0;
                continue;
            }
            auto v = parse_number(row[i]);
            if (!v)
                throw Error(ErrorCode::InvalidInput, where + ": '" + row[i] + "' is not a number in column " + t.header[i],
                            where + "." + t.header[i]);
            c.scores[t.header[i]] = *v;
        }
        cases.push_back(std::move(c));
    }
    return cases;
}

} // namespace brb::csv
