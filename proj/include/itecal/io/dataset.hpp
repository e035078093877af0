#pragma once

#include "itecal/domain.hpp"
#include "itecal/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace itecal::io {

// Parsed trial data. `ids` is empty unless the file has an id column.
struct Dataset {
    std::vector<SubjectRecord> records;
    std::vector<std::string> ids;
};

struct DatasetOptions {
    // Column read into SubjectRecord::order_key; "order_key" when unset.
    std::string order_column;
};

namespace detail {

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    std::string out = s.substr(b, e - b + 1);
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

inline char detect_delimiter(const std::string& header) {
    for (char c : {',', '\t', ';'}) {
        if (header.find(c) != std::string::npos) return c;
    }
    return ',';
}

inline std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, delim)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

inline std::optional<double> to_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data() + (s.front() == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace detail

// Delimited text with a header row. Required columns: arm, outcome, delta;
// optional: pi, order_key (or options.order_column), id. Header names are
// case-insensitive, other columns are ignored. Row numbers in errors count
// data rows from 1.
inline Dataset parse_dataset_text(const std::string& text, const DatasetOptions& options = {}) {
    std::istringstream in(text);
    std::string header_line;
    while (std::getline(in, header_line) && detail::trim(header_line).empty()) {
    }
    if (detail::trim(header_line).empty()) throw Error(ErrorCode::EmptyFile, "cli_io", "input has no header");
    if (header_line.size() >= 3 && header_line.compare(0, 3, "\xEF\xBB\xBF") == 0) header_line.erase(0, 3);

    const char delim = detail::detect_delimiter(header_line);
    const auto header = detail::split(header_line, delim);
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        const std::string want = detail::lower(name);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (detail::lower(header[i]) == want) return i;
        }
        return std::nullopt;
    };
    auto required = [&](const std::string& name) {
        auto c = column(name);
        if (!c) throw Error(ErrorCode::MissingColumn, "cli_io", "required column '" + name + "' not found", name);
        return *c;
    };
    const std::size_t c_arm = required("arm");
    const std::size_t c_outcome = required("outcome");
    const std::size_t c_delta = required("delta");
    const auto c_pi = column("pi");
    const auto c_id = column("id");
    const std::string order_name = options.order_column.empty() ? "order_key" : options.order_column;
    const auto c_order = column(order_name);
    if (!options.order_column.empty() && !c_order) {
        throw Error(ErrorCode::MissingColumn, "cli_io", "ordering column '" + order_name + "' not found", order_name);
    }

    Dataset ds;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        ++row;
        const auto cells = detail::split(line, delim);
        auto cell = [&](std::size_t idx, const std::string& name) -> const std::string& {
            if (idx >= cells.size()) {
                throw Error(ErrorCode::BadValue, "cli_io", "row " + std::to_string(row) + ": missing value for " + name,
                            name, row);
            }
            return cells[idx];
        };
        auto bad = [&](const std::string& name, const std::string& value) {
            return Error(ErrorCode::BadValue, "cli_io",
                         "row " + std::to_string(row) + ", column " + name + ": bad value '" + value + "'", name, row);
        };
        auto binary = [&](std::size_t idx, const std::string& name) {
            const std::string& v = cell(idx, name);
            const auto d = detail::to_double(v);
            if (!d || (*d != 0.0 && *d != 1.0)) throw bad(name, v);
            return static_cast<int>(*d);
        };

        SubjectRecord r;
        r.arm = binary(c_arm, "arm");
        r.outcome = binary(c_outcome, "outcome");
        {
            const std::string& v = cell(c_delta, "delta");
            const auto d = detail::to_double(v);
            if (!d || *d < -1.0 || *d > 1.0) throw bad("delta", v);
            r.delta = *d;
        }
        if (c_pi) {
            const std::string& v = cell(*c_pi, "pi");
            if (!v.empty()) {
                const auto d = detail::to_double(v);
                if (!d || *d < 0.0 || *d > 1.0) throw bad("pi", v);
                r.pi = *d;
            }
        }
        if (c_order) {
            const std::string& v = cell(*c_order, order_name);
            if (!v.empty()) {
                const auto d = detail::to_double(v);
                if (!d) throw bad(order_name, v);
                r.order_key = *d;
            }
        }
        if (c_id) ds.ids.push_back(cell(*c_id, "id"));
        ds.records.push_back(r);
    }
    if (ds.records.empty()) throw Error(ErrorCode::EmptyFile, "cli_io", "input has a header but no data rows");
    if (ds.records.size() < 2) throw Error(ErrorCode::EmptyFile, "cli_io", "input needs at least 2 data rows");
    return ds;
}

inline Dataset parse_dataset(const std::string& path, const DatasetOptions& options = {}) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cli_io", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_dataset_text(buf.str(), options);
}

// CSV with the columns parse_dataset_text() reads back; optional columns are
// written only when some record carries them. Reals use 17 significant digits.
inline std::string serialize_dataset(const std::vector<SubjectRecord>& records) {
    const bool any_pi = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.pi.has_value(); });
    const bool any_key = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.order_key.has_value(); });
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::string out = "arm,outcome,delta";
    if (any_pi) out += ",pi";
    if (any_key) out += ",order_key";
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.arm) + ',' + std::to_string(r.outcome) + ',' + num(r.delta);
        if (any_pi) out += ',' + (r.pi ? num(*r.pi) : std::string());
        if (any_key) out += ',' + (r.order_key ? num(*r.order_key) : std::string());
        out += '\n';
    }
    return out;
}

}  // namespace itecal::io
