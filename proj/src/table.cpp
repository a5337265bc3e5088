// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#include "posw/table.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace posw {

Table::Table(std::vector<std::string> columns)
    : columns_(std::move(columns))
{
}

void Table::add_row(std::vector<Cell> row)
{
    if (row.size() != columns_.size())
        throw std::invalid_argument("Table: row width does not match the header");
    for (auto& c : row)
        if (auto* d = std::get_if<double>(&c))
            *d = round_significant(*d);
    rows_.push_back(std::move(row));
}

std::size_t Table::column_index(std::string_view name) const
{
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i] == name)
            return i;
    throw std::out_of_range("Table: no column named " + std::string(name));
}

namespace {

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    std::string s(buf);
    // keep doubles distinguishable from integers when read back
    if (s.find_first_of(".e") == std::string::npos)
        s += ".0";
    return s;
}

bool parse_int(std::string_view tok, std::int64_t& out)
{
    if (tok.empty())
        return false;
    std::string s(tok);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (errno != 0 || end != s.c_str() + s.size())
        return false;
    out = v;
    return true;
}

bool parse_double(std::string_view tok, double& out)
{
    if (tok.empty())
        return false;
    std::string s(tok);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        return false;
    out = v;
    return true;
}

bool needs_quotes(const std::string& s)
{
    if (s.empty() || s.find_first_of(",\"\n\r") != std::string::npos)
        return true;
    std::int64_t i = 0;
    double d = 0.0;
    return parse_int(s, i) || parse_double(s, d);
}

Cell parse_token(std::string_view tok, bool quoted)
{
    if (quoted)
        return std::string(tok);
    std::int64_t i = 0;
    if (parse_int(tok, i))
        return i;
    double d = 0.0;
    if (parse_double(tok, d))
        return d;
    return std::string(tok);
}

// Splits one CSV record starting at `pos`; advances `pos` past the line end.
std::vector<std::pair<std::string, bool>> split_record(std::string_view text, std::size_t& pos)
{
    std::vector<std::pair<std::string, bool>> fields;
    std::string cur;
    bool quoted = false;
    bool in_quotes = false;
    while (pos < text.size()) {
        const char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    cur += '"';
                    ++pos;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
            ++pos;
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            quoted = true;
            ++pos;
        } else if (c == ',') {
            fields.emplace_back(std::move(cur), quoted);
            cur.clear();
            quoted = false;
            ++pos;
        } else if (c == '\n' || c == '\r') {
            ++pos;
            if (c == '\r' && pos < text.size() && text[pos] == '\n')
                ++pos;
            break;
        } else {
            cur += c;
            ++pos;
        }
    }
    if (in_quotes)
        throw std::invalid_argument("parse_csv: unterminated quoted field");
    fields.emplace_back(std::move(cur), quoted);
    return fields;
}

} // namespace

double round_significant(double value)
{
    if (!std::isfinite(value))
        return value;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return std::strtod(buf, nullptr);
}

std::string format_cell(const Cell& cell)
{
    if (const auto* i = std::get_if<std::int64_t>(&cell))
        return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&cell))
        return format_double(*d);
    const auto& s = std::get<std::string>(cell);
    if (!needs_quotes(s))
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string to_csv(const Table& table)
{
    std::string out = "#schema=" + std::to_string(kSchemaVersion) + "\n";
    for (std::size_t i = 0; i < table.columns().size(); ++i) {
        if (i)
            out += ',';
        out += format_cell(Cell(table.columns()[i]));
    }
    out += '\n';
    for (const auto& row : table.rows()) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                out += ',';
            out += format_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

Table parse_csv(std::string_view text)
{
    const std::string expected = "#schema=" + std::to_string(kSchemaVersion);
    std::size_t pos = 0;
    const auto eol = text.find('\n');
    std::string_view first = text.substr(0, eol);
    if (!first.empty() && first.back() == '\r')
        first.remove_suffix(1);
    if (first != expected)
        throw std::invalid_argument("parse_csv: missing or unsupported schema line");
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (pos >= text.size())
        throw std::invalid_argument("parse_csv: missing header row");

    std::vector<std::string> header;
    for (auto& [tok, quoted] : split_record(text, pos))
        header.push_back(std::move(tok));
    Table table(std::move(header));

    while (pos < text.size()) {
        auto fields = split_record(text, pos);
        if (fields.size() == 1 && fields[0].first.empty() && !fields[0].second)
            continue; // blank line
        std::vector<Cell> row;
        row.reserve(fields.size());
        for (auto& [tok, quoted] : fields)
            row.push_back(parse_token(tok, quoted));
        table.add_row(std::move(row));
    }
    return table;
}

nlohmann::json to_json(const Table& table)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows()) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            const auto& name = table.columns()[i];
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        if (std::isfinite(v))
                            obj[name] = v;
                        else
                            obj[name] = nullptr;
                    } else {
                        obj[name] = v;
                    }
                },
                row[i]);
        }
        rows.push_back(std::move(obj));
    }
    return {{"schema", kSchemaVersion}, {"columns", table.columns()}, {"rows", std::move(rows)}};
}

} // namespace posw
