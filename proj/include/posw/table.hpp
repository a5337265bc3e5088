// SPDX-License-Identifier: Apache-2.0
//
// posw - discrete-phase hybrid beamforming toolkit for mmWave MIMO
// Licensed under the Apache License, Version 2.0. You may obtain a copy of
// the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace posw {

inline constexpr int kSchemaVersion = 1;

using Cell = std::variant<std::int64_t, double, std::string>;

/// Rectangular result table. Doubles are rounded to 9 significant digits on
/// insertion so that what is stored is exactly what gets emitted.
class Table {
public:
    Table() = default;
    explicit Table(std::vector<std::string> columns);

    void add_row(std::vector<Cell> row);

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }
    std::size_t column_index(std::string_view name) const;

    bool operator==(const Table&) const = default;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

double round_significant(double value);
std::string format_cell(const Cell& cell);

/// `#schema=1` line, header row, one line per row; LF line endings.
std::string to_csv(const Table& table);
Table parse_csv(std::string_view text);

nlohmann::json to_json(const Table& table);

} // namespace posw
