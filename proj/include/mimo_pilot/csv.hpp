// SPDX-License-Identifier: Apache-2.0
//
// mimo-pilot: channel estimation and pilot power allocation for multi-cell massive MIMO
// Copyright (C) 2026 The mimo-pilot authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MIMO_PILOT_CSV_HPP
#define MIMO_PILOT_CSV_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mimo_pilot
{

// Shortest decimal that round-trips to the same double. Infinite values are
// written as "inf" / "-inf".
inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true)
    {
        const auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

// In-memory CSV table. Cells are preformatted strings so that the byte
// output is fully determined by the producer.
class CsvTable
{
  public:
    CsvTable() = default;
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    const std::vector<std::string> &header() const { return header_; }
    const std::vector<std::vector<std::string>> &rows() const { return rows_; }
    std::size_t num_rows() const { return rows_.size(); }

    void add_row(std::vector<std::string> row)
    {
        if (row.size() != header_.size())
            throw std::logic_error("csv row width does not match header");
        rows_.push_back(std::move(row));
    }

    void write(std::ostream &out) const
    {
        write_line(out, header_);
        for (const auto &r : rows_)
            write_line(out, r);
    }

    std::string str() const
    {
        std::ostringstream ss;
        write(ss);
        return ss.str();
    }

  private:
    static void write_line(std::ostream &out, const std::vector<std::string> &cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out << (i ? "," : "") << cells[i];
        out << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Writes with LF line endings; throws std::runtime_error if the path is not writable.
inline void emit_csv(const CsvTable &table, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path);
    table.write(out);
    out.flush();
    if (!out)
        throw std::runtime_error("failed writing output file: " + path);
}

} // namespace mimo_pilot

#endif
