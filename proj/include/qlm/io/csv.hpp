#pragma once

// CSV output with 17 significant digits and a reader for the same layout.
// Lines starting with '#' are comments; "# reference: x,y,z" carries the
// projected state lambda * w_hat for plotting.

#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlm/dynamics.hpp"
#include "qlm/io/expr.hpp"
#include "qlm/linalg.hpp"

namespace qlm::io {

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

enum class Axis { time, length };

inline std::string trajectory_header(Axis axis)
{
    return axis == Axis::time ? "t_s,n1,n2,n3,norm,rate_per_s,g_rate_per_s,epsilon"
                              : "L_m,n1,n2,n3,norm,rate_per_m,g_rate_per_s,epsilon";
}

/// Writes the trajectory; epsilon is left empty where not tracked.
inline void write_trajectory(std::ostream& os, const dynamics::Trajectory& traj, Axis axis,
                             const std::vector<std::string>& comments = {},
                             std::optional<Vec3> reference = std::nullopt)
{
    for (const auto& c : comments) os << "# " << c << '\n';
    if (reference)
        os << "# reference: " << fmt17(reference->x) << ',' << fmt17(reference->y) << ',' << fmt17(reference->z)
           << '\n';
    os << trajectory_header(axis) << '\n';
    for (const auto& s : traj.samples) {
        os << fmt17(s.t) << ',' << fmt17(s.n.x) << ',' << fmt17(s.n.y) << ',' << fmt17(s.n.z) << ',' << fmt17(s.norm)
           << ',' << fmt17(s.rate) << ',' << fmt17(s.g_rate) << ',';
        if (s.epsilon) os << fmt17(*s.epsilon);
        os << '\n';
    }
}

/// Generic table: header plus rows of preformatted cells.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void comment(std::string c) { comments_.push_back(std::move(c)); }

    void add(std::vector<std::string> row)
    {
        if (row.size() != columns_.size()) throw CsvError("table row has the wrong number of cells");
        rows_.push_back(std::move(row));
    }

    void write(std::ostream& os) const
    {
        for (const auto& c : comments_) os << "# " << c << '\n';
        for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
        os << '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << '\n';
        }
    }

    std::size_t size() const { return rows_.size(); }

private:
    std::vector<std::string> columns_;
    std::vector<std::string> comments_;
    std::vector<std::vector<std::string>> rows_;
};

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CsvError("cannot write '" + path + "'");
    out << content;
    if (!out) throw CsvError("write failed for '" + path + "'");
}

struct NumericCsv {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  // empty cells read as NaN
    std::optional<Vec3> reference;

    /// Index of a column or -1.
    int column(const std::string& name) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline std::vector<std::string> split_commas(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline NumericCsv read_numeric_csv(std::istream& in)
{
    NumericCsv csv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string tag = "# reference: ";
            if (line.rfind(tag, 0) == 0) {
                const auto cells = split_commas(line.substr(tag.size()));
                if (cells.size() == 3) {
                    try {
                        csv.reference = Vec3{evaluate(cells[0]), evaluate(cells[1]), evaluate(cells[2])};
                    } catch (const ExprError&) {
                        throw CsvError("line " + std::to_string(lineno) + ": malformed reference comment");
                    }
                }
            }
            continue;
        }
        if (csv.columns.empty()) {
            csv.columns = split_commas(line);
            continue;
        }
        const auto cells = split_commas(line);
        if (cells.size() != csv.columns.size())
            throw CsvError("line " + std::to_string(lineno) + ": expected " + std::to_string(csv.columns.size()) +
                           " cells, found " + std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            if (c.empty()) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            try {
                row.push_back(evaluate(c));
            } catch (const ExprError&) {
                throw CsvError("line " + std::to_string(lineno) + ": non-numeric cell '" + c + "'");
            }
        }
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

inline NumericCsv read_numeric_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw CsvError("cannot read '" + path + "'");
    return read_numeric_csv(in);
}

}  // namespace qlm::io
