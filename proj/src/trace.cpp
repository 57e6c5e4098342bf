#include "gptemper/trace.hpp"

#include "gptemper/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace gptemper {

namespace {

const char* const kFixedColumns[] = {"wall_time_s", "step_or_gamma", "ess", "log_target_mean", "factorizations"};
constexpr std::size_t kFixedCount = 5;

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_real(const std::string& cell, std::size_t line_no)
{
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size())
        throw SchemaError("malformed trace value '" + cell + "' on line " + std::to_string(line_no));
    return v;
}

} // namespace

void write_trace_csv(const Trace& trace, std::ostream& out)
{
    for (std::size_t i = 0; i < kFixedCount; ++i) out << (i ? "," : "") << kFixedColumns[i];
    for (std::size_t k = 0; k < trace.rmse_columns; ++k) out << ",rmse_" << k + 1;
    out << '\n';
    out << std::setprecision(17);
    for (const auto& row : trace.rows) {
        out << row.wall_time_s << ',' << row.step_or_gamma << ',';
        if (row.ess) out << *row.ess;
        out << ',' << row.log_target_mean << ',' << row.factorizations;
        for (std::size_t k = 0; k < trace.rmse_columns; ++k) {
            out << ',';
            if (k < row.rmse.size()) out << row.rmse[k];
        }
        out << '\n';
    }
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    write_trace_csv(trace, out);
}

Trace read_trace_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty trace");
    const auto header = split(line);
    if (header.size() < kFixedCount) throw SchemaError("trace header too short");
    for (std::size_t i = 0; i < kFixedCount; ++i)
        if (header[i] != kFixedColumns[i]) throw SchemaError("unexpected trace column '" + header[i] + "'");
    Trace trace;
    trace.rmse_columns = header.size() - kFixedCount;
    for (std::size_t k = 0; k < trace.rmse_columns; ++k)
        if (header[kFixedCount + k] != "rmse_" + std::to_string(k + 1))
            throw SchemaError("unexpected trace column '" + header[kFixedCount + k] + "'");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw SchemaError("trace line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                              " cells, expected " + std::to_string(header.size()));
        TraceRow row;
        row.wall_time_s = parse_real(cells[0], line_no);
        row.step_or_gamma = parse_real(cells[1], line_no);
        if (!cells[2].empty()) row.ess = parse_real(cells[2], line_no);
        row.log_target_mean = parse_real(cells[3], line_no);
        const double f = parse_real(cells[4], line_no);
        if (f < 0.0 || f != std::floor(f)) throw SchemaError("factorizations must be a non-negative integer");
        row.factorizations = static_cast<std::uint64_t>(f);
        for (std::size_t k = 0; k < trace.rmse_columns; ++k)
            if (!cells[kFixedCount + k].empty()) row.rmse.push_back(parse_real(cells[kFixedCount + k], line_no));
        trace.rows.push_back(std::move(row));
    }
    return trace;
}

Trace read_trace_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open trace '" + path.string() + "'");
    return read_trace_csv(in);
}

} // namespace gptemper
