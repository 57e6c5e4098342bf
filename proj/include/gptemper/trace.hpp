#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace gptemper {

struct TraceRow {
    double wall_time_s = 0.0;
    double step_or_gamma = 0.0;
    std::optional<double> ess; // ASMC only
    double log_target_mean = 0.0;
    std::uint64_t factorizations = 0;
    std::vector<double> rmse; // one per output, empty without test data
};

struct Trace {
    std::vector<TraceRow> rows;
    std::size_t rmse_columns = 0;
};

// Columns: wall_time_s,step_or_gamma,ess,log_target_mean,factorizations,rmse_1..rmse_m
void write_trace_csv(const Trace& trace, std::ostream& out);
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);

/// Throws SchemaError on a malformed header or row.
Trace read_trace_csv(std::istream& in);
Trace read_trace_csv(const std::filesystem::path& path);

} // namespace gptemper
