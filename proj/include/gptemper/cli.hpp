#pragma once

#include "gptemper/synthetic.hpp"
#include "gptemper/trace.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>

namespace gptemper {

/// Entry point behind the `gptemper` executable. Exit codes: 0 success,
/// 1 runtime failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// {rmse_ratio, factorization_ratio, time_to_target_rmse} of trace `a`
/// relative to trace `b`. The target defaults to the worse of the two final
/// RMSEs, so both traces reach it.
nlohmann::json compare_verdict(const Trace& a, const Trace& b, std::optional<double> target_rmse = std::nullopt);

/// Both traces on one time axis; each row carries the latest values of each side.
void write_aligned(const Trace& a, const Trace& b, std::ostream& out);

nlohmann::json benchmark_summary(const BenchmarkReport& report, const RunConfig& config);

} // namespace gptemper
