#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "momsplit/solvers.hpp"

namespace momsplit {

/// CSV with header `k,E_k,step_norm,cert,dist,err_ms`. Missing values are
/// empty cells; err_ms is written only when `timing` is set so that repeated
/// runs produce identical files.
void write_trace_csv(std::ostream& out, const Trace& trace, bool timing = false);
std::string trace_csv(const Trace& trace, bool timing = false);

struct RunSummary {
  std::string algorithm;
  RunStatus status = RunStatus::kMaxIter;
  std::size_t iters = 0;
  double time_s = 0.0;
  std::optional<double> objective;
  double final_Ek = 0.0;
  std::optional<std::uint64_t> seed;
};

RunSummary summarize(std::string algorithm, const Trace& trace, std::optional<double> objective = std::nullopt);
/// {algorithm, status, iters, time_s, objective?, final_Ek, seed?}.
nlohmann::json summary_json(const RunSummary& s);

/// Fixed-format number used in every text output (%.10e, "inf", "nan").
std::string format_number(double v);

}  // namespace momsplit
