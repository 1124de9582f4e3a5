#include "momsplit/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace momsplit {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10e", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const Trace& trace, bool timing) {
  out << "k,E_k,step_norm,cert,dist,err_ms\n";
  for (const IterationRecord& r : trace.records) {
    out << r.k << ',' << format_number(r.E) << ',' << format_number(r.step_norm) << ',';
    if (r.cert) out << format_number(*r.cert);
    out << ',';
    if (r.dist) out << format_number(*r.dist);
    out << ',';
    if (timing) out << format_number(r.wall_ms);
    out << '\n';
  }
}

std::string trace_csv(const Trace& trace, bool timing) {
  std::ostringstream ss;
  write_trace_csv(ss, trace, timing);
  return ss.str();
}

RunSummary summarize(std::string algorithm, const Trace& trace, std::optional<double> objective) {
  RunSummary s;
  s.algorithm = std::move(algorithm);
  s.status = trace.status;
  s.iters = trace.iterations;
  s.time_s = trace.time_s;
  s.objective = objective;
  s.final_Ek = trace.final_E;
  return s;
}

nlohmann::json summary_json(const RunSummary& s) {
  nlohmann::json j;
  j["algorithm"] = s.algorithm;
  j["status"] = std::string(to_string(s.status));
  j["iters"] = s.iters;
  j["time_s"] = s.time_s;
  if (s.objective) j["objective"] = *s.objective;
  // JSON has no infinity; a non-finite E_k is reported as null.
  if (std::isfinite(s.final_Ek)) {
    j["final_Ek"] = s.final_Ek;
  } else {
    j["final_Ek"] = nullptr;
  }
  if (s.seed) j["seed"] = *s.seed;
  return j;
}

}  // namespace momsplit
