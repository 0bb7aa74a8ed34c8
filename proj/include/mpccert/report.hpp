#pragma once

#include "mpccert/pipeline.hpp"

#include <string>

namespace mpccert {

/// Header of the summary CSV.
inline constexpr const char* kReportHeader = "param,method,terminal,alpha,n_min,provenance";
/// Header of the detail CSV.
inline constexpr const char* kDetailHeader =
    "param,q,r,N,sigma,method,terminal,alpha,n_min,provenance,gamma_bar,eps_o,eps_f,c_f_lower,c_f_upper,"
    "gamma_f_bar,status,note";

[[nodiscard]] std::string report_csv(const CertificationReport& r);
[[nodiscard]] std::string detail_csv(const CertificationReport& r);

/// Writes <dir>/<prefix>.csv, <prefix>_details.csv, <prefix>.json and
/// <prefix>_timings.json atomically. Returns 0, or 1 when some row has no value.
int emit_reports(const CertificationReport& r, const std::string& dir, const std::string& prefix);

/// Writes <dir>/<prefix>_trace.csv and the JSON sidecar <prefix>_trace.json.
void emit_simulation(const SimulationSummary& s, const std::string& dir, const std::string& prefix);

}  // namespace mpccert
