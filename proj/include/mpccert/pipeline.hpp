#pragma once

#include "mpccert/analytic.hpp"
#include "mpccert/config.hpp"
#include "mpccert/estimation.hpp"
#include "mpccert/sim.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace mpccert {

/// One (parameter point, sigma path, terminal, method) entry.
struct ReportRow {
    std::string param;  // "q=...", "r=...", "N=..." joined by ';', or "base"
    double q = 0.0, r = 0.0;
    int N = 1;
    std::string sigma;  // "l" (sigma = l_min) or "W" (sigma = storage)
    Method method = Method::Thm1;
    std::string terminal = "none";
    double alpha = 0.0;
    double n_min = 0.0;
    bool sampled = false;
    bool ok = true;           // false when the row could not be evaluated
    bool applicable = true;   // false when the sigma path does not apply
    std::string note;
    double gamma_bar = 0.0, eps_o = 1.0, eps_f = 0.0, c_f_lower = 0.0, c_f_upper = 0.0, gamma_f_bar = 0.0;

    /// "<method>/<sigma>", the method column of the report.
    [[nodiscard]] std::string method_label() const;
};

struct SimulationSummary {
    std::string label;
    ClosedLoopTrace trace;
    LimitCycleReport limit_cycle;
    double final_deviation = 0.0;
    double alpha = 0.0;  // certificate used for the Lyapunov residuals
    std::size_t residual_violations = 0;
    nlohmann::json meta;
};

struct CertificationReport {
    std::string name;
    std::vector<ReportRow> rows;
    nlohmann::json metadata;  // deterministic: config echo and constants snapshots
    nlohmann::json timings;   // wall-clock only
    [[nodiscard]] bool failed() const;
};

struct RunOptions {
    int threads = 1;
    std::string lp_dump_dir;  // one LP file per LP-based row when non-empty
};

/// Sweep points (q, r, N) of a config, in a fixed order.
struct SweepPoint {
    double q, r;
    int N;
    std::string param;
};
[[nodiscard]] std::vector<SweepPoint> sweep_points(const ScenarioConfig& cfg);

/// Constants estimation followed by every analytic and LP certificate for each
/// sweep point, sigma path and configured terminal cost. Failures are recorded
/// per row; other rows continue.
[[nodiscard]] CertificationReport run_certification(const ScenarioConfig& cfg, const RunOptions& opt = {});

/// Largest N <= n_max whose LP certificate is not positive, so that every N in
/// (n_min, n_max] is certified. Returns +inf when N = n_max is not certified.
/// For sampled, non-monotone gamma sequences the certificate can change sign
/// more than once, hence the full downward scan.
[[nodiscard]] double lp_horizon_bound(const CertificationConstants& c, const TerminalConstants* t, int n_max);

/// Closed loop of the simulation section with its certificate and diagnostics.
[[nodiscard]] SimulationSummary run_simulation(const ScenarioConfig& cfg);

/// Per sigma path: gamma_k CSV rows and, per terminal, gamma_kf rows. Returns
/// (file suffix, gamma, mode, sampled) records for write_gamma_csv.
struct GammaTable {
    std::string suffix;
    std::vector<double> gamma;
    std::string mode;
    bool sampled = false;
};
[[nodiscard]] std::vector<GammaTable> estimate_constants(const ScenarioConfig& cfg, nlohmann::json* meta = nullptr);

}  // namespace mpccert
