#pragma once

#include "mpccert/estimation.hpp"
#include "mpccert/system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mpccert {

enum class TerminalKind { None, ScaledMeasure, FiniteTail, QuadraticForm, NarxScaled };

const char* to_string(TerminalKind k);

/// Terminal cost of the finite-horizon problem.
///  ScaledMeasure: V_f = omega |x - x_s|^2_{P_sigma}
///  FiniteTail:    V_f = sum of M stage costs under the fallback input u_s
///  QuadraticForm: V_f = |x - x_s|^2_{P_f}
///  NarxScaled:    V_f = omega W with the NARX storage of lag nu on the predicted costs
struct TerminalCostSpec {
    TerminalKind kind = TerminalKind::None;
    double omega = 0.0;
    MatrixXd P_sigma;
    int M = 0;
    MatrixXd P_f;
    int nu = 0;

    static TerminalCostSpec none();
    static TerminalCostSpec scaled(double omega, const MatrixXd& P_sigma);
    static TerminalCostSpec finite_tail(int M);
    static TerminalCostSpec quadratic(const MatrixXd& P_f);
    static TerminalCostSpec narx_scaled(double omega, int nu);
    void validate(int n) const;
};

struct OcpOptions {
    double tol_linear = 1e-8;
    double tol_nonlinear = 1e-6;
    int max_outer = 100;
    int max_qp_iters = 200;
    bool cold_start = true;  // extra start at u_s for nonlinear plants
};

struct OcpSolution {
    std::vector<VectorXd> u;  // u(0..N-1)
    std::vector<VectorXd> x;  // x(0..N+M), including the fallback tail
    double value = 0.0;
    int iterations = 0;
    double residual = 0.0;  // infinity norm of the projected gradient
    bool converged = false;
};

struct BoxQpResult {
    VectorXd x;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// min 0.5 x'Hx + g'x over lo <= x <= hi by projected Newton with an Armijo
/// search along the projection arc. H must be positive definite.
[[nodiscard]] BoxQpResult solve_box_qp(const MatrixXd& H, const VectorXd& g, const VectorXd& lo, const VectorXd& hi,
                                       const VectorXd& x0, double tol = 1e-12, int max_iters = 200);

/// Cost of the input sequence u (stacked, N*m) from x0, with the predicted states.
[[nodiscard]] double ocp_cost(const Plant& plant, const QuadraticStageCost& cost, const TerminalCostSpec& term, int N,
                              const VectorXd& x0, const VectorXd& u, std::vector<VectorXd>* states = nullptr);

/// Single shooting over the input sequence, solved by projected Gauss-Newton:
/// each step minimizes the condensed quadratic model over the input box and is
/// followed by a backtracking search on the true cost. For linear plants the
/// model is exact.
[[nodiscard]] OcpSolution solve_ocp(const Plant& plant, const QuadraticStageCost& cost, const TerminalCostSpec& term,
                                    int N, const VectorXd& x0, const std::optional<VectorXd>& warm_start = std::nullopt,
                                    const OcpOptions& opt = {});

struct LqrResult {
    MatrixXd K;  // u - u_s = -K (x - x_s)
    double spectral_radius = 0.0;
    MatrixXd P;  // value matrix of the N-step problem
};

/// Backward Riccati recursion from P_f over N stages, ignoring the input box.
[[nodiscard]] LqrResult finite_horizon_lqr(const LinearSystem& sys, const QuadraticStageCost& cost,
                                           const MatrixXd& P_f, int N);

/// Stationary Riccati solution by iterating the recursion to a fixed point.
[[nodiscard]] MatrixXd stationary_riccati(const LinearSystem& sys, const QuadraticStageCost& cost, double tol = 1e-13,
                                          int max_iters = 100000);

struct ClosedLoopTrace {
    std::vector<VectorXd> x;  // x(0..T)
    std::vector<VectorXd> u;  // u(0..T-1)
    std::vector<double> stage_cost;      // T entries
    std::vector<double> value;           // V_N(x(k)), T+1 entries
    std::vector<double> candidate_cost;  // cost of the shifted warm start, T entries (nan at k = 0)
    std::vector<double> lyap_residual;   // filled by lyapunov_residuals
    std::vector<int> ocp_iterations;
    std::vector<bool> ocp_converged;
    double performance = 0.0;  // J_T
};

[[nodiscard]] ClosedLoopTrace closed_loop(const Plant& plant, const QuadraticStageCost& cost,
                                          const TerminalCostSpec& term, int N, const VectorXd& x0, int T,
                                          const OcpOptions& opt = {});

/// r_k = Y(x(k+1)) - Y(x(k)) + eps_o alpha sigma(x(k)) with Y = V_N + W.
/// For NARX storages W is evaluated from the closed-loop stage costs (zero history before k = 0).
[[nodiscard]] std::vector<double> lyapunov_residuals(const ClosedLoopTrace& trace, const StorageFunction& W,
                                                     const StateMeasure& sigma, double alpha);

enum class CheckStatus { Satisfied, Violated, Inconclusive };
const char* to_string(CheckStatus s);

struct PerformanceCheck {
    CheckStatus status = CheckStatus::Inconclusive;
    double lhs = 0.0;  // alpha (J_T + W(x0))
    double rhs = 0.0;  // factor (V_inf + W(x0))
    double slack = 0.0;
    double tail = 0.0;  // last stage cost of the trace
};

/// alpha (J_T + W(x0)) <= factor (v_inf + W(x0)); factor = 1 without terminal cost.
/// Inconclusive when the last stage cost exceeds tail_tol (1 + J_T).
[[nodiscard]] PerformanceCheck performance_ratio(const ClosedLoopTrace& trace, double W_x0, double v_inf, double alpha,
                                                 double factor = 1.0, double tol = 1e-6, double tail_tol = 1e-8);

struct VInfinity {
    double value = 0.0;      // V_H
    double increment = 0.0;  // V_H - V_{H/2}
    bool converged = false;
};

/// Long-horizon proxy for the infinite-horizon value, without terminal cost.
[[nodiscard]] VInfinity v_infty_oracle(const Plant& plant, const QuadraticStageCost& cost, const VectorXd& x0,
                                       int H = 500, const OcpOptions& opt = {});

struct LimitCycleReport {
    bool limit_cycle = false;
    double tail_min_norm = 0.0;
    double tail_max_norm = 0.0;
    double saturation_fraction = 0.0;  // share of window steps with some input near its bound
    double max_input_level = 0.0;      // max |u - centre| / half-range over the window
};

/// Trailing-window test: min |x - x_s| over the last window_fraction of the trace
/// stays above theta while the maximum stays below bound. An input counts as
/// saturating when |u - centre| >= sat_level * half-range.
[[nodiscard]] LimitCycleReport detect_limit_cycle(const ClosedLoopTrace& trace, const VectorXd& x_s,
                                                  const VectorXd& u_lo, const VectorXd& u_hi, double theta = 1e-2,
                                                  double window_fraction = 0.25, double bound = 1e6,
                                                  double sat_level = 0.95);

/// k, x_1..x_n, u_1..u_m, stage_cost, V_N, lyap_residual; one row per applied input.
void write_trace_csv(const std::string& path, const ClosedLoopTrace& trace);

}  // namespace mpccert
