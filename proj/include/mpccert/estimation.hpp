#pragma once

#include "mpccert/analytic.hpp"
#include "mpccert/system.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mpccert {

enum class MeasureMode { StageCostMin, QuadraticForm };

/// sigma(x) = |x - x_s|^2_P. For StageCostMin, P is the state weight of the cost.
/// P_inv may carry an accurately computed inverse when P is badly conditioned.
struct StateMeasure {
    MeasureMode mode = MeasureMode::StageCostMin;
    MatrixXd P;
    std::optional<MatrixXd> P_inv;
    VectorXd x_s;

    [[nodiscard]] double eval(const VectorXd& x) const;
    static StateMeasure stage_cost_min(const QuadraticStageCost& cost, const MatrixXd& C);
    static StateMeasure quadratic(const MatrixXd& P, const VectorXd& x_s);
};

enum class StorageKind { Zero, QuadraticForm, NarxWeights };

struct StorageFunction {
    StorageKind kind = StorageKind::Zero;
    MatrixXd P_o;                    // QuadraticForm
    std::optional<MatrixXd> P_o_inv;  // QuadraticForm, when available
    VectorXd x_s;
    int nu = 0;  // NarxWeights
    double eps_o = 1.0;

    [[nodiscard]] double eval(const VectorXd& x) const;
    /// NARX weights (nu + 1 - j) / nu applied to past stage costs, most recent first.
    [[nodiscard]] double eval_narx(const std::vector<double>& past_costs) const;
};

/// gamma_k = lambda_max(G_k, P_sigma) with G_1 = Q, G_{k+1} = Q + A' G_k A,
/// plus (A^k)' P_f A^k when a terminal matrix is supplied.
[[nodiscard]] std::vector<double> gamma_linear_openloop(const LinearSystem& sys, const QuadraticStageCost& cost,
                                                        const StateMeasure& sigma,
                                                        const std::optional<MatrixXd>& P_f, int K);

/// Supremum over k of the open-loop constants. Uses the infinite-horizon Gramian
/// so that the value is a bound for every k, not only k <= K.
[[nodiscard]] double gamma_bar_linear(const LinearSystem& sys, const QuadraticStageCost& cost,
                                      const StateMeasure& sigma, const std::optional<MatrixXd>& P_f, int K);

struct GridSpec {
    std::vector<double> lo, hi;  // offsets from the setpoint, per dimension
    std::vector<int> points;
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] VectorXd point(std::size_t idx) const;
};

enum class GridMeasure { StageCostMin, Narx };

struct GridGammaResult {
    std::vector<double> gamma;    // gamma_1..gamma_K
    std::vector<double> gamma_f;  // with terminal weighting, empty if omega == 0
    std::size_t points_used = 0;
    std::size_t points_skipped = 0;
    std::size_t points_diverged = 0;
    bool sampled = true;
};

/// Sampled constants for a nonlinear plant with u = u_s. For GridMeasure::Narx the
/// grid point is the state nu steps back, so the storage history comes from the
/// same open-loop run. omega > 0 adds the scaled terminal weighting.
[[nodiscard]] GridGammaResult gamma_nonlinear_grid(const NonlinearSystem& sys, const QuadraticStageCost& cost,
                                                   GridMeasure measure, int nu, const GridSpec& grid, int K,
                                                   double omega = 0.0, int threads = 1);

[[nodiscard]] StorageFunction narx_storage(int nu);

/// W(x+) - W(x) + eps_o W(x) - l(x,u) along a closed or open trajectory of stage
/// costs, using sigma = W. Entries start at index nu.
[[nodiscard]] std::vector<double> narx_dissipation_residuals(const StorageFunction& W,
                                                             const std::vector<double>& stage_costs);
/// W(x+) - W(x) - l(x,u) + (1/nu) sum of the last nu costs; zero up to rounding.
[[nodiscard]] std::vector<double> narx_telescoping_residuals(const StorageFunction& W,
                                                             const std::vector<double>& stage_costs);

struct StorageCandidate {
    double eps_o = 0.0;
    bool feasible = false;
    double gamma_bar = 0.0;
    double n_min = 0.0;
    double backoff = 1.0;
    int iterations = 0;
    std::string note;
};

struct StorageSynthesis {
    StorageFunction storage;
    CertificationConstants constants;
    StateMeasure sigma;
    std::vector<StorageCandidate> candidates;
    bool found = false;
};

struct StorageOptions {
    int K = 400;
    double regularization = 1e-9;  // fictitious input weight, relative to |B R^{-1} B'|
    int max_iters = 400000;
    double tol = 1e-13;
};

/// Maximal quadratic storage for each eps_o in the grid (the discounted required
/// supply, iterated in information form), backed off until the dissipation
/// matrix is numerically positive semi-definite. Picks the eps_o with the
/// smallest horizon bound for sigma = W.
[[nodiscard]] StorageSynthesis synthesize_storage_linear(const LinearSystem& sys, const QuadraticStageCost& cost,
                                                         const std::vector<double>& eps_grid,
                                                         const StorageOptions& opt = {});

/// n points log-spaced in [lo, hi].
[[nodiscard]] std::vector<double> log_grid(double lo, double hi, int n);

/// Dissipation matrix [[eta P + Q - A'PA, -A'PB], [-B'PA, R - B'PB]].
[[nodiscard]] MatrixXd dissipation_matrix(const LinearSystem& sys, const QuadraticStageCost& cost,
                                          const MatrixXd& P, double eps_o);

struct StorageReport {
    double max_dissipation = 0.0;  // max of (W(x+) - W(x) + eps_o sigma - l) / scale
    double max_sandwich = 0.0;     // violation of gl sigma <= W <= gu sigma, scaled
    int samples = 0;
    bool pass = false;
    bool sampled = true;
};

[[nodiscard]] StorageReport verify_storage(const Plant& plant, const QuadraticStageCost& cost,
                                           const StorageFunction& W, const StateMeasure& sigma, double gamma_o_lower,
                                           double gamma_o_upper, int samples, std::uint64_t seed,
                                           double tol = 1e-9);

/// Scales an ISS storage (W(f(x,u)) <= eta W(x) + |u|^2) by r, so that sigma = r W
/// and gamma_bar becomes gamma_bar / r.
[[nodiscard]] std::pair<StorageFunction, CertificationConstants> rescale_for_input_regularization(
    const StorageFunction& W, const CertificationConstants& c, double r);

/// Unit-input ISS storage for a stable linear plant: the inverse of the
/// controllability Gramian of (A / sqrt(eta), B).
[[nodiscard]] StorageFunction iss_storage_linear(const LinearSystem& sys, double eps_o);

/// V_f = omega_t sigma with omega_t = omega lambda_min(Q, P_sigma), so that
/// omega_t sigma <= omega l_min. gamma_kf = lambda_max(G_k + omega_t A^k' P_sigma A^k, P_sigma).
[[nodiscard]] TerminalConstants terminal_scaled_linear(const LinearSystem& sys, const QuadraticStageCost& cost,
                                                       const StateMeasure& sigma, double omega, int K,
                                                       double* omega_t = nullptr);

/// V_f = sum of M stage costs under u = u_s, i.e. the quadratic form G_M.
/// eps_f = lambda_max(A^M' Q A^M, G_M), c_f from the generalized spectrum of (G_M, P_sigma),
/// gamma_kf = lambda_max(G_{k+M}, P_sigma).
[[nodiscard]] TerminalConstants terminal_finite_tail_linear(const LinearSystem& sys, const QuadraticStageCost& cost,
                                                            const StateMeasure& sigma, int M, int K);

/// Finishes a terminal record for the bounds: a negative eps_f is raised to 0
/// (the relaxed CLF inequality then holds a fortiori) and [c_f_lower, c_f_upper]
/// is widened to contain gamma_1f / (1 + eps_f). gamma_f_bar covers gamma_f.
[[nodiscard]] TerminalConstants normalize_terminal(TerminalConstants t);

/// Writes k,gamma_k,mode,provenance rows.
void write_gamma_csv(const std::string& path, const std::vector<double>& gamma, const std::string& mode,
                     bool sampled);

}  // namespace mpccert
