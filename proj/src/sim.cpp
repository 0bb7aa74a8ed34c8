#include "mpccert/sim.hpp"

#include "mpccert/io.hpp"
#include "mpccert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mpccert {

using linalg::sym;

const char* to_string(TerminalKind k) {
    switch (k) {
        case TerminalKind::None: return "none";
        case TerminalKind::ScaledMeasure: return "scaled";
        case TerminalKind::FiniteTail: return "finite_tail";
        case TerminalKind::QuadraticForm: return "quadratic";
        case TerminalKind::NarxScaled: return "narx_scaled";
    }
    return "?";
}

const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Satisfied: return "satisfied";
        case CheckStatus::Violated: return "violated";
        case CheckStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

TerminalCostSpec TerminalCostSpec::none() { return {}; }

TerminalCostSpec TerminalCostSpec::scaled(double omega, const MatrixXd& P_sigma) {
    TerminalCostSpec t;
    t.kind = TerminalKind::ScaledMeasure;
    t.omega = omega;
    t.P_sigma = P_sigma;
    return t;
}

TerminalCostSpec TerminalCostSpec::finite_tail(int M) {
    TerminalCostSpec t;
    t.kind = TerminalKind::FiniteTail;
    t.M = M;
    return t;
}

TerminalCostSpec TerminalCostSpec::quadratic(const MatrixXd& P_f) {
    TerminalCostSpec t;
    t.kind = TerminalKind::QuadraticForm;
    t.P_f = P_f;
    return t;
}

TerminalCostSpec TerminalCostSpec::narx_scaled(double omega, int nu) {
    TerminalCostSpec t;
    t.kind = TerminalKind::NarxScaled;
    t.omega = omega;
    t.nu = nu;
    return t;
}

void TerminalCostSpec::validate(int n) const {
    switch (kind) {
        case TerminalKind::None: break;
        case TerminalKind::ScaledMeasure:
            if (!(omega > 0.0)) throw std::invalid_argument("terminal: omega must be > 0");
            if (P_sigma.rows() != n || P_sigma.cols() != n) throw std::invalid_argument("terminal: P_sigma size");
            break;
        case TerminalKind::FiniteTail:
            if (M < 1) throw std::invalid_argument("terminal: M must be >= 1");
            break;
        case TerminalKind::QuadraticForm:
            if (P_f.rows() != n || P_f.cols() != n) throw std::invalid_argument("terminal: P_f size");
            break;
        case TerminalKind::NarxScaled:
            if (!(omega > 0.0)) throw std::invalid_argument("terminal: omega must be > 0");
            if (nu < 1) throw std::invalid_argument("terminal: nu must be >= 1");
            break;
    }
}

BoxQpResult solve_box_qp(const MatrixXd& H, const VectorXd& g, const VectorXd& lo, const VectorXd& hi,
                         const VectorXd& x0, double tol, int max_iters) {
    const Eigen::Index n = g.size();
    auto f = [&](const VectorXd& x) { return 0.5 * x.dot(H * x) + g.dot(x); };
    auto clamp = [&](const VectorXd& x) { return VectorXd(x.cwiseMax(lo).cwiseMin(hi)); };
    BoxQpResult res;
    res.x = clamp(x0);
    const double scale = 1.0 + g.cwiseAbs().maxCoeff();
    for (int it = 0; it < max_iters; ++it) {
        const VectorXd grad = H * res.x + g;
        res.residual = (res.x - clamp(res.x - grad)).cwiseAbs().maxCoeff();
        if (res.residual <= tol * scale) {
            res.converged = true;
            break;
        }
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lo = res.x(i) <= lo(i) && grad(i) > 0.0;
            const bool at_hi = res.x(i) >= hi(i) && grad(i) < 0.0;
            if (!at_lo && !at_hi) free.push_back(i);
        }
        res.iterations = it + 1;
        if (free.empty()) {
            res.converged = true;
            res.residual = 0.0;
            break;
        }
        const auto nf = static_cast<Eigen::Index>(free.size());
        MatrixXd Hf(nf, nf);
        VectorXd gf(nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
            gf(a) = grad(free[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < nf; ++b) Hf(a, b) = H(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
        }
        Eigen::LLT<MatrixXd> llt(Hf);
        if (llt.info() != Eigen::Success) throw std::domain_error("solve_box_qp: reduced Hessian not positive definite");
        const VectorXd df = -llt.solve(gf);
        VectorXd d = VectorXd::Zero(n);
        for (Eigen::Index a = 0; a < nf; ++a) d(free[static_cast<std::size_t>(a)]) = df(a);
        const double f0 = f(res.x);
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const VectorXd xn = clamp(res.x + step * d);
            const double fn = f(xn);
            if (fn <= f0 + 0.1 * grad.dot(xn - res.x)) {
                moved = fn < f0 || (xn - res.x).cwiseAbs().maxCoeff() > 0.0;
                res.x = xn;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    if (!res.converged) {
        const VectorXd grad = H * res.x + g;
        res.residual = (res.x - clamp(res.x - grad)).cwiseAbs().maxCoeff();
        res.converged = res.residual <= tol * scale;
    }
    return res;
}

namespace {

/// Stage-cost weights w_0..w_{N-1}, tail length and terminal matrix of a spec.
struct Weights {
    std::vector<double> w;
    int M = 0;
    MatrixXd P_f;
};

Weights make_weights(const TerminalCostSpec& term, int N, int n) {
    Weights W;
    W.w.assign(static_cast<std::size_t>(N), 1.0);
    W.P_f = MatrixXd::Zero(n, n);
    switch (term.kind) {
        case TerminalKind::None: break;
        case TerminalKind::ScaledMeasure: W.P_f = term.omega * term.P_sigma; break;
        case TerminalKind::FiniteTail: W.M = term.M; break;
        case TerminalKind::QuadraticForm: W.P_f = term.P_f; break;
        case TerminalKind::NarxScaled:
            if (N < term.nu) throw std::invalid_argument("NARX terminal cost needs N >= nu");
            for (int j = 1; j <= term.nu; ++j)
                W.w[static_cast<std::size_t>(N - j)] += term.omega * (term.nu + 1 - j) / term.nu;
            break;
    }
    return W;
}

VectorXd u_block(const VectorXd& U, int k, int m) { return U.segment(static_cast<Eigen::Index>(k) * m, m); }

double rollout(const Plant& plant, const QuadraticStageCost& cost, const Weights& W, int N, const VectorXd& x0,
               const VectorXd& U, std::vector<VectorXd>& X) {
    const int m = plant_m(plant);
    const MatrixXd& C = plant_C(plant);
    X.assign(static_cast<std::size_t>(N + W.M + 1), VectorXd());
    X[0] = x0;
    double J = 0.0;
    for (int k = 0; k < N + W.M; ++k) {
        const VectorXd u = k < N ? u_block(U, k, m) : cost.u_s;
        const double wk = k < N ? W.w[static_cast<std::size_t>(k)] : 1.0;
        J += wk * cost.eval(C, X[static_cast<std::size_t>(k)], u);
        X[static_cast<std::size_t>(k + 1)] = plant_step(plant, X[static_cast<std::size_t>(k)], u);
    }
    const VectorXd d = X.back() - cost.x_s;
    J += d.dot(W.P_f * d);
    return J;
}

/// Gradient and Gauss-Newton Hessian of the cost through condensed sensitivities.
void condensed_model(const Plant& plant, const QuadraticStageCost& cost, const Weights& W, int N,
                     const std::vector<VectorXd>& X, const VectorXd& U, VectorXd& grad, MatrixXd& Hess) {
    const int n = plant_n(plant), m = plant_m(plant);
    const int nU = N * m;
    const MatrixXd Q = cost.state_weight(plant_C(plant));
    grad = VectorXd::Zero(nU);
    Hess = MatrixXd::Zero(nU, nU);
    for (int k = 0; k < N; ++k) {
        const double wk = W.w[static_cast<std::size_t>(k)];
        grad.segment(k * m, m) += 2.0 * wk * cost.R * (u_block(U, k, m) - cost.u_s);
        Hess.block(k * m, k * m, m, m) += 2.0 * wk * cost.R;
    }
    MatrixXd Gam = MatrixXd::Zero(n, nU);
    MatrixXd Ax, Bu;
    const bool linear = plant_is_linear(plant);
    const LinearSystem* lin = linear ? &std::get<LinearSystem>(plant) : nullptr;
    for (int k = 1; k <= N + W.M; ++k) {
        const VectorXd u = k - 1 < N ? u_block(U, k - 1, m) : cost.u_s;
        if (linear) {
            Gam = lin->A * Gam;
            if (k - 1 < N) Gam.middleCols((k - 1) * m, m) += lin->B;
        } else {
            plant_jacobians(plant, X[static_cast<std::size_t>(k - 1)], u, Ax, Bu);
            Gam = Ax * Gam;
            if (k - 1 < N) Gam.middleCols((k - 1) * m, m) += Bu;
        }
        MatrixXd S = MatrixXd::Zero(n, n);
        if (k < N) S += W.w[static_cast<std::size_t>(k)] * Q;
        if (k >= N && k < N + W.M) S += Q;
        if (k == N + W.M) S += W.P_f;
        if (S.cwiseAbs().maxCoeff() == 0.0) continue;
        const int cols = std::min(k, N) * m;  // x_k depends on u_0..u_{min(k,N)-1}
        const MatrixXd G = Gam.leftCols(cols);
        const VectorXd d = X[static_cast<std::size_t>(k)] - cost.x_s;
        grad.head(cols) += 2.0 * G.transpose() * (S * d);
        Hess.topLeftCorner(cols, cols) += 2.0 * G.transpose() * S * G;
    }
    Hess = sym(Hess);
}

double projected_residual(const VectorXd& U, const VectorXd& grad, const VectorXd& lo, const VectorXd& hi) {
    return (U - (U - grad).cwiseMax(lo).cwiseMin(hi)).cwiseAbs().maxCoeff();
}

OcpSolution solve_from(const Plant& plant, const QuadraticStageCost& cost, const Weights& W, int N, const VectorXd& x0,
                       VectorXd U, const OcpOptions& opt) {
    const int m = plant_m(plant);
    const VectorXd lo = plant_u_lo(plant).replicate(N, 1);
    const VectorXd hi = plant_u_hi(plant).replicate(N, 1);
    U = U.cwiseMax(lo).cwiseMin(hi);
    const bool linear = plant_is_linear(plant);
    const double tol = linear ? opt.tol_linear : opt.tol_nonlinear;
    std::vector<VectorXd> X, Xn;
    double J = rollout(plant, cost, W, N, x0, U, X);
    OcpSolution sol;
    VectorXd grad;
    MatrixXd Hess;
    for (int it = 0; it < opt.max_outer; ++it) {
        condensed_model(plant, cost, W, N, X, U, grad, Hess);
        sol.residual = projected_residual(U, grad, lo, hi);
        const double scale = 1.0 + std::abs(J);
        if (sol.residual <= tol * scale) {
            sol.converged = true;
            break;
        }
        Hess.diagonal().array() += 1e-14 * (1.0 + Hess.diagonal().cwiseAbs().maxCoeff());
        const BoxQpResult qp =
            solve_box_qp(Hess, grad, lo - U, hi - U, VectorXd::Zero(U.size()), 1e-13, opt.max_qp_iters);
        const VectorXd d = qp.x;
        const double slope = grad.dot(d);
        sol.iterations = it + 1;
        if (!(slope < 0.0)) break;
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            const VectorXd Un = U + t * d;
            const double Jn = rollout(plant, cost, W, N, x0, Un, Xn);
            if (std::isfinite(Jn) && Jn <= J + 1e-4 * t * slope) {
                U = Un;
                J = Jn;
                X.swap(Xn);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
    }
    if (!sol.converged) {
        condensed_model(plant, cost, W, N, X, U, grad, Hess);
        sol.residual = projected_residual(U, grad, lo, hi);
        sol.converged = sol.residual <= tol * (1.0 + std::abs(J));
    }
    sol.value = J;
    sol.x = X;
    sol.u.clear();
    for (int k = 0; k < N; ++k) sol.u.push_back(u_block(U, k, m));
    return sol;
}

}  // namespace

double ocp_cost(const Plant& plant, const QuadraticStageCost& cost, const TerminalCostSpec& term, int N,
                const VectorXd& x0, const VectorXd& u, std::vector<VectorXd>* states) {
    const Weights W = make_weights(term, N, plant_n(plant));
    std::vector<VectorXd> X;
    const double J = rollout(plant, cost, W, N, x0, u, X);
    if (states) *states = std::move(X);
    return J;
}

OcpSolution solve_ocp(const Plant& plant, const QuadraticStageCost& cost, const TerminalCostSpec& term, int N,
                      const VectorXd& x0, const std::optional<VectorXd>& warm_start, const OcpOptions& opt) {
    if (N < 1) throw std::invalid_argument("solve_ocp: N must be >= 1");
    if (!x0.allFinite()) throw std::invalid_argument("solve_ocp: x0 not finite");
    const int n = plant_n(plant), m = plant_m(plant);
    if (x0.size() != n) throw std::invalid_argument("solve_ocp: x0 has wrong size");
    term.validate(n);
    const Weights W = make_weights(term, N, n);
    const VectorXd cold = cost.u_s.replicate(N, 1);
    if (warm_start && warm_start->size() != N * m) throw std::invalid_argument("solve_ocp: warm start has wrong size");
    OcpSolution best = solve_from(plant, cost, W, N, x0, warm_start ? *warm_start : cold, opt);
    if (warm_start && opt.cold_start && !plant_is_linear(plant)) {
        OcpSolution alt = solve_from(plant, cost, W, N, x0, cold, opt);
        if (alt.value < best.value) best = std::move(alt);
    }
    return best;
}

LqrResult finite_horizon_lqr(const LinearSystem& sys, const QuadraticStageCost& cost, const MatrixXd& P_f, int N) {
    if (N < 1) throw std::invalid_argument("finite_horizon_lqr: N must be >= 1");
    const MatrixXd Q = cost.state_weight(sys.C);
    const MatrixXd& A = sys.A;
    const MatrixXd& B = sys.B;
    MatrixXd P = P_f;
    MatrixXd K;
    for (int j = 0; j < N; ++j) {
        const MatrixXd S = cost.R + B.transpose() * P * B;
        Eigen::LLT<MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) throw std::domain_error("finite_horizon_lqr: R + B'PB not positive definite");
        K = llt.solve(B.transpose() * P * A);
        P = sym(Q + A.transpose() * P * A - A.transpose() * P * B * K);
    }
    LqrResult res;
    res.K = K;
    res.P = P;
    res.spectral_radius = linalg::spectral_radius(A - B * K);
    return res;
}

MatrixXd stationary_riccati(const LinearSystem& sys, const QuadraticStageCost& cost, double tol, int max_iters) {
    const MatrixXd Q = cost.state_weight(sys.C);
    const MatrixXd& A = sys.A;
    const MatrixXd& B = sys.B;
    MatrixXd P = MatrixXd::Zero(sys.n(), sys.n());
    for (int it = 0; it < max_iters; ++it) {
        const MatrixXd K = (cost.R + B.transpose() * P * B).llt().solve(B.transpose() * P * A);
        const MatrixXd Pn = sym(Q + A.transpose() * P * A - A.transpose() * P * B * K);
        const double d = (Pn - P).cwiseAbs().maxCoeff();
        P = Pn;
        if (d <= tol * (1.0 + P.cwiseAbs().maxCoeff())) break;
    }
    return P;
}

ClosedLoopTrace closed_loop(const Plant& plant, const QuadraticStageCost& cost, const TerminalCostSpec& term, int N,
                            const VectorXd& x0, int T, const OcpOptions& opt) {
    if (T < 0) throw std::invalid_argument("closed_loop: T must be >= 0");
    const int m = plant_m(plant);
    const MatrixXd& C = plant_C(plant);
    ClosedLoopTrace tr;
    tr.x.push_back(x0);
    std::optional<VectorXd> warm;
    const Weights W = make_weights(term, N, plant_n(plant));
    for (int k = 0; k <= T; ++k) {
        const VectorXd& xk = tr.x.back();
        if (k > 0) {
            std::vector<VectorXd> dummy;
            tr.candidate_cost.push_back(rollout(plant, cost, W, N, xk, *warm, dummy));
        }
        const OcpSolution sol = solve_ocp(plant, cost, term, N, xk, warm, opt);
        tr.value.push_back(sol.value);
        if (k == T) break;
        if (k == 0) tr.candidate_cost.insert(tr.candidate_cost.begin(), std::numeric_limits<double>::quiet_NaN());
        tr.ocp_iterations.push_back(sol.iterations);
        tr.ocp_converged.push_back(sol.converged);
        const VectorXd u = sol.u.front();
        tr.u.push_back(u);
        tr.stage_cost.push_back(cost.eval(C, xk, u));
        tr.performance += tr.stage_cost.back();
        VectorXd shifted(N * m);
        for (int j = 0; j + 1 < N; ++j) shifted.segment(j * m, m) = sol.u[static_cast<std::size_t>(j + 1)];
        shifted.segment((N - 1) * m, m) = cost.u_s;
        warm = shifted;
        tr.x.push_back(plant_step(plant, xk, u));
    }
    if (static_cast<int>(tr.candidate_cost.size()) > T) tr.candidate_cost.resize(static_cast<std::size_t>(T));
    return tr;
}

std::vector<double> lyapunov_residuals(const ClosedLoopTrace& trace, const StorageFunction& W,
                                       const StateMeasure& sigma, double alpha) {
    const std::size_t T = trace.u.size();
    std::vector<double> Wv(T + 1, 0.0);
    if (W.kind == StorageKind::QuadraticForm) {
        for (std::size_t k = 0; k <= T; ++k) Wv[k] = W.eval(trace.x[k]);
    } else if (W.kind == StorageKind::NarxWeights) {
        for (std::size_t k = 0; k <= T; ++k) {
            std::vector<double> past;
            for (int j = 1; j <= W.nu; ++j)
                past.push_back(k >= static_cast<std::size_t>(j) ? trace.stage_cost[k - static_cast<std::size_t>(j)] : 0.0);
            Wv[k] = W.eval_narx(past);
        }
    }
    std::vector<double> r;
    for (std::size_t k = 0; k < T; ++k) {
        const double s = W.kind == StorageKind::NarxWeights ? Wv[k] : sigma.eval(trace.x[k]);
        r.push_back(trace.value[k + 1] + Wv[k + 1] - trace.value[k] - Wv[k] + W.eps_o * alpha * s);
    }
    return r;
}

PerformanceCheck performance_ratio(const ClosedLoopTrace& trace, double W_x0, double v_inf, double alpha,
                                   double factor, double tol, double tail_tol) {
    PerformanceCheck pc;
    pc.tail = trace.stage_cost.empty() ? 0.0 : trace.stage_cost.back();
    pc.lhs = alpha * (trace.performance + W_x0);
    pc.rhs = factor * (v_inf + W_x0);
    pc.slack = pc.rhs + tol - pc.lhs;
    if (alpha <= 0.0) {
        pc.status = CheckStatus::Satisfied;
    } else if (pc.tail > tail_tol * (1.0 + trace.performance)) {
        pc.status = CheckStatus::Inconclusive;
    } else {
        pc.status = pc.slack >= 0.0 ? CheckStatus::Satisfied : CheckStatus::Violated;
    }
    return pc;
}

VInfinity v_infty_oracle(const Plant& plant, const QuadraticStageCost& cost, const VectorXd& x0, int H,
                         const OcpOptions& opt) {
    if (H < 2) throw std::invalid_argument("v_infty_oracle: H must be >= 2");
    const OcpSolution full = solve_ocp(plant, cost, TerminalCostSpec::none(), H, x0, std::nullopt, opt);
    const OcpSolution half = solve_ocp(plant, cost, TerminalCostSpec::none(), H / 2, x0, std::nullopt, opt);
    VInfinity v;
    v.value = full.value;
    v.increment = full.value - half.value;
    v.converged = full.converged && half.converged;
    return v;
}

LimitCycleReport detect_limit_cycle(const ClosedLoopTrace& trace, const VectorXd& x_s, const VectorXd& u_lo,
                                    const VectorXd& u_hi, double theta, double window_fraction, double bound,
                                    double sat_level) {
    LimitCycleReport rep;
    const std::size_t T = trace.x.size();
    if (T == 0) return rep;
    const std::size_t w = std::max<std::size_t>(1, static_cast<std::size_t>(window_fraction * static_cast<double>(T)));
    rep.tail_min_norm = std::numeric_limits<double>::infinity();
    for (std::size_t k = T - w; k < T; ++k) {
        const double nrm = (trace.x[k] - x_s).norm();
        rep.tail_min_norm = std::min(rep.tail_min_norm, nrm);
        rep.tail_max_norm = std::max(rep.tail_max_norm, nrm);
    }
    const std::size_t nu = trace.u.size();
    std::size_t sat = 0, cnt = 0;
    for (std::size_t k = nu > w ? nu - w : 0; k < nu; ++k) {
        const VectorXd& u = trace.u[k];
        bool at = false;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const double half = 0.5 * (u_hi(i) - u_lo(i));
            const double level = half > 0.0 ? std::abs(u(i) - 0.5 * (u_hi(i) + u_lo(i))) / half : 1.0;
            rep.max_input_level = std::max(rep.max_input_level, level);
            at = at || level >= sat_level;
        }
        sat += at ? 1 : 0;
        ++cnt;
    }
    rep.saturation_fraction = cnt ? static_cast<double>(sat) / static_cast<double>(cnt) : 0.0;
    rep.limit_cycle = rep.tail_min_norm > theta && rep.tail_max_norm < bound;
    return rep;
}

void write_trace_csv(const std::string& path, const ClosedLoopTrace& trace) {
    std::ostringstream os;
    const Eigen::Index n = trace.x.empty() ? 0 : trace.x.front().size();
    const Eigen::Index m = trace.u.empty() ? 0 : trace.u.front().size();
    os << 'k';
    for (Eigen::Index i = 1; i <= n; ++i) os << ",x_" << i;
    for (Eigen::Index i = 1; i <= m; ++i) os << ",u_" << i;
    os << ",stage_cost,V_N,lyap_residual\n";
    for (std::size_t k = 0; k < trace.u.size(); ++k) {
        os << k;
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(trace.x[k](i));
        for (Eigen::Index i = 0; i < m; ++i) os << ',' << format_double(trace.u[k](i));
        os << ',' << format_double(trace.stage_cost[k]) << ',' << format_double(trace.value[k]) << ','
           << format_double(k < trace.lyap_residual.size() ? trace.lyap_residual[k]
                                                           : std::numeric_limits<double>::quiet_NaN())
           << '\n';
    }
    write_file_atomic(path, os.str());
}

}  // namespace mpccert
