#pragma once
/// Reference computations used only by the tests. Each one follows a different
/// route from the library code it checks.

#include "mpccert/lp.hpp"
#include "mpccert/system.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Storage-family closed form evaluated directly in long double:
/// eps_o (1 - alpha) = (g_N + eta) r / (1 - r),
/// r = s g_1 prod_{k=2}^{N} (eta + g_k) / prod_{k=1}^{N} (1 + g_k).
inline double alpha_storage(const std::function<double(int)>& g, double eps_o, double s, int N) {
    const long double eta = 1.0L - eps_o;
    long double r = static_cast<long double>(s) * g(1);
    for (int k = 2; k <= N; ++k) r *= (eta + g(k));
    for (int k = 1; k <= N; ++k) r /= (1.0L + g(k));
    if (r >= 1.0L) return -std::numeric_limits<double>::infinity();
    return static_cast<double>(1.0L - (g(N) + eta) * r / (1.0L - r) / eps_o);
}

/// Stage-cost-family closed form: alpha = 1 - (g_N - 1) r / (1 - r),
/// r = s prod_{k=2}^{N} (g_k - 1) / g_k.
inline double alpha_stage(const std::function<double(int)>& g, double s, int N) {
    long double r = s;
    for (int k = 2; k <= N; ++k) r *= (g(k) - 1.0L) / g(k);
    if (r >= 1.0L) return -std::numeric_limits<double>::infinity();
    return static_cast<double>(1.0L - (g(N) - 1.0L) * r / (1.0L - r));
}

/// Brute-force LP: enumerates every basic solution of
/// min c'x s.t. A_ub x <= b_ub, A_eq x = b_eq, x >= lower (finite lower bounds).
/// Returns nullopt when no vertex is feasible. Intended for bounded problems
/// with at most a handful of variables.
inline std::optional<double> lp_vertex_enumeration(const mpccert::DenseLp& lp, double tol = 1e-9) {
    const int n = lp.n_vars();
    MatrixXd G(lp.n_ub() + n, n);
    VectorXd h(lp.n_ub() + n);
    G.topRows(lp.n_ub()) = lp.A_ub;
    h.head(lp.n_ub()) = lp.b_ub;
    for (int j = 0; j < n; ++j) {
        G.row(lp.n_ub() + j).setZero();
        G(lp.n_ub() + j, j) = -1.0;
        h(lp.n_ub() + j) = -lp.lower(j);
    }
    const int mi = static_cast<int>(G.rows());
    const int need = n - lp.n_eq();
    std::optional<double> best;
    if (need < 0) return best;
    std::vector<int> pick(static_cast<std::size_t>(need));
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == need) {
            MatrixXd M(n, n);
            VectorXd rhs(n);
            M.topRows(lp.n_eq()) = lp.A_eq;
            rhs.head(lp.n_eq()) = lp.b_eq;
            for (int i = 0; i < need; ++i) {
                M.row(lp.n_eq() + i) = G.row(pick[static_cast<std::size_t>(i)]);
                rhs(lp.n_eq() + i) = h(pick[static_cast<std::size_t>(i)]);
            }
            Eigen::FullPivLU<MatrixXd> lu(M);
            if (lu.rank() < n) return;
            const VectorXd x = lu.solve(rhs);
            if (((G * x - h).array() > tol * (1.0 + h.cwiseAbs().array())).any()) return;
            if (lp.n_eq() > 0 && ((lp.A_eq * x - lp.b_eq).cwiseAbs().array() > tol * (1.0 + lp.b_eq.cwiseAbs().array())).any())
                return;
            const double v = lp.c.dot(x);
            if (!best || v < *best) best = v;
            return;
        }
        for (int i = start; i < mi; ++i) {
            pick[static_cast<std::size_t>(depth)] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

/// Unconstrained N-step LQR feedback from the condensed batch problem: the
/// first m rows of -H^{-1} F, with H and F built from the prediction matrices.
inline MatrixXd batch_lqr_gain(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R,
                               const MatrixXd& P_f, int N) {
    const int n = static_cast<int>(A.rows()), m = static_cast<int>(B.cols());
    MatrixXd Sx = MatrixXd::Zero((N + 1) * n, n);
    MatrixXd Su = MatrixXd::Zero((N + 1) * n, N * m);
    MatrixXd Ak = MatrixXd::Identity(n, n);
    for (int k = 0; k <= N; ++k) {
        Sx.block(k * n, 0, n, n) = Ak;
        for (int j = 0; j < k; ++j) {
            MatrixXd Akj = MatrixXd::Identity(n, n);
            for (int i = 0; i < k - 1 - j; ++i) Akj = A * Akj;
            Su.block(k * n, j * m, n, m) = Akj * B;
        }
        Ak = A * Ak;
    }
    MatrixXd Qbar = MatrixXd::Zero((N + 1) * n, (N + 1) * n);
    for (int k = 0; k < N; ++k) Qbar.block(k * n, k * n, n, n) = Q;
    Qbar.block(N * n, N * n, n, n) = P_f;
    MatrixXd Rbar = MatrixXd::Zero(N * m, N * m);
    for (int k = 0; k < N; ++k) Rbar.block(k * m, k * m, m, m) = R;
    const MatrixXd H = Su.transpose() * Qbar * Su + Rbar;
    const MatrixXd F = Su.transpose() * Qbar * Sx;
    const MatrixXd U = -H.ldlt().solve(F);
    return -U.topRows(m);
}

/// Solution of X = A'XA + Q through the Kronecker form.
inline MatrixXd dlyap_kron(const MatrixXd& A, const MatrixXd& Q) {
    const int n = static_cast<int>(A.rows());
    MatrixXd K = MatrixXd::Identity(n * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) K.block(i * n, j * n, n, n) -= A(j, i) * A.transpose();
    const VectorXd q = Eigen::Map<const VectorXd>(Q.data(), n * n);
    const VectorXd x = K.fullPivLu().solve(q);
    MatrixXd X = Eigen::Map<const MatrixXd>(x.data(), n, n);
    return 0.5 * (X + X.transpose());
}

/// Box QP by enumeration of the 3^n active-set patterns (lower, free, upper).
inline VectorXd box_qp_enumeration(const MatrixXd& H, const VectorXd& g, const VectorXd& lo, const VectorXd& hi) {
    const int n = static_cast<int>(g.size());
    int total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    VectorXd best;
    double best_v = std::numeric_limits<double>::infinity();
    for (int code = 0; code < total; ++code) {
        VectorXd x = VectorXd::Zero(n);
        std::vector<int> free_idx;
        int c = code;
        for (int i = 0; i < n; ++i) {
            const int s = c % 3;
            c /= 3;
            if (s == 0) x(i) = lo(i);
            else if (s == 2) x(i) = hi(i);
            else free_idx.push_back(i);
        }
        if (!free_idx.empty()) {
            const int f = static_cast<int>(free_idx.size());
            MatrixXd Hf(f, f);
            VectorXd rhs(f);
            for (int a = 0; a < f; ++a) {
                rhs(a) = -g(free_idx[a]);
                for (int j = 0; j < n; ++j)
                    if (std::find(free_idx.begin(), free_idx.end(), j) == free_idx.end())
                        rhs(a) -= H(free_idx[a], j) * x(j);
                for (int b = 0; b < f; ++b) Hf(a, b) = H(free_idx[a], free_idx[b]);
            }
            const VectorXd xf = Hf.ldlt().solve(rhs);
            for (int a = 0; a < f; ++a) x(free_idx[a]) = xf(a);
        }
        if (((x - lo).array() < -1e-12).any() || ((x - hi).array() > 1e-12).any()) continue;
        const double v = 0.5 * x.dot(H * x) + g.dot(x);
        if (v < best_v) {
            best_v = v;
            best = x;
        }
    }
    return best;
}

/// Random stable (spectral radius <= rho_max) n x n matrix.
inline MatrixXd random_stable(int n, double rho_max, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
    const double rho = A.eigenvalues().cwiseAbs().maxCoeff();
    std::uniform_real_distribution<double> ud(0.3, rho_max);
    return A * (ud(rng) / rho);
}

/// Random dense LP with n <= 6 variables and at most 8 rows. The first
/// inequality has positive coefficients, so with finite lower bounds the
/// feasible set is bounded; it may still be empty.
inline mpccert::DenseLp random_lp(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> un(1, 6), um(1, 8), coin(0, 3);
    std::uniform_real_distribution<double> ua(-1.0, 1.0), up(0.1, 1.0), ub(0.5, 3.0);
    const int n = un(rng);
    const int rows = um(rng);
    const int eq = std::min(coin(rng) == 0 ? 1 : 0, rows - 1);
    mpccert::DenseLp lp(n);
    for (int j = 0; j < n; ++j) {
        lp.c(j) = ua(rng);
        lp.lower(j) = coin(rng) == 0 ? ua(rng) : 0.0;
    }
    Eigen::RowVectorXd row(n);
    for (int j = 0; j < n; ++j) row(j) = up(rng);
    lp.add_le(row, ub(rng) * n);
    for (int i = 1; i < rows - eq; ++i) {
        for (int j = 0; j < n; ++j) row(j) = ua(rng);
        lp.add_le(row, ua(rng));
    }
    for (int i = 0; i < eq; ++i) {
        for (int j = 0; j < n; ++j) row(j) = ua(rng);
        lp.add_eq(row, 0.3 * ua(rng));
    }
    return lp;
}

/// Nondecreasing sequence of length K in [lo, hi], drawn as sorted uniforms.
inline std::vector<double> random_monotone(int K, double lo, double hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> g(static_cast<std::size_t>(K));
    for (auto& v : g) v = u(rng);
    std::sort(g.begin(), g.end());
    return g;
}

}  // namespace oracle
