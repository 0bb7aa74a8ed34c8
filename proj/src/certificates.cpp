#include "mpccert/certificates.hpp"

#include <stdexcept>
#include <string>

namespace mpccert {

namespace {

DenseLp build_common(const CertificationConstants& c, int N, bool terminal) {
    if (N < 1) throw DomainError("LP horizon must be >= 1");
    const LpLayout L{N};
    const int n = L.n_vars(terminal);
    DenseLp lp(n);
    for (int k = 0; k < N; ++k) lp.names[L.ell(k)] = "ell_" + std::to_string(k);
    for (int k = 0; k <= N; ++k) {
        lp.names[L.W(k)] = "W_" + std::to_string(k);
        lp.names[L.sigma(k)] = "sigma_" + std::to_string(k);
    }
    lp.names[L.V()] = "V";
    if (terminal) lp.names[L.Vf()] = "Vf";

    for (int k = 1; k <= N - 1; ++k) lp.c(L.ell(k)) = 1.0;
    lp.c(L.V()) = -1.0;
    if (terminal) lp.c(L.Vf()) = 1.0;

    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    auto reset = [&] { row.setZero(); };

    for (int k = 0; k <= N; ++k) {
        reset();
        row(L.sigma(k)) = c.gamma_o_lower;
        row(L.W(k)) = -1.0;
        lp.add_le(row, 0.0, "Wlo_" + std::to_string(k));
        reset();
        row(L.W(k)) = 1.0;
        row(L.sigma(k)) = -c.gamma_o_upper;
        lp.add_le(row, 0.0, "Whi_" + std::to_string(k));
    }
    for (int k = 0; k < N; ++k) {
        reset();
        row(L.W(k + 1)) = 1.0;
        row(L.W(k)) = -1.0;
        row(L.sigma(k)) = c.eps_o;
        row(L.ell(k)) = -1.0;
        lp.add_le(row, 0.0, "diss_" + std::to_string(k));
    }
    reset();
    row(L.sigma(0)) = 1.0;
    lp.add_eq(row, 1.0, "norm");
    return lp;
}

}  // namespace

DenseLp build_lp6(const CertificationConstants& c, int N) {
    DenseLp lp = build_common(c, N, false);
    const LpLayout L{N};
    Eigen::RowVectorXd row(lp.n_vars());
    for (int k = 0; k < N; ++k) {
        row.setZero();
        for (int j = k; j < N; ++j) row(L.ell(j)) = 1.0;
        row(L.sigma(k)) = -c.g(N - k);
        lp.add_le(row, 0.0, "tail_" + std::to_string(k));
    }
    for (int k = 1; k <= N; ++k) {
        row.setZero();
        row(L.V()) = 1.0;
        for (int j = 1; j <= k - 1; ++j) row(L.ell(j)) = -1.0;
        row(L.sigma(k)) = -c.g(N - k + 1);
        lp.add_le(row, 0.0, "cand_" + std::to_string(k));
    }
    return lp;
}

DenseLp build_lp12(const CertificationConstants& c, const TerminalConstants& t, int N) {
    DenseLp lp = build_common(c, N, true);
    const LpLayout L{N};
    Eigen::RowVectorXd row(lp.n_vars());
    for (int k = 0; k < N; ++k) {
        row.setZero();
        for (int j = k; j < N; ++j) row(L.ell(j)) = 1.0;
        row(L.Vf()) = 1.0;
        row(L.sigma(k)) = -t.g(N - k);
        lp.add_le(row, 0.0, "tail_" + std::to_string(k));
    }
    for (int k = 1; k <= N; ++k) {
        row.setZero();
        row(L.V()) = 1.0;
        for (int j = 1; j <= k - 1; ++j) row(L.ell(j)) = -1.0;
        row(L.sigma(k)) = -t.g(N - k + 1);
        lp.add_le(row, 0.0, "cand_" + std::to_string(k));
    }
    // V_f = 0 cannot satisfy the relaxed CLF inequality, so its row is not implied.
    if (!t.eps_f_infinite() && t.c_f_upper > 0.0) {
        row.setZero();
        row(L.V()) = 1.0;
        for (int j = 1; j <= N - 1; ++j) row(L.ell(j)) = -1.0;
        row(L.Vf()) = -(1.0 + t.eps_f);
        lp.add_le(row, 0.0, "cand_f");
    }
    row.setZero();
    row(L.sigma(N)) = t.c_f_lower;
    row(L.Vf()) = -1.0;
    lp.add_le(row, 0.0, "Vf_lo");
    row.setZero();
    row(L.Vf()) = 1.0;
    row(L.sigma(N)) = -t.c_f_upper;
    lp.add_le(row, 0.0, "Vf_hi");
    return lp;
}

SuboptimalityResult alpha_from_lp(const LpSolution& sol, double eps_o, int N, Method m) {
    SuboptimalityResult r;
    r.horizon = N;
    r.method = m;
    if (sol.status == LpStatus::Unbounded) {
        r.alpha = kVacuous;
        r.stabilizing = false;
        return r;
    }
    if (sol.status != LpStatus::Optimal)
        throw std::runtime_error(std::string("worst-case LP not solved: ") + to_string(sol.status));
    if (!sol.verified) throw std::runtime_error("worst-case LP solution failed verification");
    r.alpha = std::min(1.0, 1.0 + sol.objective / eps_o);
    r.stabilizing = r.alpha > 0.0;
    return r;
}

SuboptimalityResult alpha_lp6(const CertificationConstants& c, int N) {
    return alpha_from_lp(solve_lp(build_lp6(c, N)), c.eps_o, N, Method::Lp6);
}

SuboptimalityResult alpha_lp12(const CertificationConstants& c, const TerminalConstants& t, int N) {
    return alpha_from_lp(solve_lp(build_lp12(c, t, N)), c.eps_o, N, Method::Lp12);
}

}  // namespace mpccert
