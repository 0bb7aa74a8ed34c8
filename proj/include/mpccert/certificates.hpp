#pragma once

#include "mpccert/analytic.hpp"
#include "mpccert/lp.hpp"

namespace mpccert {

/// Column layout shared by both worst-case programs.
struct LpLayout {
    int N = 1;
    [[nodiscard]] int ell(int k) const { return k; }                   // k = 0..N-1
    [[nodiscard]] int W(int k) const { return N + k; }                 // k = 0..N
    [[nodiscard]] int sigma(int k) const { return 2 * N + 1 + k; }     // k = 0..N
    [[nodiscard]] int V() const { return 3 * N + 2; }
    [[nodiscard]] int Vf() const { return 3 * N + 3; }
    [[nodiscard]] int n_vars(bool terminal) const { return terminal ? 3 * N + 4 : 3 * N + 3; }
};

[[nodiscard]] DenseLp build_lp6(const CertificationConstants& c, int N);

/// An infinite eps_f, or c_f_upper = 0 (V_f = 0), drops the row bounding the
/// successor value by the terminal cost, so that V_f = 0 reproduces build_lp6.
[[nodiscard]] DenseLp build_lp12(const CertificationConstants& c, const TerminalConstants& t, int N);

/// alpha = 1 + objective / eps_o. Unbounded maps to the vacuous sentinel;
/// other non-optimal statuses throw.
[[nodiscard]] SuboptimalityResult alpha_from_lp(const LpSolution& sol, double eps_o, int N, Method m);

[[nodiscard]] SuboptimalityResult alpha_lp6(const CertificationConstants& c, int N);
[[nodiscard]] SuboptimalityResult alpha_lp12(const CertificationConstants& c, const TerminalConstants& t, int N);

}  // namespace mpccert
