#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mpccert {

enum class SigmaMode { StageCost, Storage, General };

enum class Method { Thm1, Thm3, Thm4, Thm5, Thm7, Thm8, Lp6, Lp12 };

enum class BoundFormula { Thm1, Eq8, Thm5, Eq15, Eq17 };

const char* to_string(SigmaMode m);
const char* to_string(Method m);
const char* to_string(BoundFormula f);

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Scalar data of cost controllability and cost detectability.
/// gamma[k-1] holds gamma_k.
struct CertificationConstants {
    std::vector<double> gamma;
    double gamma_bar = 0.0;
    double eps_o = 1.0;
    double gamma_o_lower = 0.0;
    double gamma_o_upper = 0.0;
    SigmaMode sigma_mode = SigmaMode::StageCost;

    [[nodiscard]] double eta() const { return 1.0 - eps_o; }
    /// gamma_k for k >= 1; indices beyond the stored sequence fall back to gamma_bar.
    [[nodiscard]] double g(int k) const;

    /// sigma = ell_min, W = 0, eps_o = 1.
    static CertificationConstants stage_cost(std::vector<double> gamma);
    /// sigma = W, lower = upper = 1.
    static CertificationConstants storage(std::vector<double> gamma, double eps_o);
    /// gamma_k identically equal to gamma_bar for k = 1..K.
    static CertificationConstants constant(double gamma_bar, int K, SigmaMode mode, double eps_o = 1.0);

    /// Throws DomainError when an invariant is violated.
    void validate() const;
};

/// Terminal-cost data. eps_f = +inf marks a terminal cost without the CLF property;
/// c_f_upper = 0 marks V_f = 0, for which the CLF inequality is not used either.
struct TerminalConstants {
    double c_f_lower = 0.0;
    double c_f_upper = 0.0;
    double eps_f = std::numeric_limits<double>::infinity();
    std::vector<double> gamma_f;
    double gamma_f_bar = 0.0;

    [[nodiscard]] bool eps_f_infinite() const;
    [[nodiscard]] double g(int k) const;

    static TerminalConstants constant(double gamma_f_bar, int K, double eps_f);
    void validate() const;
};

struct SuboptimalityResult {
    double alpha = 0.0;
    int horizon = 1;
    Method method = Method::Thm1;
    bool stabilizing = false;
};

struct HorizonBound {
    double n_min = 0.0;
    BoundFormula formula = BoundFormula::Thm1;
};

inline constexpr double kVacuous = -std::numeric_limits<double>::infinity();

[[nodiscard]] SuboptimalityResult alpha_thm1(const CertificationConstants& c, int N);
[[nodiscard]] HorizonBound n_min_thm1(const CertificationConstants& c);

[[nodiscard]] SuboptimalityResult alpha_hat_eq7(const CertificationConstants& c, int N);
[[nodiscard]] HorizonBound n_min_eq8(double gamma_bar, double eps_o);

[[nodiscard]] SuboptimalityResult alpha_hat_eq9(const CertificationConstants& c, int N);

[[nodiscard]] bool check_submultiplicativity(const std::vector<double>& c_seq);
/// Conditions under which the terminal sigma = ell formula is tight, for the
/// decomposition gamma_{k,f} = sum_{j<k} c_j + c_{k,f}.
[[nodiscard]] bool check_terminal_tightness(const std::vector<double>& c, const std::vector<double>& c_f,
                                            double eps_f, double tol = 1e-12);

[[nodiscard]] SuboptimalityResult alpha_thm5(const CertificationConstants& c, const TerminalConstants& t, int N);
[[nodiscard]] HorizonBound n_min_thm5(const CertificationConstants& c, const TerminalConstants& t);
[[nodiscard]] double performance_factor_eq11(const CertificationConstants& c, const TerminalConstants& t, int N);

[[nodiscard]] SuboptimalityResult alpha_hat_eq13(const TerminalConstants& t, int N);
[[nodiscard]] HorizonBound n_min_eq15(double gamma_f_bar, double eps_f);

[[nodiscard]] SuboptimalityResult alpha_hat_eq16(const CertificationConstants& c, const TerminalConstants& t, int N);
[[nodiscard]] HorizonBound n_min_eq17(double gamma_f_bar, double eps_o, double eps_f);

[[nodiscard]] TerminalConstants terminal_constants_scaled(double omega, double gamma_1f);
[[nodiscard]] TerminalConstants terminal_constants_finite_tail(double C_ell, double rho, int M);

/// Residuals |lhs - rhs| of the two summation identities used in the
/// analytic solution. delta[l-1] holds delta_l, l = 1..N.
[[nodiscard]] std::pair<double, double> lemma1_residuals(double eta, const std::vector<double>& delta, int k, int N);
/// Worst-case stage-cost coefficients a_1..a_{N-1}.
[[nodiscard]] std::vector<double> lemma2_coefficients(double eta, const std::vector<double>& delta, int N);

}  // namespace mpccert
