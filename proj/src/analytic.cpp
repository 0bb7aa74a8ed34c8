#include "mpccert/analytic.hpp"

#include <algorithm>
#include <cmath>

namespace mpccert {

namespace {

constexpr int kLogSpaceThreshold = 50;

// prod(num) / prod(den) for positive factors; log-space for long products.
double product_ratio(const std::vector<double>& num, const std::vector<double>& den) {
    if (num.size() > kLogSpaceThreshold || den.size() > kLogSpaceThreshold) {
        double s = 0.0;
        for (double a : num) {
            if (a <= 0.0) return 0.0;
            s += std::log(a);
        }
        for (double b : den) s -= std::log(b);
        return std::exp(s);
    }
    double p = 1.0;
    for (double a : num) p *= a;
    for (double b : den) p /= b;
    return p;
}

SuboptimalityResult make_result(double alpha, int N, Method m) {
    SuboptimalityResult r;
    r.alpha = std::min(alpha, 1.0);
    r.horizon = N;
    r.method = m;
    r.stabilizing = r.alpha > 0.0;
    return r;
}

void require_horizon(int N, const char* what) {
    if (N < 1) throw DomainError(std::string(what) + ": horizon must be >= 1");
}

// sigma = W family. Returns eps_o (1 - alpha) = (g_N + eta) r / (1 - r) with
//   r = scale * g_1 prod_{j=0}^{N-2}(eta + g_{N-j}) / prod_{j=0}^{N-1}(1 + g_{N-j}).
template <class G>
SuboptimalityResult storage_family(G g, double eta, double eps_o, double scale, int N, Method m) {
    std::vector<double> num, den;
    num.reserve(N);
    den.reserve(N);
    for (int j = 0; j <= N - 2; ++j) num.push_back(eta + g(N - j));
    for (int j = 0; j <= N - 1; ++j) den.push_back(1.0 + g(N - j));
    const double g1 = g(1);
    if (g1 == 0.0 || scale == 0.0) return make_result(1.0, N, m);
    const double r = scale * g1 * product_ratio(num, den);
    if (!(r < 1.0)) return make_result(kVacuous, N, m);
    const double lhs = (g(N) + eta) * r / (1.0 - r);
    return make_result(1.0 - lhs / eps_o, N, m);
}

// sigma = ell family. alpha = 1 - (g_N - 1) r / (1 - r) with
//   r = scale * prod_{j=2}^{N}(g_j - 1) / prod_{j=2}^{N} g_j.
template <class G>
SuboptimalityResult stage_family(G g, double scale, int N, Method m) {
    for (int j = 1; j <= N; ++j) {
        if (g(j) < 1.0 - 1e-12) throw DomainError("gamma_j < 1 impossible under sigma=ell_min");
    }
    const double gN1 = std::max(g(N) - 1.0, 0.0);
    if (gN1 == 0.0 || scale == 0.0) return make_result(1.0, N, m);
    std::vector<double> num, den;
    for (int j = 2; j <= N; ++j) {
        num.push_back(std::max(g(j) - 1.0, 0.0));
        den.push_back(g(j));
    }
    const double r = scale * product_ratio(num, den);
    if (!(r < 1.0)) return make_result(kVacuous, N, m);
    return make_result(1.0 - gN1 * r / (1.0 - r), N, m);
}

}  // namespace

const char* to_string(SigmaMode m) {
    switch (m) {
        case SigmaMode::StageCost: return "stage_cost";
        case SigmaMode::Storage: return "storage";
        case SigmaMode::General: return "general";
    }
    return "?";
}

const char* to_string(Method m) {
    switch (m) {
        case Method::Thm1: return "thm1";
        case Method::Thm3: return "thm3";
        case Method::Thm4: return "thm4";
        case Method::Thm5: return "thm5";
        case Method::Thm7: return "thm7";
        case Method::Thm8: return "thm8";
        case Method::Lp6: return "lp6";
        case Method::Lp12: return "lp12";
    }
    return "?";
}

const char* to_string(BoundFormula f) {
    switch (f) {
        case BoundFormula::Thm1: return "thm1";
        case BoundFormula::Eq8: return "eq8";
        case BoundFormula::Thm5: return "thm5";
        case BoundFormula::Eq15: return "eq15";
        case BoundFormula::Eq17: return "eq17";
    }
    return "?";
}

double CertificationConstants::g(int k) const {
    if (k < 1) throw DomainError("gamma index must be >= 1");
    if (static_cast<std::size_t>(k) <= gamma.size()) return gamma[k - 1];
    return gamma_bar;
}

CertificationConstants CertificationConstants::stage_cost(std::vector<double> gamma) {
    CertificationConstants c;
    c.gamma_bar = gamma.empty() ? 0.0 : *std::max_element(gamma.begin(), gamma.end());
    c.gamma = std::move(gamma);
    c.eps_o = 1.0;
    c.gamma_o_lower = c.gamma_o_upper = 0.0;
    c.sigma_mode = SigmaMode::StageCost;
    return c;
}

CertificationConstants CertificationConstants::storage(std::vector<double> gamma, double eps_o) {
    CertificationConstants c;
    c.gamma_bar = gamma.empty() ? 0.0 : *std::max_element(gamma.begin(), gamma.end());
    c.gamma = std::move(gamma);
    c.eps_o = eps_o;
    c.gamma_o_lower = c.gamma_o_upper = 1.0;
    c.sigma_mode = SigmaMode::Storage;
    return c;
}

CertificationConstants CertificationConstants::constant(double gamma_bar, int K, SigmaMode mode, double eps_o) {
    std::vector<double> g(static_cast<std::size_t>(std::max(K, 0)), gamma_bar);
    CertificationConstants c = mode == SigmaMode::StageCost ? stage_cost(std::move(g)) : storage(std::move(g), eps_o);
    c.gamma_bar = gamma_bar;
    if (mode == SigmaMode::General) c.sigma_mode = SigmaMode::General;
    return c;
}

void CertificationConstants::validate() const {
    if (!(eps_o > 0.0) || eps_o > 1.0) throw DomainError("eps_o must lie in (0,1]");
    if (gamma_o_lower < 0.0 || gamma_o_lower > gamma_o_upper) throw DomainError("need 0 <= gamma_o_lower <= gamma_o_upper");
    for (double v : gamma) {
        if (!(v >= 0.0) || v > gamma_bar * (1.0 + 1e-12) + 1e-300) throw DomainError("need 0 <= gamma_k <= gamma_bar");
    }
    if (sigma_mode == SigmaMode::StageCost && (gamma_o_lower != 0.0 || gamma_o_upper != 0.0 || eps_o != 1.0))
        throw DomainError("stage_cost mode requires gamma_o = 0 and eps_o = 1");
    if (sigma_mode == SigmaMode::Storage && (gamma_o_lower != 1.0 || gamma_o_upper != 1.0))
        throw DomainError("storage mode requires gamma_o = 1");
}

bool TerminalConstants::eps_f_infinite() const { return std::isinf(eps_f); }

double TerminalConstants::g(int k) const {
    if (k < 1) throw DomainError("gamma_f index must be >= 1");
    if (static_cast<std::size_t>(k) <= gamma_f.size()) return gamma_f[k - 1];
    return gamma_f_bar;
}

TerminalConstants TerminalConstants::constant(double gamma_f_bar, int K, double eps_f) {
    TerminalConstants t;
    t.gamma_f.assign(static_cast<std::size_t>(std::max(K, 0)), gamma_f_bar);
    t.gamma_f_bar = gamma_f_bar;
    t.eps_f = eps_f;
    if (t.eps_f_infinite()) {
        t.c_f_lower = t.c_f_upper = 0.0;
    } else {
        t.c_f_lower = t.c_f_upper = gamma_f_bar / (1.0 + eps_f);
    }
    return t;
}

void TerminalConstants::validate() const {
    if (c_f_lower < 0.0 || c_f_upper < c_f_lower) throw DomainError("need 0 <= c_f_lower <= c_f_upper");
    if (!(eps_f >= 0.0)) throw DomainError("eps_f must be >= 0");
    for (double v : gamma_f) {
        if (!(v >= 0.0) || v > gamma_f_bar * (1.0 + 1e-12) + 1e-300) throw DomainError("need 0 <= gamma_kf <= gamma_f_bar");
    }
    if (!eps_f_infinite() && !gamma_f.empty() && c_f_upper > 0.0) {
        const double mid = gamma_f.front() / (1.0 + eps_f);
        const double tol = 1e-12 * std::max(1.0, mid);
        if (c_f_lower > mid + tol || mid > c_f_upper + tol)
            throw DomainError("need c_f_lower <= gamma_1f/(1+eps_f) <= c_f_upper");
    }
}

SuboptimalityResult alpha_thm1(const CertificationConstants& c, int N) {
    if (N <= 1) throw DomainError("Thm1 undefined for N<=1");
    const double gN = c.g(N);
    const double go = c.gamma_o_upper;
    const double alpha = 1.0 - gN * (gN + go) / (c.eps_o * c.eps_o * (N - 1));
    return make_result(alpha, N, Method::Thm1);
}

HorizonBound n_min_thm1(const CertificationConstants& c) {
    const double gb = c.gamma_bar;
    return {1.0 + (gb + c.gamma_o_upper) * gb / (c.eps_o * c.eps_o), BoundFormula::Thm1};
}

SuboptimalityResult alpha_hat_eq7(const CertificationConstants& c, int N) {
    require_horizon(N, "eq7");
    auto g = [&](int k) { return c.g(k); };
    return storage_family(g, c.eta(), c.eps_o, 1.0, N, Method::Thm3);
}

HorizonBound n_min_eq8(double gamma_bar, double eps_o) {
    if (!(eps_o > 0.0) || eps_o > 1.0) throw DomainError("eps_o must lie in (0,1]");
    if (gamma_bar <= 0.0) return {0.0, BoundFormula::Eq8};
    const double eta = 1.0 - eps_o;
    const double n = 1.0 + (std::log(gamma_bar) - std::log(eps_o)) /
                               (std::log1p(gamma_bar) - std::log(gamma_bar + eta));
    return {n, BoundFormula::Eq8};
}

SuboptimalityResult alpha_hat_eq9(const CertificationConstants& c, int N) {
    require_horizon(N, "eq9");
    auto g = [&](int k) { return c.g(k); };
    return stage_family(g, 1.0, N, Method::Thm4);
}

bool check_submultiplicativity(const std::vector<double>& c_seq) {
    const std::size_t n = c_seq.size();
    for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t k2 = 1; k + k2 < n; ++k2) {
            const double rhs = c_seq[k] * c_seq[k2];
            if (c_seq[k + k2] > rhs + 1e-12 * std::max(1.0, rhs)) return false;
        }
    }
    return true;
}

bool check_terminal_tightness(const std::vector<double>& c, const std::vector<double>& c_f, double eps_f, double tol) {
    const std::size_t n = c.size();
    const std::size_t nf = c_f.size();
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t k2 = 0; k + k2 < n; ++k2)
            if (c[k + k2] > c[k] * c[k2] + tol) return false;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t k2 = 0; k + k2 < nf; ++k2)
            if (c_f[k + k2] > c[k] * c_f[k2] + tol) return false;
    const double one_eps = std::isinf(eps_f) ? std::numeric_limits<double>::infinity() : 1.0 + eps_f;
    for (std::size_t k = 0; k + 1 < nf && k < n; ++k) {
        const double rhs = c_f[k] == 0.0 ? 0.0 : one_eps * c_f[k];
        if (c[k] + c_f[k + 1] > rhs + tol) return false;
    }
    return true;
}

SuboptimalityResult alpha_thm5(const CertificationConstants& c, const TerminalConstants& t, int N) {
    if (t.eps_f_infinite()) {
        auto r = alpha_thm1(c, N);
        r.method = Method::Thm5;
        return r;
    }
    require_horizon(N, "thm5");
    const double go = c.gamma_o_upper;
    const double ef = t.eps_f;
    const double den = c.eps_o * ((N - 1) * c.eps_o * (1.0 + ef) + t.gamma_f_bar);
    if (ef == 0.0) return make_result(1.0, N, Method::Thm5);
    if (den <= 0.0) return make_result(kVacuous, N, Method::Thm5);
    const double alpha = 1.0 - (t.g(N) + go) * ef * t.gamma_f_bar / den;
    return make_result(alpha, N, Method::Thm5);
}

HorizonBound n_min_thm5(const CertificationConstants& c, const TerminalConstants& t) {
    if (t.eps_f_infinite()) {
        auto b = n_min_thm1(c);
        b.formula = BoundFormula::Thm5;
        return b;
    }
    const double ef = t.eps_f;
    const double gf = t.gamma_f_bar;
    const double eo = c.eps_o;
    const double n = 1.0 + ef / (1.0 + ef) * gf * (gf + c.gamma_o_upper) / (eo * eo) - gf / (eo * (1.0 + ef));
    return {n, BoundFormula::Thm5};
}

double performance_factor_eq11(const CertificationConstants& c, const TerminalConstants& t, int N) {
    const double s = t.gamma_f_bar + c.gamma_o_upper;
    double base = s > 0.0 ? 1.0 - c.eps_o / s : 0.0;
    base = std::clamp(base, 0.0, 1.0);
    return 1.0 + (t.c_f_upper / c.eps_o) * std::pow(base, N);
}

SuboptimalityResult alpha_hat_eq13(const TerminalConstants& t, int N) {
    require_horizon(N, "eq13");
    auto g = [&](int k) { return t.g(k); };
    const double scale = t.eps_f_infinite() ? 1.0 : t.eps_f / (1.0 + t.eps_f);
    return stage_family(g, scale, N, Method::Thm7);
}

HorizonBound n_min_eq15(double gamma_f_bar, double eps_f) {
    if (gamma_f_bar <= 1.0) return {0.0, BoundFormula::Eq15};
    if (eps_f <= 0.0) return {0.0, BoundFormula::Eq15};
    const double tail = std::isinf(eps_f) ? 0.0 : std::log1p(1.0 / eps_f);
    const double n = 1.0 + (std::log(gamma_f_bar) - tail) / (std::log(gamma_f_bar) - std::log(gamma_f_bar - 1.0));
    return {n, BoundFormula::Eq15};
}

SuboptimalityResult alpha_hat_eq16(const CertificationConstants& c, const TerminalConstants& t, int N) {
    require_horizon(N, "eq16");
    auto g = [&](int k) { return t.g(k); };
    const double scale = t.eps_f_infinite() ? 1.0 : t.eps_f / (1.0 + t.eps_f);
    return storage_family(g, c.eta(), c.eps_o, scale, N, Method::Thm8);
}

HorizonBound n_min_eq17(double gamma_f_bar, double eps_o, double eps_f) {
    if (!(eps_o > 0.0) || eps_o > 1.0) throw DomainError("eps_o must lie in (0,1]");
    if (gamma_f_bar <= 0.0 || eps_f <= 0.0) return {0.0, BoundFormula::Eq17};
    const double eta = 1.0 - eps_o;
    const double tail = std::isinf(eps_f) ? 0.0 : std::log1p(1.0 / eps_f);
    const double n = 1.0 + (std::log(gamma_f_bar) - std::log(eps_o) - tail) /
                               (std::log1p(gamma_f_bar) - std::log(gamma_f_bar + eta));
    return {n, BoundFormula::Eq17};
}

TerminalConstants terminal_constants_scaled(double omega, double gamma_1f) {
    if (!(omega > 0.0)) throw DomainError("omega must be > 0");
    if (gamma_1f < 0.0) throw DomainError("gamma_1f must be >= 0");
    TerminalConstants t;
    t.c_f_lower = t.c_f_upper = omega;
    t.eps_f = gamma_1f / omega - 1.0;
    t.gamma_f = {gamma_1f};
    t.gamma_f_bar = gamma_1f;
    return t;
}

TerminalConstants terminal_constants_finite_tail(double C_ell, double rho, int M) {
    if (C_ell < 1.0) throw DomainError("C_ell must be >= 1");
    if (rho < 0.0 || rho >= 1.0) throw DomainError("rho must lie in [0,1)");
    if (M < 1) throw DomainError("M must be >= 1");
    TerminalConstants t;
    const double rM = std::pow(rho, M);
    t.c_f_upper = (1.0 - rM) / (1.0 - rho) * C_ell;
    t.c_f_lower = 1.0;
    t.eps_f = rho == 0.0 ? 0.0 : C_ell * (1.0 - rho) / (std::pow(rho, -M) - 1.0);
    return t;
}

std::pair<double, double> lemma1_residuals(double eta, const std::vector<double>& delta, int k, int N) {
    if (N < 2 || k < 1 || k > N - 1 || static_cast<int>(delta.size()) < N)
        throw DomainError("lemma1: need 1 <= k <= N-1 and N deltas");
    auto d = [&](int l) { return delta[static_cast<std::size_t>(l - 1)]; };
    // running product prod_{l=0}^{j-2} (eta + d_{N-l}) / (1 + d_{N-l-1})
    double lhs_a = 0.0, lhs_b = 0.0;
    double prod = 1.0;
    for (int j = 1; j <= k - 1; ++j) {
        if (j >= 2) prod *= (eta + d(N - (j - 2))) / (1.0 + d(N - (j - 2) - 1));
        const double term = (d(N - j + 1) - eta * d(N - j)) / (1.0 + d(N - j)) * prod;
        lhs_a += term;
        lhs_b += std::pow(eta, k - 1 - j) * term;
    }
    double full = 1.0;
    for (int l = 0; l <= k - 2; ++l) full *= (eta + d(N - l)) / (1.0 + d(N - l - 1));
    const double rhs_a = d(N) - d(N - k + 1) * full;
    const double rhs_b = full - std::pow(eta, k - 1);
    return {std::abs(lhs_a - rhs_a), std::abs(lhs_b - rhs_b)};
}

std::vector<double> lemma2_coefficients(double eta, const std::vector<double>& delta, int N) {
    if (N < 1 || static_cast<int>(delta.size()) < N) throw DomainError("lemma2: need N deltas");
    auto d = [&](int l) { return delta[static_cast<std::size_t>(l - 1)]; };
    std::vector<double> a;
    a.reserve(static_cast<std::size_t>(N > 1 ? N - 1 : 0));
    double prod = 1.0;
    for (int k = 1; k <= N - 1; ++k) {
        if (k >= 2) {
            const double den = d(N - (k - 2) - 1) + 1.0;
            if (den == 0.0) throw DomainError("lemma2: delta_l + 1 = 0");
            prod *= (eta + d(N - (k - 2))) / den;
        }
        const double den = d(N - k) + 1.0;
        if (den == 0.0) throw DomainError("lemma2: delta_l + 1 = 0");
        a.push_back((d(N - k + 1) - eta * d(N - k)) / den * prod);
    }
    return a;
}

}  // namespace mpccert
