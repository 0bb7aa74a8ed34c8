#include "oracles.hpp"

#include "mpccert/analytic.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace mpccert;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CertificationConstants storage_const(double g, double eps_o, int K = 64) {
    return CertificationConstants::constant(g, K, SigmaMode::Storage, eps_o);
}

CertificationConstants stage_const(double g, int K = 64) {
    return CertificationConstants::constant(g, K, SigmaMode::StageCost);
}

}  // namespace

TEST_CASE("thm1 worked values") {
    const auto c = stage_const(2.0);
    CHECK(alpha_thm1(c, 2).alpha == doctest::Approx(1.0 - 4.0));
    const auto w = storage_const(2.0, 0.5);
    // gamma_o = 1: 1 - 2 * 3 / (0.25 * 1)
    CHECK(alpha_thm1(w, 2).alpha == doctest::Approx(-23.0));
    CHECK(n_min_thm1(w).n_min == doctest::Approx(25.0));
    CHECK(n_min_thm1(stage_const(0.0)).n_min == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)alpha_thm1(c, 1), DomainError);
}

TEST_CASE("eq7 and eq8 worked values") {
    const auto c = storage_const(2.0, 0.5);
    CHECK(alpha_hat_eq7(c, 3).alpha == doctest::Approx(-3.3103).epsilon(1e-4));
    CHECK(n_min_eq8(2.0, 0.5).n_min == doctest::Approx(8.604).epsilon(1e-3));
    CHECK(n_min_eq8(0.0, 0.5).n_min == 0.0);
    CHECK_THROWS_AS((void)n_min_eq8(1.0, 0.0), DomainError);
}

TEST_CASE("eq9 worked values") {
    CHECK(alpha_hat_eq9(stage_const(2.0), 3).alpha == doctest::Approx(2.0 / 3.0));
    // gamma <= 1 means the cost already decays in one step
    CHECK(alpha_hat_eq9(stage_const(1.0), 1).alpha == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)alpha_hat_eq9(stage_const(0.5), 2), DomainError);
}

TEST_CASE("terminal worked values") {
    const auto t = TerminalConstants::constant(2.0, 64, 1.0);
    CHECK(alpha_hat_eq13(t, 2).alpha == doctest::Approx(2.0 / 3.0));
    CHECK(n_min_eq15(2.0, 1.0).n_min == doctest::Approx(1.0));

    const auto c = storage_const(2.0, 0.5);
    const double a16 = alpha_hat_eq16(c, t, 2).alpha;
    CHECK(c.eps_o * (1.0 - a16) == doctest::Approx(12.5 / 13.0));
    // 1 + ln 2 / ln 1.2: alpha changes sign between N = 4 and N = 5
    CHECK(n_min_eq17(2.0, 0.5, 1.0).n_min == doctest::Approx(1.0 + std::log(2.0) / std::log(1.2)));
    CHECK(alpha_hat_eq16(c, t, 4).alpha < 0.0);
    CHECK(alpha_hat_eq16(c, t, 5).alpha > 0.0);

    auto t1 = TerminalConstants::constant(2.0, 64, 1.0);
    t1.c_f_upper = 1.0;
    CHECK(performance_factor_eq11(c, t1, 1) == doctest::Approx(8.0 / 3.0));
    t1.c_f_upper = 0.0;
    CHECK(performance_factor_eq11(c, t1, 1) == doctest::Approx(1.0));
    CHECK(alpha_thm5(c, t, 3).alpha == doctest::Approx(-2.0));
}

TEST_CASE("performance factor decreases to one") {
    const auto c = storage_const(2.0, 0.5);
    const auto t = TerminalConstants::constant(2.0, 8, 1.0);
    double prev = performance_factor_eq11(c, t, 0);
    for (int N = 1; N <= 200; ++N) {
        const double f = performance_factor_eq11(c, t, N);
        CHECK(f <= prev);
        CHECK(f >= 1.0);
        prev = f;
    }
    CHECK(prev == doctest::Approx(1.0));
}

TEST_CASE("terminal constructions") {
    const auto s = terminal_constants_scaled(2.0, 3.0);
    CHECK(s.eps_f == doctest::Approx(0.5));
    CHECK(s.c_f_lower == doctest::Approx(2.0));
    CHECK(terminal_constants_scaled(3.0, 3.0).eps_f == doctest::Approx(0.0));
    CHECK_THROWS_AS((void)terminal_constants_scaled(0.0, 1.0), DomainError);

    const auto f = terminal_constants_finite_tail(2.0, 0.5, 2);
    CHECK(f.c_f_upper == doctest::Approx(3.0));
    CHECK(f.c_f_lower == doctest::Approx(1.0));
    CHECK(f.eps_f == doctest::Approx(1.0 / 3.0));
    CHECK(terminal_constants_finite_tail(2.0, 0.3, 1).eps_f == doctest::Approx(0.6));
    CHECK(terminal_constants_finite_tail(2.0, 0.5, 200).eps_f < 1e-50);
    CHECK_THROWS_AS((void)terminal_constants_finite_tail(2.0, 1.0, 2), DomainError);
    CHECK_THROWS_AS((void)terminal_constants_finite_tail(0.5, 0.5, 2), DomainError);
    CHECK_THROWS_AS((void)terminal_constants_finite_tail(2.0, 0.5, 0), DomainError);
}

TEST_CASE("closed forms match the long double oracle on random sequences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ug(1.01, 20.0), ue(0.05, 0.95), uf(0.05, 10.0);
    std::uniform_int_distribution<int> un(1, 30);
    for (int it = 0; it < 300; ++it) {
        const int N = un(rng);
        std::vector<double> g(40);
        for (auto& v : g) v = ug(rng);
        const double eps_o = ue(rng), eps_f = uf(rng);
        auto gk = [&](int k) { return g[static_cast<std::size_t>(k - 1)]; };
        auto cw = CertificationConstants::storage(g, eps_o);
        auto cl = CertificationConstants::stage_cost(g);
        TerminalConstants t;
        t.gamma_f = g;
        t.gamma_f_bar = cw.gamma_bar;
        t.eps_f = eps_f;
        const double s = eps_f / (1.0 + eps_f);
        auto close = [](double a, double b) {
            if (std::isinf(b)) return std::isinf(a) || a < -1e12;
            return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
        };
        CHECK(close(alpha_hat_eq7(cw, N).alpha, oracle::alpha_storage(gk, eps_o, 1.0, N)));
        CHECK(close(alpha_hat_eq16(cw, t, N).alpha, oracle::alpha_storage(gk, eps_o, s, N)));
        CHECK(close(alpha_hat_eq9(cl, N).alpha, oracle::alpha_stage(gk, 1.0, N)));
        CHECK(close(alpha_hat_eq13(t, N).alpha, oracle::alpha_stage(gk, s, N)));
    }
}

TEST_CASE("huge eps_f reduces the terminal formulas to the plain ones") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ug(1.01, 20.0), ue(0.05, 0.95);
    for (int it = 0; it < 100; ++it) {
        const double g = ug(rng), eps_o = ue(rng);
        const auto cw = storage_const(g, eps_o);
        const auto cl = stage_const(g);
        const auto t = TerminalConstants::constant(g, 64, 1e9);
        for (int N = 2; N <= 30; N += 7) {
            const double a7 = alpha_hat_eq7(cw, N).alpha, a16 = alpha_hat_eq16(cw, t, N).alpha;
            if (std::isfinite(a7)) {
                CHECK(std::abs(a16 - a7) <= 1e-6 * std::max(1.0, std::abs(a7)));
            } else {
                CHECK(!std::isfinite(a16));
            }
            {
                const double a9 = alpha_hat_eq9(cl, N).alpha;
                CHECK(std::abs(alpha_hat_eq13(t, N).alpha - a9) <= 1e-6 * std::max(1.0, std::abs(a9)));
            }
            const auto tinf = TerminalConstants::constant(g, 64, kInf);
            CHECK(alpha_thm5(cw, tinf, N).alpha == doctest::Approx(alpha_thm1(cw, N).alpha));
        }
    }
}

TEST_CASE("sign of alpha flips at the horizon bound") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ug(0.1, 50.0), ue(0.01, 0.99), uf(0.05, 10.0);
    for (int it = 0; it < 100; ++it) {
        const double g = ug(rng), eps_o = ue(rng), eps_f = uf(rng);
        const auto cw = storage_const(g, eps_o, 200);
        const double n8 = n_min_eq8(g, eps_o).n_min;
        const auto t = TerminalConstants::constant(g, 200, eps_f);
        const double n17 = n_min_eq17(g, eps_o, eps_f).n_min;
        for (int N = 1; N <= 200; ++N) {
            if (std::abs(N - n8) > 1e-9) CHECK((alpha_hat_eq7(cw, N).alpha > 0.0) == (N > n8));
            if (std::abs(N - n17) > 1e-9) CHECK((alpha_hat_eq16(cw, t, N).alpha > 0.0) == (N > n17));
        }
        const double gl = 1.0 + g;
        const auto cl = stage_const(gl, 200);
        const auto tl = TerminalConstants::constant(gl, 200, eps_f);
        const double n15 = n_min_eq15(gl, kInf).n_min;
        const double n15f = n_min_eq15(gl, eps_f).n_min;
        for (int N = 1; N <= 200; ++N) {
            if (std::abs(N - n15) > 1e-9) CHECK((alpha_hat_eq9(cl, N).alpha > 0.0) == (N > n15));
            if (std::abs(N - n15f) > 1e-9) CHECK((alpha_hat_eq13(tl, N).alpha > 0.0) == (N > n15f));
        }
    }
}

TEST_CASE("alpha is nonincreasing in eps_f and never exceeds one") {
    const auto cw = storage_const(3.0, 0.4);
    for (int N = 1; N <= 20; ++N) {
        double prev13 = kInf, prev16 = kInf;
        for (double ef = 0.0; ef <= 20.0; ef += 0.25) {
            const auto t = TerminalConstants::constant(3.0, 64, ef);
            const double a13 = alpha_hat_eq13(t, N).alpha, a16 = alpha_hat_eq16(cw, t, N).alpha;
            CHECK(a13 <= prev13 + 1e-12);
            CHECK(a16 <= prev16 + 1e-12);
            CHECK(a13 <= 1.0);
            CHECK(a16 <= 1.0);
            CHECK(alpha_thm5(cw, t, N).alpha <= 1.0);
            prev13 = a13;
            prev16 = a16;
        }
    }
}

TEST_CASE("summation identities") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ue(0.0, 1.0), ud(0.0, 10.0);
    std::uniform_int_distribution<int> un(2, 12);
    for (int it = 0; it < 1000; ++it) {
        const int N = un(rng);
        const double eta = ue(rng);
        std::vector<double> d(static_cast<std::size_t>(N));
        for (auto& v : d) v = ud(rng);
        for (int k = 1; k <= N - 1; ++k) {
            const auto [ra, rb] = lemma1_residuals(eta, d, k, N);
            CHECK(ra <= 1e-10);
            CHECK(rb <= 1e-10);
        }
    }
    const std::vector<double> d = {1.0, 2.0, 3.0};
    const auto [a, b] = lemma1_residuals(0.3, d, 1, 3);
    CHECK(a == 0.0);
    CHECK(b == 0.0);
    CHECK_THROWS_AS((void)lemma1_residuals(0.3, d, 3, 3), DomainError);
}

TEST_CASE("worst-case coefficients solve the defining equations") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ue(0.0, 1.0), ud(0.0, 10.0), ul(0.0, 5.0);
    std::uniform_int_distribution<int> un(1, 12);
    for (int it = 0; it < 1000; ++it) {
        const int N = un(rng);
        const double eta = ue(rng), l0 = ul(rng);
        std::vector<double> d(static_cast<std::size_t>(N));
        for (auto& v : d) v = ud(rng);
        const auto a = lemma2_coefficients(eta, d, N);
        REQUIRE(static_cast<int>(a.size()) == N - 1);
        auto D = [&](int l) { return static_cast<long double>(d[static_cast<std::size_t>(l - 1)]); };
        for (int k = 2; k <= N; ++k) {
            const long double lhs = (D(N) - D(N - k + 1) * std::pow(static_cast<long double>(eta), k - 1)) * (l0 + eta);
            long double rhs = 0.0L, scale = std::abs(lhs);
            for (int j = 1; j <= k - 1; ++j) {
                const long double term = (1.0L + D(N - k + 1) * std::pow(static_cast<long double>(eta), k - 1 - j)) *
                                         a[static_cast<std::size_t>(j - 1)] * (l0 + eta);
                rhs += term;
                scale = std::max(scale, std::abs(term));
            }
            CHECK(static_cast<double>(std::abs(lhs - rhs) / std::max(1.0L, scale)) <= 1e-10);
        }
    }
    CHECK(lemma2_coefficients(0.5, {2.0}, 1).empty());
    CHECK_THROWS_AS((void)lemma2_coefficients(0.5, {-1.0, 2.0}, 2), DomainError);
}

TEST_CASE("coefficient sum matches the storage closed form for constant gamma") {
    for (double g : {0.5, 2.0, 7.0}) {
        for (double eps_o : {0.1, 0.5, 0.9}) {
            const double eta = 1.0 - eps_o;
            for (int N = 2; N <= 10; ++N) {
                const auto a = lemma2_coefficients(eta, std::vector<double>(static_cast<std::size_t>(N), g), N);
                double sum = 0.0;
                for (double v : a) sum += v;
                // constant delta: a_k = (1 - eta) g / (1 + g) * ((eta + g)/(1 + g))^{k-1}
                const double q = (eta + g) / (1.0 + g);
                const double direct = (1.0 - eta) * g / (1.0 + g) * (1.0 - std::pow(q, N - 1)) / (1.0 - q);
                CHECK(sum == doctest::Approx(direct).epsilon(1e-12));
                CHECK(sum == doctest::Approx(g - g * std::pow(q, N - 1)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("submultiplicativity and tightness checks") {
    CHECK(check_submultiplicativity({1.0, 2.0, 4.0, 8.0}));
    CHECK_FALSE(check_submultiplicativity({1.0, 2.0, 5.0}));
    // c_k = rho^k, c_kf = a rho^k: the last condition reads 1 + a rho <= (1 + eps_f) a
    std::vector<double> c, cf2, cf1;
    for (int k = 0; k < 8; ++k) {
        c.push_back(std::pow(0.5, k));
        cf2.push_back(2.0 * std::pow(0.5, k));
        cf1.push_back(std::pow(0.5, k));
    }
    CHECK(check_terminal_tightness(c, cf2, 0.0));
    CHECK_FALSE(check_terminal_tightness(c, cf1, 0.0));
    CHECK(check_terminal_tightness(c, cf1, 0.5));
    CHECK_FALSE(check_terminal_tightness({2.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, 1.0));
}

TEST_CASE("constants validation") {
    auto c = storage_const(2.0, 0.5);
    CHECK_NOTHROW(c.validate());
    c.eps_o = 0.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    auto l = stage_const(2.0);
    l.eps_o = 0.5;
    CHECK_THROWS_AS(l.validate(), DomainError);
    auto t = TerminalConstants::constant(2.0, 4, 1.0);
    CHECK_NOTHROW(t.validate());
    t.c_f_upper = 0.1;
    CHECK_THROWS_AS(t.validate(), DomainError);
    CHECK_THROWS_AS((void)c.g(0), DomainError);
}
