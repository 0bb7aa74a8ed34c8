#include "oracles.hpp"

#include "mpccert/linalg.hpp"
#include "mpccert/models.hpp"
#include "mpccert/sim.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mpccert;

namespace {

LinearSystem scalar_plant(double a, double b, double umax) {
    LinearSystem s;
    s.A = MatrixXd::Constant(1, 1, a);
    s.B = MatrixXd::Constant(1, 1, b);
    s.C = MatrixXd::Identity(1, 1);
    s.u_lo = VectorXd::Constant(1, -umax);
    s.u_hi = VectorXd::Constant(1, umax);
    return s;
}

}  // namespace

TEST_CASE("box QP matches active-set enumeration") {
    std::mt19937_64 rng(51);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ub(0.1, 2.0);
    for (int it = 0; it < 200; ++it) {
        const int n = 1 + it % 5;
        MatrixXd M(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M(i, j) = nd(rng);
        const MatrixXd H = M * M.transpose() + 0.1 * MatrixXd::Identity(n, n);
        VectorXd g(n), lo(n), hi(n);
        for (int i = 0; i < n; ++i) {
            g(i) = 3.0 * nd(rng);
            lo(i) = -ub(rng);
            hi(i) = ub(rng);
        }
        const auto r = solve_box_qp(H, g, lo, hi, VectorXd::Zero(n));
        const VectorXd ref = oracle::box_qp_enumeration(H, g, lo, hi);
        CHECK(r.converged);
        auto f = [&](const VectorXd& x) { return 0.5 * x.dot(H * x) + g.dot(x); };
        CHECK(f(r.x) <= f(ref) + 1e-10 * (1.0 + std::abs(f(ref))));
        CHECK((r.x - ref).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("finite-horizon LQR matches the condensed batch solution") {
    std::mt19937_64 rng(53);
    std::normal_distribution<double> nd;
    for (int it = 0; it < 20; ++it) {
        const int n = 2 + it % 3;
        LinearSystem s;
        s.A = oracle::random_stable(n, 1.3, rng);
        s.B = MatrixXd(n, 1);
        for (int i = 0; i < n; ++i) s.B(i, 0) = nd(rng);
        s.C = MatrixXd::Identity(1, n);
        s.u_lo = VectorXd::Constant(1, -1.0);
        s.u_hi = VectorXd::Constant(1, 1.0);
        const auto cost = QuadraticStageCost::output_cost(n, 1, 1, 0.05, 0.3);
        const MatrixXd Q = cost.state_weight(s.C);
        const MatrixXd Pf = (it % 2 ? 0.0 : 1.0) * MatrixXd::Identity(n, n);
        const int N = 1 + it % 6;
        const auto lqr = finite_horizon_lqr(s, cost, Pf, N);
        const MatrixXd K = oracle::batch_lqr_gain(s.A, s.B, Q, cost.R, Pf, N);
        CHECK((lqr.K - K).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + K.cwiseAbs().maxCoeff()));
        CHECK(lqr.spectral_radius == doctest::Approx(linalg::spectral_radius(s.A - s.B * K)).epsilon(1e-8));
    }
}

TEST_CASE("mass-spring-damper chain") {
    const LinearSystem sys = msd_chain_model();
    CHECK(sys.n() == 12);
    CHECK(linalg::spectral_radius(sys.A) == doctest::Approx(0.943).epsilon(0.005 / 0.943));
    const auto cost = QuadraticStageCost::output_cost(12, 1, 1, 1e-4, 1e-5);
    const MatrixXd Z = MatrixXd::Zero(12, 12);
    CHECK(finite_horizon_lqr(sys, cost, Z, 2).spectral_radius > 1.0);
    CHECK(finite_horizon_lqr(sys, cost, Z, 3).spectral_radius < 1.0);
    CHECK(finite_horizon_lqr(sys, cost, Z, 4).spectral_radius > 1.0);
    CHECK(finite_horizon_lqr(sys, cost, Z, 5).spectral_radius > 1.0);
}

TEST_CASE("discretization and Lyapunov solvers") {
    MatrixXd Ac(2, 2), Bc(2, 1);
    Ac << 0.0, 1.0, 0.0, 0.0;
    Bc << 0.0, 1.0;
    const auto [A, B] = exact_discretization(Ac, Bc, 0.5);
    CHECK(A(0, 1) == doctest::Approx(0.5));
    CHECK(B(0, 0) == doctest::Approx(0.125));
    CHECK(B(1, 0) == doctest::Approx(0.5));

    std::mt19937_64 rng(57);
    for (int it = 0; it < 10; ++it) {
        const MatrixXd S = oracle::random_stable(4, 0.97, rng);
        const MatrixXd Q = MatrixXd::Identity(4, 4);
        CHECK((linalg::dlyap(S, Q) - oracle::dlyap_kron(S, Q)).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("RK4 is fourth order on the four-tank field") {
    const NonlinearSystem sys = four_tank_model();
    const auto [xs, us] = FourTankParams::placeholder().setpoint();
    CHECK((sys.step(xs, us) - xs).norm() <= 1e-9 * xs.norm());
    VectorXd x = xs;
    x(0) += 3.0;
    x(1) -= 2.0;
    VectorXd ref = x;
    for (int i = 0; i < 1024; ++i) ref = sys.rk4(ref, us, 3.0 / 1024.0);
    auto run = [&](int steps) {
        VectorXd z = x;
        for (int i = 0; i < steps; ++i) z = sys.rk4(z, us, 3.0 / steps);
        return (z - ref).norm();
    };
    const double e1 = run(4), e2 = run(8);
    CHECK(std::log2(e1 / e2) > 3.5);
}

TEST_CASE("unconstrained OCP agrees with LQR and the closed loop converges") {
    const LinearSystem sys = scalar_plant(1.2, 1.0, 100.0);
    const auto cost = QuadraticStageCost::output_cost(1, 1, 1, 0.0, 0.5);
    const Plant plant = sys;
    const int N = 4;
    const VectorXd x0 = VectorXd::Constant(1, 1.0);
    const auto sol = solve_ocp(plant, cost, TerminalCostSpec::none(), N, x0);
    REQUIRE(sol.converged);
    const auto lqr = finite_horizon_lqr(sys, cost, MatrixXd::Zero(1, 1), N);
    CHECK(sol.u[0](0) == doctest::Approx(-lqr.K(0, 0) * 1.0).epsilon(1e-6));
    CHECK(sol.value == doctest::Approx(lqr.P(0, 0)).epsilon(1e-6));

    const auto tr = closed_loop(plant, cost, TerminalCostSpec::none(), N, x0, 60);
    CHECK(tr.x.size() == 61u);
    CHECK(std::abs(tr.x.back()(0)) < 1e-8);
}

TEST_CASE("input box is respected") {
    const LinearSystem sys = scalar_plant(1.0, 1.0, 0.1);
    const auto cost = QuadraticStageCost::output_cost(1, 1, 1, 0.0, 1e-3);
    const auto sol = solve_ocp(Plant{sys}, cost, TerminalCostSpec::none(), 5, VectorXd::Constant(1, 2.0));
    for (const auto& u : sol.u) CHECK(std::abs(u(0)) <= 0.1 + 1e-12);
    CHECK(sol.u[0](0) == doctest::Approx(-0.1));
}

TEST_CASE("terminal cost specifications") {
    const LinearSystem sys = scalar_plant(0.5, 1.0, 1.0);
    const auto cost = QuadraticStageCost::output_cost(1, 1, 1, 0.0, 1.0);
    const Plant plant = sys;
    const VectorXd x0 = VectorXd::Constant(1, 1.0);
    const VectorXd u = VectorXd::Zero(2);
    // zero input: x = 1, 0.5, 0.25
    CHECK(ocp_cost(plant, cost, TerminalCostSpec::none(), 2, x0, u) == doctest::Approx(1.25));
    CHECK(ocp_cost(plant, cost, TerminalCostSpec::quadratic(MatrixXd::Constant(1, 1, 4.0)), 2, x0, u) ==
          doctest::Approx(1.25 + 0.25));
    // finite tail of 2 more stages: 0.0625 + 0.015625
    CHECK(ocp_cost(plant, cost, TerminalCostSpec::finite_tail(2), 2, x0, u) == doctest::Approx(1.25 + 0.078125));
    CHECK(ocp_cost(plant, cost, TerminalCostSpec::scaled(2.0, MatrixXd::Identity(1, 1)), 2, x0, u) ==
          doctest::Approx(1.25 + 0.125));
    CHECK_THROWS(TerminalCostSpec::finite_tail(0).validate(1));
}

TEST_CASE("limit-cycle detector") {
    ClosedLoopTrace osc, conv;
    for (int k = 0; k <= 400; ++k) {
        osc.x.push_back(VectorXd::Constant(1, 0.5 * (k % 2 ? 1.0 : -1.0)));
        conv.x.push_back(VectorXd::Constant(1, std::pow(0.9, k)));
        if (k < 400) {
            osc.u.push_back(VectorXd::Constant(1, k % 2 ? 1.0 : -1.0));
            conv.u.push_back(VectorXd::Constant(1, 0.0));
        }
    }
    const VectorXd xs = VectorXd::Zero(1), lo = VectorXd::Constant(1, -1.0), hi = VectorXd::Constant(1, 1.0);
    const auto a = detect_limit_cycle(osc, xs, lo, hi);
    CHECK(a.limit_cycle);
    CHECK(a.saturation_fraction == doctest::Approx(1.0));
    CHECK(a.tail_min_norm == doctest::Approx(0.5));
    const auto b = detect_limit_cycle(conv, xs, lo, hi);
    CHECK_FALSE(b.limit_cycle);
    CHECK(b.saturation_fraction == 0.0);
}

TEST_CASE("performance check") {
    ClosedLoopTrace tr;
    tr.stage_cost = {1.0, 0.0};
    tr.performance = 1.0;
    CHECK(performance_ratio(tr, 0.0, 2.0, 0.5).status == CheckStatus::Satisfied);
    CHECK(performance_ratio(tr, 0.0, 0.5, 1.0).status == CheckStatus::Violated);
    tr.stage_cost = {1.0, 0.5};
    CHECK(performance_ratio(tr, 0.0, 0.5, 1.0).status == CheckStatus::Inconclusive);
    CHECK(performance_ratio(tr, 0.0, 0.5, -1.0).status == CheckStatus::Satisfied);
}

TEST_CASE("Lyapunov residuals of a contracting loop") {
    const LinearSystem sys = scalar_plant(0.5, 1.0, 1.0);
    const auto cost = QuadraticStageCost::output_cost(1, 1, 1, 0.0, 1.0);
    const auto tr = closed_loop(Plant{sys}, cost, TerminalCostSpec::none(), 3, VectorXd::Constant(1, 1.0), 20);
    StorageFunction W;
    const auto sigma = StateMeasure::stage_cost_min(cost, sys.C);
    const auto r = lyapunov_residuals(tr, W, sigma, 0.5);
    REQUIRE(r.size() == 20u);
    for (double v : r) CHECK(v <= 1e-12);
}
