#include "oracles.hpp"

#include "mpccert/estimation.hpp"
#include "mpccert/io.hpp"
#include "mpccert/linalg.hpp"
#include "mpccert/models.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

using namespace mpccert;

namespace {

LinearSystem random_plant(int n, int m, std::mt19937_64& rng) {
    LinearSystem s;
    s.A = oracle::random_stable(n, 0.95, rng);
    std::normal_distribution<double> nd;
    s.B = MatrixXd(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) s.B(i, j) = nd(rng);
    s.C = MatrixXd::Identity(1, n);
    s.u_lo = VectorXd::Constant(m, -1.0);
    s.u_hi = VectorXd::Constant(m, 1.0);
    return s;
}

std::string temp_path(const char* name) { return std::string("mpccert_test_") + name; }

}  // namespace

TEST_CASE("open-loop constants bound the simulated cost sums") {
    std::mt19937_64 rng(31);
    for (int it = 0; it < 20; ++it) {
        const int n = 2 + it % 3;
        const LinearSystem sys = random_plant(n, 1, rng);
        const auto cost = QuadraticStageCost::output_cost(n, 1, 1, 0.1, 0.01);
        const auto sigma = StateMeasure::stage_cost_min(cost, sys.C);
        const int K = 15;
        const auto g = gamma_linear_openloop(sys, cost, sigma, std::nullopt, K);
        REQUIRE(static_cast<int>(g.size()) == K);
        std::normal_distribution<double> nd;
        for (int trial = 0; trial < 30; ++trial) {
            VectorXd x(n);
            for (int i = 0; i < n; ++i) x(i) = nd(rng);
            const double s = sigma.eval(x);
            double sum = 0.0;
            VectorXd z = x;
            for (int k = 1; k <= K; ++k) {
                sum += cost.eval(sys.C, z, VectorXd::Zero(1));
                z = sys.A * z;
                CHECK(sum <= g[static_cast<std::size_t>(k - 1)] * s * (1.0 + 1e-9));
            }
        }
        // attained by the top generalized eigenvector of the K-step cost matrix
        MatrixXd G = sigma.P, Ak = MatrixXd::Identity(n, n);
        for (int k = 1; k < K; ++k) {
            Ak = sys.A * Ak;
            G += Ak.transpose() * sigma.P * Ak;
        }
        CHECK(linalg::gen_eig_max(G, sigma.P) == doctest::Approx(g.back()).epsilon(1e-9));
        const double gb = gamma_bar_linear(sys, cost, sigma, std::nullopt, K);
        CHECK(gb >= g.back() * (1.0 - 1e-12));
        const MatrixXd Ginf = oracle::dlyap_kron(sys.A, sigma.P);
        CHECK(gb == doctest::Approx(linalg::gen_eig_max(Ginf, sigma.P)).epsilon(1e-8));
    }
}

TEST_CASE("synthesized storage passes verification and a scaled copy fails") {
    const LinearSystem sys = msd_chain_model();
    const auto cost = QuadraticStageCost::output_cost(sys.n(), sys.m(), 1, 1e-4, 1.0);
    StorageOptions opt;
    opt.K = 200;
    const auto syn = synthesize_storage_linear(sys, cost, log_grid(1e-3, 0.5, 3), opt);
    REQUIRE(syn.found);
    const Plant plant = sys;
    const auto ok = verify_storage(plant, cost, syn.storage, syn.sigma, syn.constants.gamma_o_lower,
                                   syn.constants.gamma_o_upper, 200, 7);
    CHECK(ok.pass);
    CHECK(ok.max_dissipation <= 1e-9);

    StorageFunction bad = syn.storage;
    bad.P_o *= 10.0;
    if (bad.P_o_inv) *bad.P_o_inv /= 10.0;
    const auto fail = verify_storage(plant, cost, bad, syn.sigma, syn.constants.gamma_o_lower,
                                     syn.constants.gamma_o_upper, 200, 7);
    CHECK_FALSE(fail.pass);
}

TEST_CASE("dissipation matrix of a known storage") {
    // scalar x+ = a x + b u, l = q x^2 + r u^2, W = p x^2
    LinearSystem s;
    s.A = MatrixXd::Constant(1, 1, 0.5);
    s.B = MatrixXd::Constant(1, 1, 1.0);
    s.C = MatrixXd::Identity(1, 1);
    s.u_lo = VectorXd::Constant(1, -1.0);
    s.u_hi = VectorXd::Constant(1, 1.0);
    const auto cost = QuadraticStageCost::output_cost(1, 1, 1, 0.0, 2.0);
    const double p = 0.7, eps = 0.3;
    const MatrixXd D = dissipation_matrix(s, cost, MatrixXd::Constant(1, 1, p), eps);
    CHECK(D(0, 0) == doctest::Approx((1.0 - eps) * p + 1.0 - 0.25 * p));
    CHECK(D(0, 1) == doctest::Approx(-0.5 * p));
    CHECK(D(1, 1) == doctest::Approx(2.0 - p));
}

TEST_CASE("NARX storage identities") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int nu : {1, 2, 3, 5}) {
        const StorageFunction W = narx_storage(nu);
        CHECK(W.eps_o == doctest::Approx(1.0 / nu));
        std::vector<double> l(200);
        for (auto& v : l) v = u(rng);
        for (double r : narx_telescoping_residuals(W, l)) CHECK(std::abs(r) <= 1e-10);
        for (double r : narx_dissipation_residuals(W, l)) CHECK(r <= 1e-10);
    }
    CHECK_THROWS((void)narx_storage(0));
}

TEST_CASE("NARX dissipation along four-tank trajectories") {
    const NonlinearSystem sys = four_tank_model();
    const auto [xs, us] = FourTankParams::placeholder().setpoint();
    auto cost = QuadraticStageCost::output_cost(4, 2, 2, 0.0, 1e-2);
    cost.x_s = xs;
    cost.u_s = us;
    const StorageFunction W = narx_storage(2);
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), uu(0.0, 60.0);
    for (int traj = 0; traj < 10; ++traj) {
        VectorXd x = xs;
        for (int i = 0; i < 4; ++i) x(i) += ux(rng);
        std::vector<double> l;
        for (int k = 0; k < 60; ++k) {
            VectorXd uk(2);
            uk << uu(rng), uu(rng);
            l.push_back(cost.eval(sys.C, x, uk));
            x = sys.step(x, uk);
        }
        for (double r : narx_dissipation_residuals(W, l)) CHECK(r <= 1e-10);
    }
}

TEST_CASE("grid constants for the four-tank plant are sampled and at least one") {
    const NonlinearSystem sys = four_tank_model();
    const auto [xs, us] = FourTankParams::placeholder().setpoint();
    auto cost = QuadraticStageCost::output_cost(4, 2, 2, 0.1, 1e-2);
    cost.x_s = xs;
    cost.u_s = us;
    GridSpec grid;
    grid.lo.assign(4, -2.0);
    grid.hi.assign(4, 2.0);
    grid.points.assign(4, 3);
    CHECK(grid.size() == 81u);
    const auto r = gamma_nonlinear_grid(sys, cost, GridMeasure::StageCostMin, 2, grid, 20, 0.0, 2);
    REQUIRE(r.gamma.size() == 20u);
    CHECK(r.sampled);
    CHECK(r.points_used > 0u);
    CHECK(r.gamma.front() >= 1.0 - 1e-12);
    for (std::size_t k = 1; k < r.gamma.size(); ++k) CHECK(r.gamma[k] >= r.gamma[k - 1] - 1e-12);
}

TEST_CASE("terminal constants for linear plants") {
    const LinearSystem sys = msd_chain_model();
    const auto cost = QuadraticStageCost::output_cost(sys.n(), sys.m(), 1, 0.1, 1e-5);
    const auto sigma = StateMeasure::stage_cost_min(cost, sys.C);
    double omega_t = 0.0;
    const auto ts = terminal_scaled_linear(sys, cost, sigma, 10.0, 30, &omega_t);
    CHECK(omega_t > 0.0);
    CHECK(ts.gamma_f.size() == 30u);
    const auto tf = terminal_finite_tail_linear(sys, cost, sigma, 10, 30);
    CHECK(tf.eps_f >= 0.0);
    const auto g = gamma_linear_openloop(sys, cost, sigma, std::nullopt, 40);
    // the finite tail appends M free-running stages
    CHECK(tf.gamma_f[0] == doctest::Approx(g[10]).epsilon(1e-9));

    TerminalConstants t;
    t.eps_f = -0.5;
    t.gamma_f = {2.0, 3.0};
    const auto n = normalize_terminal(t);
    CHECK(n.eps_f == 0.0);
    CHECK(n.gamma_f_bar == 3.0);
    CHECK(n.c_f_upper >= 2.0);
}

TEST_CASE("gamma CSV round trip") {
    const std::string path = temp_path("gamma.csv");
    write_gamma_csv(path, {1.5, 2.25, 1e-20}, "stage_cost", true);
    std::istringstream is(read_file(path));
    std::string line;
    std::getline(is, line);
    CHECK(line == "k,gamma_k,mode,provenance");
    std::vector<double> back;
    while (std::getline(is, line)) {
        std::stringstream ss(line);
        std::string k, g, mode, prov;
        std::getline(ss, k, ',');
        std::getline(ss, g, ',');
        std::getline(ss, mode, ',');
        std::getline(ss, prov, ',');
        CHECK(mode == "stage_cost");
        CHECK(prov == "sampled");
        back.push_back(std::stod(g));
    }
    REQUIRE(back.size() == 3u);
    CHECK(back[1] == 2.25);
    CHECK(back[2] == doctest::Approx(1e-20));
    std::remove(path.c_str());
}

TEST_CASE("log grid") {
    const auto g = log_grid(1e-3, 1e-1, 3);
    REQUIRE(g.size() == 3u);
    CHECK(g[1] == doctest::Approx(1e-2));
    CHECK_THROWS((void)log_grid(0.0, 1.0, 3));
}
