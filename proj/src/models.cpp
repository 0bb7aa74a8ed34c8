#include "mpccert/models.hpp"

#include "mpccert/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace mpccert {

std::pair<MatrixXd, MatrixXd> exact_discretization(const MatrixXd& A_c, const MatrixXd& B_c, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("exact_discretization: h must be > 0");
    const int n = static_cast<int>(A_c.rows());
    const int m = static_cast<int>(B_c.cols());
    MatrixXd M = MatrixXd::Zero(n + m, n + m);
    M.topLeftCorner(n, n) = A_c * h;
    M.topRightCorner(n, m) = B_c * h;
    const MatrixXd E = linalg::expm(M);
    return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

std::pair<MatrixXd, MatrixXd> msd_chain_continuous(int L, double mass, double k, double d) {
    if (L < 1 || !(mass > 0.0) || k < 0.0 || d < 0.0) throw std::invalid_argument("msd_chain: bad parameters");
    const int n = 2 * L;
    MatrixXd Ac = MatrixXd::Zero(n, n);
    MatrixXd Bc = MatrixXd::Zero(n, 1);
    for (int i = 0; i < L; ++i) {
        const int p = 2 * i, v = 2 * i + 1;
        Ac(p, v) = 1.0;
        // link to the left neighbour, or the wall for the first mass
        Ac(v, p) -= k / mass;
        Ac(v, v) -= d / mass;
        if (i > 0) {
            Ac(v, p - 2) += k / mass;
            Ac(v, v - 2) += d / mass;
        }
        if (i < L - 1) {
            Ac(v, p) -= k / mass;
            Ac(v, v) -= d / mass;
            Ac(v, p + 2) += k / mass;
            Ac(v, v + 2) += d / mass;
        }
    }
    Bc(n - 1, 0) = 1.0 / mass;
    return {Ac, Bc};
}

LinearSystem msd_chain_model(int L, double mass, double k, double d, double h, double u_max) {
    auto [Ac, Bc] = msd_chain_continuous(L, mass, k, d);
    auto [Ad, Bd] = exact_discretization(Ac, Bc, h);
    LinearSystem sys;
    sys.A = Ad;
    sys.B = Bd;
    sys.C = MatrixXd::Zero(1, 2 * L);
    sys.C(0, 0) = 1.0;
    sys.u_lo = VectorXd::Constant(1, -u_max);
    sys.u_hi = VectorXd::Constant(1, u_max);
    return sys;
}

FourTankParams FourTankParams::placeholder() { return {}; }

std::pair<VectorXd, VectorXd> FourTankParams::setpoint() const {
    const double s = std::sqrt(2.0 * g);
    const double c1 = a1 * s / area, c12 = a2 * s / area, c2 = a2 * s / area;
    const double c3 = a3 * s / area, c34 = a4 * s / area, c4 = a4 * s / area;
    const double c1u = split1 / area, c2u = (1.0 - split2) / area, c3u = split2 / area, c4u = (1.0 - split1) / area;
    VectorXd u(2);
    u << us1, us2;
    VectorXd x(4);
    x(1) = std::pow(c2u * u(1) / c2, 2);
    x(3) = std::pow(c4u * u(0) / c4, 2);
    x(0) = std::pow((c12 * std::sqrt(x(1)) + c1u * u(0)) / c1, 2);
    x(2) = std::pow((c34 * std::sqrt(x(3)) + c3u * u(1)) / c3, 2);
    return {x, u};
}

NonlinearSystem four_tank_model(const FourTankParams& p) {
    for (double v : {p.area, p.a1, p.a2, p.a3, p.a4, p.g, p.split1, p.split2, p.Ts, p.u_max})
        if (!(v > 0.0)) throw std::invalid_argument("four_tank: parameters must be positive");
    if (p.split1 >= 1.0 || p.split2 >= 1.0) throw std::invalid_argument("four_tank: valve splits must lie in (0,1)");
    const double s = std::sqrt(2.0 * p.g);
    const double c1 = p.a1 * s / p.area, c12 = p.a2 * s / p.area, c2 = p.a2 * s / p.area;
    const double c3 = p.a3 * s / p.area, c34 = p.a4 * s / p.area, c4 = p.a4 * s / p.area;
    const double c1u = p.split1 / p.area, c2u = (1.0 - p.split2) / p.area;
    const double c3u = p.split2 / p.area, c4u = (1.0 - p.split1) / p.area;

    NonlinearSystem sys;
    sys.model_id = "four_tank";
    sys.params = {{"c1", c1},   {"c12", c12}, {"c2", c2},   {"c3", c3},   {"c34", c34}, {"c4", c4},
                  {"c1u", c1u}, {"c2u", c2u}, {"c3u", c3u}, {"c4u", c4u}, {"Ts", p.Ts}};
    sys.rhs = [=](const VectorXd& x, const VectorXd& u) {
        const VectorXd r = x.cwiseMax(0.0).cwiseSqrt();
        VectorXd dx(4);
        dx(0) = -c1 * r(0) + c12 * r(1) + c1u * u(0);
        dx(1) = -c2 * r(1) + c2u * u(1);
        dx(2) = -c3 * r(2) + c34 * r(3) + c3u * u(1);
        dx(3) = -c4 * r(3) + c4u * u(0);
        return dx;
    };
    sys.Ts = p.Ts;
    sys.substeps = 1;
    sys.clamp_nonnegative = true;
    sys.nx = 4;
    sys.nu = 2;
    sys.C = MatrixXd::Zero(2, 4);
    sys.C(0, 0) = 1.0;
    sys.C(1, 2) = 1.0;
    sys.u_lo = VectorXd::Zero(2);
    sys.u_hi = VectorXd::Constant(2, p.u_max);
    return sys;
}

}  // namespace mpccert
