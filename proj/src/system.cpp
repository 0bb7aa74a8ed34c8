#include "mpccert/system.hpp"

#include "mpccert/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace mpccert {

void LinearSystem::validate() const {
    const int nn = n();
    if (A.cols() != nn || B.rows() != nn || C.cols() != nn) throw std::invalid_argument("LinearSystem: dimension mismatch");
    if (u_lo.size() != m() || u_hi.size() != m()) throw std::invalid_argument("LinearSystem: input box size mismatch");
    if ((u_lo.array() > u_hi.array()).any()) throw std::invalid_argument("LinearSystem: u_lo > u_hi");
}

VectorXd NonlinearSystem::rk4(const VectorXd& x, const VectorXd& u, double h) const {
    const VectorXd k1 = rhs(x, u);
    const VectorXd k2 = rhs(x + 0.5 * h * k1, u);
    const VectorXd k3 = rhs(x + 0.5 * h * k2, u);
    const VectorXd k4 = rhs(x + h * k3, u);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

VectorXd NonlinearSystem::step(const VectorXd& x, const VectorXd& u) const {
    VectorXd z = x;
    const double h = Ts / substeps;
    for (int i = 0; i < substeps; ++i) {
        z = rk4(z, u, h);
        if (clamp_nonnegative) z = z.cwiseMax(0.0);
    }
    return z;
}

void NonlinearSystem::validate() const {
    if (!(Ts > 0.0)) throw std::invalid_argument("NonlinearSystem: Ts must be > 0");
    if (substeps < 1) throw std::invalid_argument("NonlinearSystem: substeps must be >= 1");
    if (!rhs) throw std::invalid_argument("NonlinearSystem: missing vector field");
    if (C.cols() != nx || u_lo.size() != nu || u_hi.size() != nu) throw std::invalid_argument("NonlinearSystem: dimension mismatch");
}

int plant_n(const Plant& p) {
    return std::visit([](const auto& s) { return s.n(); }, p);
}
int plant_m(const Plant& p) {
    return std::visit([](const auto& s) { return s.m(); }, p);
}
const MatrixXd& plant_C(const Plant& p) {
    return std::visit([](const auto& s) -> const MatrixXd& { return s.C; }, p);
}
const VectorXd& plant_u_lo(const Plant& p) {
    return std::visit([](const auto& s) -> const VectorXd& { return s.u_lo; }, p);
}
const VectorXd& plant_u_hi(const Plant& p) {
    return std::visit([](const auto& s) -> const VectorXd& { return s.u_hi; }, p);
}
bool plant_is_linear(const Plant& p) { return std::holds_alternative<LinearSystem>(p); }

VectorXd plant_step(const Plant& p, const VectorXd& x, const VectorXd& u) {
    if (const auto* lin = std::get_if<LinearSystem>(&p)) return lin->A * x + lin->B * u;
    return std::get<NonlinearSystem>(p).step(x, u);
}

void plant_jacobians(const Plant& p, const VectorXd& x, const VectorXd& u, MatrixXd& Ax, MatrixXd& Bu) {
    if (const auto* lin = std::get_if<LinearSystem>(&p)) {
        Ax = lin->A;
        Bu = lin->B;
        return;
    }
    const auto& sys = std::get<NonlinearSystem>(p);
    const int n = sys.nx, m = sys.nu;
    Ax.resize(n, n);
    Bu.resize(n, m);
    for (int j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
        VectorXd xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        Ax.col(j) = (sys.step(xp, u) - sys.step(xm, u)) / (2.0 * h);
    }
    for (int j = 0; j < m; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(u(j)));
        VectorXd up = u, um = u;
        up(j) += h;
        um(j) -= h;
        Bu.col(j) = (sys.step(x, up) - sys.step(x, um)) / (2.0 * h);
    }
}

MatrixXd QuadraticStageCost::state_weight(const MatrixXd& C) const {
    const int n = static_cast<int>(C.cols());
    return linalg::sym(C.transpose() * Qy * C + q * MatrixXd::Identity(n, n));
}

double QuadraticStageCost::eval(const MatrixXd& C, const VectorXd& x, const VectorXd& u) const {
    const VectorXd dx = x - x_s;
    const VectorXd y = C * dx;
    const VectorXd du = u - u_s;
    return y.dot(Qy * y) + q * dx.squaredNorm() + du.dot(R * du);
}

double QuadraticStageCost::ell_min(const MatrixXd& C, const VectorXd& x) const {
    const VectorXd dx = x - x_s;
    const VectorXd y = C * dx;
    return y.dot(Qy * y) + q * dx.squaredNorm();
}

void QuadraticStageCost::validate(int n, int m, int p) const {
    if (Qy.rows() != p || Qy.cols() != p || R.rows() != m || R.cols() != m || x_s.size() != n || u_s.size() != m)
        throw std::invalid_argument("QuadraticStageCost: dimension mismatch");
    if (q < 0.0) throw std::invalid_argument("QuadraticStageCost: q must be >= 0");
    if (!linalg::is_positive_definite(R)) throw std::invalid_argument("QuadraticStageCost: R must be positive definite");
    if (linalg::min_eig(Qy) < 0.0) throw std::invalid_argument("QuadraticStageCost: Qy must be positive semi-definite");
}

QuadraticStageCost QuadraticStageCost::output_cost(int n, int m, int p, double q, double r) {
    QuadraticStageCost c;
    c.Qy = MatrixXd::Identity(p, p);
    c.q = q;
    c.R = r * MatrixXd::Identity(m, m);
    c.x_s = VectorXd::Zero(n);
    c.u_s = VectorXd::Zero(m);
    return c;
}

}  // namespace mpccert
