#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <string>
#include <variant>

namespace mpccert {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// x+ = A x + B u, y = C x, u in [u_lo, u_hi].
struct LinearSystem {
    MatrixXd A, B, C;
    VectorXd u_lo, u_hi;

    [[nodiscard]] int n() const { return static_cast<int>(A.rows()); }
    [[nodiscard]] int m() const { return static_cast<int>(B.cols()); }
    void validate() const;
};

/// Continuous-time vector field sampled with RK4.
struct NonlinearSystem {
    std::string model_id;
    std::map<std::string, double> params;
    std::function<VectorXd(const VectorXd&, const VectorXd&)> rhs;
    double Ts = 1.0;
    int substeps = 1;
    std::string scheme = "rk4";
    bool clamp_nonnegative = false;
    int nx = 0;
    int nu = 0;
    MatrixXd C;
    VectorXd u_lo, u_hi;

    [[nodiscard]] int n() const { return nx; }
    [[nodiscard]] int m() const { return nu; }
    [[nodiscard]] VectorXd step(const VectorXd& x, const VectorXd& u) const;
    /// One RK4 step of length h without clamping; used for order checks.
    [[nodiscard]] VectorXd rk4(const VectorXd& x, const VectorXd& u, double h) const;
    void validate() const;
};

using Plant = std::variant<LinearSystem, NonlinearSystem>;

[[nodiscard]] int plant_n(const Plant& p);
[[nodiscard]] int plant_m(const Plant& p);
[[nodiscard]] const MatrixXd& plant_C(const Plant& p);
[[nodiscard]] const VectorXd& plant_u_lo(const Plant& p);
[[nodiscard]] const VectorXd& plant_u_hi(const Plant& p);
[[nodiscard]] VectorXd plant_step(const Plant& p, const VectorXd& x, const VectorXd& u);
/// Jacobians of the sampled map; exact for linear plants, central differences otherwise.
void plant_jacobians(const Plant& p, const VectorXd& x, const VectorXd& u, MatrixXd& Ax, MatrixXd& Bu);
[[nodiscard]] bool plant_is_linear(const Plant& p);

/// l(x,u) = |C(x-x_s)|^2_Qy + q |x-x_s|^2 + |u-u_s|^2_R.
struct QuadraticStageCost {
    MatrixXd Qy;
    double q = 0.0;
    MatrixXd R;
    VectorXd x_s, u_s;

    /// C' Qy C + q I, the state weight at u = u_s.
    [[nodiscard]] MatrixXd state_weight(const MatrixXd& C) const;
    [[nodiscard]] double eval(const MatrixXd& C, const VectorXd& x, const VectorXd& u) const;
    /// min over u of l(x,u), attained at u = u_s.
    [[nodiscard]] double ell_min(const MatrixXd& C, const VectorXd& x) const;
    void validate(int n, int m, int p) const;

    static QuadraticStageCost output_cost(int n, int m, int p, double q, double r);
};

}  // namespace mpccert
