#pragma once

#include "mpccert/system.hpp"

#include <utility>

namespace mpccert {

/// Zero-order-hold discretization through the exponential of [[A_c, B_c], [0, 0]] h.
[[nodiscard]] std::pair<MatrixXd, MatrixXd> exact_discretization(const MatrixXd& A_c, const MatrixXd& B_c, double h);

/// Continuous chain of L masses, first mass tied to a wall, force on the last
/// mass. State ordering [z_1, dz_1, ..., z_L, dz_L].
[[nodiscard]] std::pair<MatrixXd, MatrixXd> msd_chain_continuous(int L, double mass, double k, double d);

/// Sampled chain with output z_1 and input box [-u_max, u_max].
[[nodiscard]] LinearSystem msd_chain_model(int L = 6, double mass = 1.0, double k = 10.0, double d = 2.0,
                                           double h = 1.0, double u_max = 1.0);

/// Quadruple-tank constants in cm, s and ml/s. The defaults are a placeholder
/// set shaped like the usual laboratory rig; they are not authoritative.
struct FourTankParams {
    double area = 50.27;
    double a1 = 0.233;  // outlet of lower tank 1
    double a2 = 0.127;  // outlet of upper tank 2, draining into tank 1
    double a3 = 0.242;  // outlet of lower tank 3
    double a4 = 0.127;  // outlet of upper tank 4, draining into tank 3
    double g = 981.0;
    double split1 = 0.4;  // share of pump 1 routed to tank 1
    double split2 = 0.4;  // share of pump 2 routed to tank 3
    double us1 = 43.4;
    double us2 = 35.4;
    double u_max = 60.0;
    double Ts = 3.0;

    static FourTankParams placeholder();
    /// Equilibrium levels for the nominal pump flows (us1, us2).
    [[nodiscard]] std::pair<VectorXd, VectorXd> setpoint() const;
};

/// x1' = -c1 sqrt(x1) + c12 sqrt(x2) + c1u u1,  x2' = -c2 sqrt(x2) + c2u u2,
/// x3' = -c3 sqrt(x3) + c34 sqrt(x4) + c3u u2,  x4' = -c4 sqrt(x4) + c4u u1,
/// outputs x1 and x3, RK4 with levels clamped at zero.
[[nodiscard]] NonlinearSystem four_tank_model(const FourTankParams& p = FourTankParams::placeholder());

}  // namespace mpccert
