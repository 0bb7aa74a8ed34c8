#pragma once

#include <Eigen/Dense>

namespace mpccert::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

[[nodiscard]] MatrixXd sym(const MatrixXd& M);

/// Symmetric square root factor S with S S' = G for G positive semi-definite.
[[nodiscard]] MatrixXd psd_factor(const MatrixXd& G);

/// Largest lambda with G <= lambda P. P must be positive definite.
[[nodiscard]] double gen_eig_max(const MatrixXd& G, const MatrixXd& P);
/// Smallest lambda with G >= lambda P. P must be positive definite.
[[nodiscard]] double gen_eig_min(const MatrixXd& G, const MatrixXd& P);
/// gen_eig_max(G, P) given P^{-1}; avoids inverting a badly conditioned P.
[[nodiscard]] double gen_eig_max_inv(const MatrixXd& G, const MatrixXd& P_inv);
/// gen_eig_min(G, P) given P^{-1}.
[[nodiscard]] double gen_eig_min_inv(const MatrixXd& G, const MatrixXd& P_inv);

[[nodiscard]] double min_eig(const MatrixXd& S);
[[nodiscard]] double max_eig(const MatrixXd& S);
[[nodiscard]] bool is_positive_definite(const MatrixXd& S);

[[nodiscard]] double spectral_radius(const MatrixXd& A);

/// X solving A' X A - X + Q = 0 for Schur-stable A (squared Smith iteration).
[[nodiscard]] MatrixXd dlyap(const MatrixXd& A, const MatrixXd& Q);

/// Inverse of a symmetric positive definite matrix through its eigen-decomposition.
[[nodiscard]] MatrixXd spd_inverse(const MatrixXd& S);

[[nodiscard]] MatrixXd expm(const MatrixXd& M);

}  // namespace mpccert::linalg
