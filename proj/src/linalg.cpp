#include "mpccert/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace mpccert::linalg {

MatrixXd sym(const MatrixXd& M) { return 0.5 * (M + M.transpose()); }

MatrixXd psd_factor(const MatrixXd& G) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(G));
    VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal();
}

namespace {

MatrixXd whiten(const MatrixXd& G, const MatrixXd& P) {
    Eigen::LLT<MatrixXd> llt(sym(P));
    if (llt.info() != Eigen::Success) throw std::domain_error("measure matrix is not positive definite");
    const MatrixXd L = llt.matrixL();
    const MatrixXd X = L.triangularView<Eigen::Lower>().solve(sym(G));
    const MatrixXd Y = L.triangularView<Eigen::Lower>().solve(X.transpose());
    return sym(Y);
}

}  // namespace

double gen_eig_max(const MatrixXd& G, const MatrixXd& P) { return max_eig(whiten(G, P)); }

double gen_eig_min(const MatrixXd& G, const MatrixXd& P) { return min_eig(whiten(G, P)); }

double gen_eig_max_inv(const MatrixXd& G, const MatrixXd& P_inv) {
    const MatrixXd S = psd_factor(G);
    return max_eig(sym(S.transpose() * P_inv * S));
}

double gen_eig_min_inv(const MatrixXd& G, const MatrixXd& P_inv) {
    Eigen::LLT<MatrixXd> llt(sym(P_inv));
    if (llt.info() != Eigen::Success) throw std::domain_error("gen_eig_min_inv: P_inv not positive definite");
    const MatrixXd L = llt.matrixL();
    return min_eig(sym(L.transpose() * G * L));
}

double min_eig(const MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(S), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double max_eig(const MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(S), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

bool is_positive_definite(const MatrixXd& S) {
    Eigen::LLT<MatrixXd> llt(sym(S));
    return llt.info() == Eigen::Success;
}

double spectral_radius(const MatrixXd& A) {
    Eigen::EigenSolver<MatrixXd> es(A, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

MatrixXd dlyap(const MatrixXd& A, const MatrixXd& Q) {
    if (spectral_radius(A) >= 1.0) throw std::domain_error("dlyap: A is not Schur stable");
    MatrixXd X = sym(Q);
    MatrixXd Ak = A;
    for (int it = 0; it < 64; ++it) {
        const MatrixXd dX = Ak.transpose() * X * Ak;
        X = sym(X + dX);
        if (dX.cwiseAbs().maxCoeff() <= 1e-16 * X.cwiseAbs().maxCoeff()) break;
        Ak = Ak * Ak;
    }
    return X;
}

MatrixXd spd_inverse(const MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(S));
    if (es.eigenvalues()(0) <= 0.0) throw std::domain_error("spd_inverse: matrix is not positive definite");
    return sym(es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose());
}

MatrixXd expm(const MatrixXd& M) {
    MatrixXd E = M.exp();
    if (!E.allFinite()) throw std::domain_error("expm: non-finite result");
    return E;
}

}  // namespace mpccert::linalg
