#include "mpccert/lp.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace mpccert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPerturbation = 1e-7;

// Dense tableau over a standard-form problem  min c'z, Az = b, z >= 0, b >= 0.
// Artificial columns follow the structural ones. The tableau is rebuilt from
// the original data every max(kReinvert, 4 rows) pivots and before the solution
// is read.
class Tableau {
public:
    Tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double feas_tol, double opt_tol)
        : m_(static_cast<int>(A.rows())), n_(static_cast<int>(A.cols())), feas_tol_(feas_tol), opt_tol_(opt_tol) {
        A0_ = Eigen::MatrixXd::Zero(m_, n_ + m_);
        A0_.leftCols(n_) = A;
        A0_.rightCols(m_).setIdentity();
        b0_ = b;
        T_.setZero(m_ + 1, n_ + m_ + 1);
        T_.topLeftCorner(m_, n_ + m_) = A0_;
        T_.col(n_ + m_).head(m_) = b;
        basis_.resize(m_);
        for (int i = 0; i < m_; ++i) basis_[i] = n_ + i;
        allowed_.assign(n_ + m_, true);
    }

    // Objective row holds reduced costs; last entry holds -objective.
    void set_cost(const Eigen::VectorXd& cost_full) {
        cost_ = cost_full;
        price();
    }

    // Returns 0 optimal, 1 unbounded, 2 iteration limit.
    int run(long& iters, long max_iters) {
        const int rhs = n_ + m_;
        int degenerate = 0;
        int since_reinvert = 0;
        while (true) {
            const bool bland = degenerate > kDegenerateLimit;
            int enter = -1;
            double most = -opt_tol_;
            for (int j = 0; j < n_ + m_; ++j) {
                if (!allowed_[j] || T_(m_, j) >= most) continue;
                enter = j;
                if (bland) break;
                most = T_(m_, j);
            }
            if (enter < 0) {
                if (since_reinvert == 0) return 0;
                reinvert();
                since_reinvert = 0;
                continue;
            }
            if (iters >= max_iters) return 2;
            int leave = -1;
            double best = kInf;
            for (int i = 0; i < m_; ++i) {
                const double a = T_(i, enter);
                if (a <= feas_tol_) continue;
                const double ratio = std::max(T_(i, rhs), 0.0) / a;
                const double tie = leave >= 0 ? 1e-12 * (1.0 + best) : 0.0;
                bool take = leave < 0 || ratio < best - tie;
                if (!take && leave >= 0 && ratio <= best + tie)
                    take = bland ? basis_[i] < basis_[leave] : a > T_(leave, enter);
                if (take) {
                    best = std::min(best, ratio);
                    leave = i;
                }
            }
            if (leave < 0) return 1;
            degenerate = best <= 1e-12 ? degenerate + 1 : 0;
            pivot(leave, enter);
            ++iters;
            if (++since_reinvert >= std::max(kReinvert, 4 * m_)) {
                reinvert();
                since_reinvert = 0;
            }
        }
    }

    void pivot(int r, int c) {
        T_.row(r) /= T_(r, c);
        for (int i = 0; i <= m_; ++i) {
            if (i == r) continue;
            const double f = T_(i, c);
            if (f != 0.0) T_.row(i) -= f * T_.row(r);
        }
        T_(r, c) = 1.0;
        basis_[r] = c;
    }

    // Recomputes B^{-1} [A b] and the reduced costs from the original data.
    void reinvert() {
        Eigen::MatrixXd B(m_, m_);
        for (int i = 0; i < m_; ++i) B.col(i) = A0_.col(basis_[i]);
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        Eigen::MatrixXd rhs(m_, n_ + m_ + 1);
        rhs.leftCols(n_ + m_) = A0_;
        rhs.col(n_ + m_) = b0_;
        const Eigen::MatrixXd top = lu.solve(rhs);
        if (!top.allFinite()) return;
        T_.topRows(m_) = top;
        for (int i = 0; i < m_; ++i) {
            if (T_(i, n_ + m_) < 0.0 && T_(i, n_ + m_) > -feas_tol_) T_(i, n_ + m_) = 0.0;
        }
        price();
    }

    // Replaces the right-hand side and rebuilds the tableau for the current basis.
    void set_rhs(const Eigen::VectorXd& b) {
        b0_ = b;
        reinvert();
    }

    // Dual simplex from a dual feasible basis. Returns 0 optimal, 1 primal
    // infeasible, 2 iteration limit.
    int dual_run(long& iters, long max_iters) {
        const int rhs = n_ + m_;
        while (true) {
            int leave = -1;
            double worst = -feas_tol_;
            for (int i = 0; i < m_; ++i) {
                if (T_(i, rhs) < worst) {
                    worst = T_(i, rhs);
                    leave = i;
                }
            }
            if (leave < 0) return 0;
            if (iters >= max_iters) return 2;
            int enter = -1;
            double best = kInf;
            for (int j = 0; j < n_ + m_; ++j) {
                const double a = T_(leave, j);
                if (!allowed_[j] || a >= -feas_tol_) continue;
                const double ratio = std::max(T_(m_, j), 0.0) / -a;
                if (ratio < best || (ratio == best && enter >= 0 && -a > -T_(leave, enter))) {
                    best = ratio;
                    enter = j;
                }
            }
            if (enter < 0) return 1;
            pivot(leave, enter);
            ++iters;
        }
    }

    // After phase 1: pivot artificials out of the basis, dropping redundant rows.
    void purge_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            int col = -1;
            double best = feas_tol_;
            for (int j = 0; j < n_; ++j) {
                if (std::abs(T_(i, j)) > best) {
                    best = std::abs(T_(i, j));
                    col = j;
                }
            }
            if (col >= 0) pivot(i, col);
        }
        for (int j = n_; j < n_ + m_; ++j) allowed_[j] = false;
    }

    [[nodiscard]] Eigen::VectorXd primal() const {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n_);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) z(basis_[i]) = std::max(T_(i, n_ + m_), 0.0);
        return z;
    }

    [[nodiscard]] double objective() const { return -T_(m_, n_ + m_); }

    [[nodiscard]] bool primal_feasible() const {
        return T_.col(n_ + m_).head(m_).minCoeff() >= -feas_tol_;
    }

private:
    static constexpr int kReinvert = 64;
    static constexpr int kDegenerateLimit = 50;

    void price() {
        T_.row(m_).setZero();
        T_.row(m_).head(n_ + m_) = cost_.transpose();
        for (int i = 0; i < m_; ++i) {
            const double cb = cost_(basis_[i]);
            if (cb != 0.0) T_.row(m_) -= cb * T_.row(i);
        }
    }

    int m_, n_;
    double feas_tol_, opt_tol_;
    Eigen::MatrixXd A0_;
    Eigen::VectorXd b0_;
    Eigen::VectorXd cost_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> T_;
    std::vector<int> basis_;
    std::vector<bool> allowed_;
};

}  // namespace

DenseLp::DenseLp(int n_vars)
    : c(Eigen::VectorXd::Zero(n_vars)),
      A_ub(0, n_vars),
      b_ub(0),
      A_eq(0, n_vars),
      b_eq(0),
      lower(Eigen::VectorXd::Zero(n_vars)),
      names(static_cast<std::size_t>(n_vars)) {
    for (int j = 0; j < n_vars; ++j) names[j] = "x" + std::to_string(j);
}

int DenseLp::add_le(const Eigen::RowVectorXd& row, double rhs, std::string name) {
    const int r = n_ub();
    A_ub.conservativeResize(r + 1, n_vars());
    A_ub.row(r) = row;
    b_ub.conservativeResize(r + 1);
    b_ub(r) = rhs;
    row_names.insert(row_names.begin() + r, name.empty() ? "c" + std::to_string(r) : std::move(name));
    return r;
}

int DenseLp::add_eq(const Eigen::RowVectorXd& row, double rhs, std::string name) {
    const int r = n_eq();
    A_eq.conservativeResize(r + 1, n_vars());
    A_eq.row(r) = row;
    b_eq.conservativeResize(r + 1);
    b_eq(r) = rhs;
    row_names.push_back(name.empty() ? "e" + std::to_string(r) : std::move(name));
    return r;
}

void DenseLp::validate() const {
    const int n = n_vars();
    if (A_ub.cols() != n || A_eq.cols() != n || lower.size() != n) throw std::invalid_argument("DenseLp: column mismatch");
    if (A_ub.rows() != b_ub.size() || A_eq.rows() != b_eq.size()) throw std::invalid_argument("DenseLp: row mismatch");
    if (!c.allFinite() || !A_ub.allFinite() || !b_ub.allFinite() || !A_eq.allFinite() || !b_eq.allFinite())
        throw std::invalid_argument("DenseLp: non-finite coefficient");
    for (int j = 0; j < n; ++j)
        if (std::isnan(lower(j)) || lower(j) == kInf) throw std::invalid_argument("DenseLp: bad lower bound");
}

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration_limit";
    }
    return "?";
}

double constraint_violation(const DenseLp& lp, const Eigen::VectorXd& x) {
    double worst = 0.0;
    for (int i = 0; i < lp.n_ub(); ++i) {
        const double lhs = lp.A_ub.row(i).dot(x);
        const double scale = 1.0 + std::max(std::abs(lp.b_ub(i)), lp.A_ub.row(i).cwiseAbs().dot(x.cwiseAbs()));
        worst = std::max(worst, (lhs - lp.b_ub(i)) / scale);
    }
    for (int i = 0; i < lp.n_eq(); ++i) {
        const double lhs = lp.A_eq.row(i).dot(x);
        const double scale = 1.0 + std::max(std::abs(lp.b_eq(i)), lp.A_eq.row(i).cwiseAbs().dot(x.cwiseAbs()));
        worst = std::max(worst, std::abs(lhs - lp.b_eq(i)) / scale);
    }
    for (int j = 0; j < lp.n_vars(); ++j)
        if (std::isfinite(lp.lower(j))) worst = std::max(worst, (lp.lower(j) - x(j)) / (1.0 + std::abs(lp.lower(j))));
    return worst;
}

LpSolution solve_lp(const DenseLp& lp, long max_iters) {
    SimplexOptions o;
    o.max_iters = max_iters;
    return solve_lp(lp, o);
}

LpSolution solve_lp(const DenseLp& lp, const SimplexOptions& opt) {
    lp.validate();
    const int n = lp.n_vars();
    const int mu = lp.n_ub();
    const int me = lp.n_eq();

    // Column map: each original variable -> one shifted column, or two for free variables.
    std::vector<int> pos(n), neg(n, -1);
    int nz = 0;
    for (int j = 0; j < n; ++j) {
        pos[j] = nz++;
        if (!std::isfinite(lp.lower(j))) neg[j] = nz++;
    }
    const int n_std = nz + mu;  // plus one slack per inequality
    const int m = mu + me;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n_std);
    Eigen::VectorXd b(m);
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(n_std);
    double shift_obj = 0.0;
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j)
        if (std::isfinite(lp.lower(j))) shift(j) = lp.lower(j);

    auto fill_row = [&](int r, const Eigen::RowVectorXd& row, double rhs) {
        for (int j = 0; j < n; ++j) {
            A(r, pos[j]) = row(j);
            if (neg[j] >= 0) A(r, neg[j]) = -row(j);
        }
        b(r) = rhs - row.dot(shift);
    };
    for (int i = 0; i < mu; ++i) {
        fill_row(i, lp.A_ub.row(i), lp.b_ub(i));
        A(i, nz + i) = 1.0;
    }
    for (int i = 0; i < me; ++i) fill_row(mu + i, lp.A_eq.row(i), lp.b_eq(i));

    // Inequality right-hand sides are relaxed by a small deterministic amount so
    // that the primal iterations are nondegenerate; the true right-hand side is
    // restored afterwards and any infeasibility is removed by dual simplex.
    Eigen::VectorXd b_pert = b;
    {
        std::mt19937_64 rng(0x5eed);
        std::uniform_real_distribution<double> unif(0.5, 1.0);
        for (int i = 0; i < mu; ++i) {
            const double scale = std::max(std::abs(b(i)), lp.A_ub.row(i).cwiseAbs().maxCoeff());
            b_pert(i) += kPerturbation * std::max(scale, 1e-300) * unif(rng);
        }
    }
    for (int i = 0; i < m; ++i) {
        if (b_pert(i) < 0.0) {
            A.row(i) *= -1.0;
            b(i) = -b(i);
            b_pert(i) = -b_pert(i);
        }
    }
    for (int j = 0; j < n; ++j) {
        cost(pos[j]) = lp.c(j);
        if (neg[j] >= 0) cost(neg[j]) = -lp.c(j);
    }
    shift_obj = lp.c.dot(shift);

    // Equilibration: unit max-norm rows, then unit max-norm columns.
    for (int i = 0; i < m; ++i) {
        const double r = A.row(i).cwiseAbs().maxCoeff();
        if (r > 0.0) {
            A.row(i) /= r;
            b(i) /= r;
            b_pert(i) /= r;
        }
    }
    Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(n_std);
    for (int j = 0; j < n_std; ++j) {
        const double s = A.col(j).cwiseAbs().maxCoeff();
        if (s > 0.0) {
            col_scale(j) = 1.0 / s;
            A.col(j) *= col_scale(j);
            cost(j) *= col_scale(j);
        }
    }

    LpSolution sol;
    const long cap = opt.max_iters >= 0 ? opt.max_iters : 10L * (m + n_std) * (m + n_std);

    Tableau tab(A, b_pert, opt.feas_tol, opt.opt_tol);
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n_std + m);
    phase1.tail(m).setOnes();
    tab.set_cost(phase1);
    long iters = 0;
    int rc = tab.run(iters, cap);
    sol.iterations = iters;
    if (rc == 2) {
        sol.status = LpStatus::IterationLimit;
        return sol;
    }
    const double bscale = 1.0 + (b_pert.size() ? b_pert.cwiseAbs().maxCoeff() : 0.0);
    if (tab.objective() > opt.feas_tol * bscale * std::max(1, m)) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }
    tab.purge_artificials();

    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n_std + m);
    phase2.head(n_std) = cost;
    tab.set_cost(phase2);
    rc = tab.run(iters, cap);
    sol.iterations = iters;
    if (rc == 2) {
        sol.status = LpStatus::IterationLimit;
        return sol;
    }
    if (rc == 1) {
        sol.status = LpStatus::Unbounded;
        return sol;
    }
    // Restore the true right-hand side; alternate dual and primal passes until
    // the basis is both primal and dual feasible.
    tab.set_rhs(b);
    for (int pass = 0;; ++pass) {
        rc = tab.dual_run(iters, cap);
        if (rc == 1) {
            sol.iterations = iters;
            sol.status = LpStatus::Infeasible;
            return sol;
        }
        const int rp = rc == 2 ? 2 : tab.run(iters, cap);
        sol.iterations = iters;
        if (rp == 2 || pass > 20) {
            sol.status = LpStatus::IterationLimit;
            return sol;
        }
        if (rp == 1) {
            sol.status = LpStatus::Unbounded;
            return sol;
        }
        if (tab.primal_feasible()) break;
    }

    const Eigen::VectorXd z = tab.primal().cwiseProduct(col_scale);
    sol.x.resize(n);
    for (int j = 0; j < n; ++j) {
        sol.x(j) = shift(j) + z(pos[j]);
        if (neg[j] >= 0) sol.x(j) -= z(neg[j]);
    }
    sol.status = LpStatus::Optimal;
    sol.objective = lp.c.dot(sol.x);
    (void)shift_obj;
    sol.max_violation = constraint_violation(lp, sol.x);
    sol.verified = sol.max_violation <= opt.verify_tol;
    return sol;
}

namespace {

std::string lp_name(const std::string& s) {
    std::string out;
    for (char ch : s) out.push_back((std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') ? ch : '_');
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out.insert(out.begin(), 'v');
    return out;
}

void write_expr(std::ostream& os, const Eigen::RowVectorXd& row, const std::vector<std::string>& names) {
    bool any = false;
    for (int j = 0; j < row.size(); ++j) {
        if (row(j) == 0.0) continue;
        os << (row(j) < 0.0 ? " - " : (any ? " + " : " ")) << std::abs(row(j)) << ' ' << lp_name(names[j]);
        any = true;
    }
    if (!any) os << " 0 " << lp_name(names.empty() ? std::string("x0") : names[0]);
}

}  // namespace

void write_lp(std::ostream& os, const DenseLp& lp) {
    os << std::setprecision(17);
    os << "\\ columns in order:";
    for (const auto& nm : lp.names) os << ' ' << lp_name(nm);
    os << "\nMinimize\n obj:";
    write_expr(os, lp.c.transpose(), lp.names);
    os << "\nSubject To\n";
    for (int i = 0; i < lp.n_ub(); ++i) {
        os << ' ' << lp_name(lp.row_names.at(i)) << ':';
        write_expr(os, lp.A_ub.row(i), lp.names);
        os << " <= " << lp.b_ub(i) << '\n';
    }
    for (int i = 0; i < lp.n_eq(); ++i) {
        os << ' ' << lp_name(lp.row_names.at(lp.n_ub() + i)) << ':';
        write_expr(os, lp.A_eq.row(i), lp.names);
        os << " = " << lp.b_eq(i) << '\n';
    }
    os << "Bounds\n";
    for (int j = 0; j < lp.n_vars(); ++j) {
        if (!std::isfinite(lp.lower(j)))
            os << ' ' << lp_name(lp.names[j]) << " free\n";
        else if (lp.lower(j) != 0.0)
            os << ' ' << lp_name(lp.names[j]) << " >= " << lp.lower(j) << '\n';
    }
    os << "End\n";
}

void write_lp_file(const std::string& path, const DenseLp& lp) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    write_lp(f, lp);
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace mpccert
