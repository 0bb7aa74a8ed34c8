#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace mpccert {

/// min c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= lower.
/// A lower bound of -inf makes the variable free.
struct DenseLp {
    Eigen::VectorXd c;
    Eigen::MatrixXd A_ub;
    Eigen::VectorXd b_ub;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
    Eigen::VectorXd lower;
    std::vector<std::string> names;
    std::vector<std::string> row_names;  // inequality rows first, then equality rows

    explicit DenseLp(int n_vars = 0);

    [[nodiscard]] int n_vars() const { return static_cast<int>(c.size()); }
    [[nodiscard]] int n_ub() const { return static_cast<int>(A_ub.rows()); }
    [[nodiscard]] int n_eq() const { return static_cast<int>(A_eq.rows()); }

    /// Appends a row and returns its index within its block.
    int add_le(const Eigen::RowVectorXd& row, double rhs, std::string name = {});
    int add_eq(const Eigen::RowVectorXd& row, double rhs, std::string name = {});

    /// Throws std::invalid_argument on dimension mismatch or non-finite data.
    void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus s);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    Eigen::VectorXd x;
    long iterations = 0;
    double max_violation = 0.0;  // constraint violation of x, filled for Optimal
    bool verified = false;
};

struct SimplexOptions {
    long max_iters = -1;          // -1: 10 (rows + cols)^2
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    double verify_tol = 1e-8;
};

[[nodiscard]] LpSolution solve_lp(const DenseLp& lp, const SimplexOptions& opt = {});
[[nodiscard]] LpSolution solve_lp(const DenseLp& lp, long max_iters);

/// Largest scaled violation of the constraint system at x.
[[nodiscard]] double constraint_violation(const DenseLp& lp, const Eigen::VectorXd& x);

/// Plain-text CPLEX LP format. Columns appear in variable order.
void write_lp(std::ostream& os, const DenseLp& lp);
void write_lp_file(const std::string& path, const DenseLp& lp);

}  // namespace mpccert
