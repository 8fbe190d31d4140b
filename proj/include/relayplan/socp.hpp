#ifndef RELAYPLAN_SOCP_HPP
#define RELAYPLAN_SOCP_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace relayplan
{

/// Second-order cone constraint ||A x + b|| <= c.x + d.
struct SocConstraint
{
    Eigen::SparseMatrix<double> a;
    Eigen::VectorXd b;
    Eigen::SparseVector<double> c;
    double d = 0.0;
};

/// Convex quadratic constraint x'Qx + q'x <= r with Q positive semidefinite.
struct QuadConstraint
{
    Eigen::SparseMatrix<double> q_mat;
    Eigen::SparseVector<double> q_vec;
    double r = 0.0;
};

/// Linear objective over linear equalities, linear inequalities, second-order
/// cones and convex quadratic inequalities. Quadratics are rotated into cones
/// inside the solver, so one code path serves both.
struct ConeProgram
{
    int num_vars = 0;
    Eigen::VectorXd objective; //!< maximized

    Eigen::SparseMatrix<double> eq_a; //!< eq_a x = eq_b
    Eigen::VectorXd eq_b;
    Eigen::SparseMatrix<double> ineq_a; //!< ineq_a x <= ineq_b
    Eigen::VectorXd ineq_b;
    std::vector<SocConstraint> socs;
    std::vector<QuadConstraint> quads;

    /// Checks dimension consistency and positive semidefiniteness of every
    /// quadratic (smallest eigenvalue >= -1e-8 relative). Throws
    /// std::invalid_argument naming the offending block.
    void validate() const;
};

enum class SolveStatus
{
    optimal,
    infeasible,
    max_iter,
    numerical_failure,
};

struct Solution
{
    SolveStatus status = SolveStatus::numerical_failure;
    Eigen::VectorXd x;
    double objective = 0.0;
    double max_violation = 0.0;
    int iterations = 0;
    std::vector<double> infeasibility_log; //!< residual norm per iteration
    std::string diagnostic;
};

/// Primal-dual interior-point solve over the homogeneous self-dual embedding.
/// Deterministic given identical inputs. tol bounds the scaled primal/dual
/// residuals and the relative duality gap at an optimal exit.
Solution solve(const ConeProgram& p, double tol = 1e-8, int max_iters = 100);

/// Independent feasibility verifier: re-evaluates every constraint of p at x
/// and returns the largest scaled violation. Shares no code with the solver
/// internals.
double max_violation(const ConeProgram& p, const Eigen::VectorXd& x);

/// Human-readable text form, one constraint per line, for external
/// cross-checking.
std::string dump(const ConeProgram& p);

} // namespace relayplan

#endif
