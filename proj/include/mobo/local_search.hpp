#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

namespace mobo::optim {

/// Objective and inequality constraint values at one point; constraints are
/// satisfied when every entry is <= 0.
struct Evaluation {
    double objective = 0.0;
    Eigen::VectorXd constraints;
};

using EvaluationFn = std::function<Evaluation(const Eigen::VectorXd&)>;

struct BoxProblem {
    EvaluationFn evaluate;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

struct LocalSearchOptions {
    /// Trust-region radii, expressed as fractions of each box width.
    double rho_begin = 0.1;
    double rho_end = 1e-5;
    std::size_t max_evals = 500;
    /// Total violation below which a point counts as feasible.
    double feasibility_tol = 1e-6;
};

struct LocalSearchResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    Eigen::VectorXd constraints;
    double violation = 0.0;
    bool feasible = false;
    std::size_t evals = 0;
};

/// Sum of positive constraint parts.
double violation(const Eigen::VectorXd& constraints);

/// Derivative-free minimization by linear approximations in a trust region,
/// in the manner of Powell's COBYLA.
///
/// The objective and every constraint are modelled by linear interpolation on
/// a simplex of n+1 points. Each step moves a distance rho from the best
/// vertex: along the descent direction of the linearized violation while the
/// best point is infeasible, otherwise along the objective descent direction
/// projected so that no nearly active linearized constraint increases. Box
/// bounds are enforced by projection. When a step does not improve the best
/// point the radius shrinks and the simplex is rebuilt. Points are ranked
/// feasibility first: lower violation wins until both are feasible, then the
/// lower objective wins.
LocalSearchResult minimize(const BoxProblem& problem, const Eigen::VectorXd& x0, const LocalSearchOptions& options = {});

}  // namespace mobo::optim
