#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "mobo/design_space.hpp"

namespace mobo {

/// Maximize an acquisition over the relaxed box subject to surrogate-mean
/// constraints g(x) <= 0.
struct InfillProblem {
    std::function<double(const Eigen::VectorXd&)> acquisition;
    /// Optional; returns the predicted constraint means.
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> constraints;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    /// When set, space-filling starts are drawn in the design space and
    /// encoded, otherwise in the raw box.
    const DesignSpace* space = nullptr;
    /// Relaxed coordinates of current nondominated archive points.
    std::vector<Eigen::VectorXd> archive_points;
};

struct InfillOptions {
    std::size_t n_starts = 20;
    /// How many of the starts perturb archive points (the rest are LHS).
    std::size_t n_archive_starts = 5;
    /// Gaussian perturbation of archive starts, as a fraction of box width.
    double perturbation = 0.05;
    /// Per-start evaluation cap; 0 selects 30 * (d' + 1).
    std::size_t max_evals_per_start = 0;
    double constraint_tol = 1e-6;
    double rho_begin = 0.1;
    double rho_end = 1e-5;
};

struct InfillStart {
    Eigen::VectorXd start;
    Eigen::VectorXd x;
    double value = 0.0;
    double violation = 0.0;
    bool feasible = false;
};

struct InfillResult {
    Eigen::VectorXd x;
    double value = 0.0;
    bool feasible = false;
    double violation = 0.0;
    std::vector<InfillStart> starts;
};

/// Multistart constrained local search. Returns the best start whose
/// constraints all satisfy g_j <= constraint_tol (ties to the lowest start
/// index); when none does, the start with the smallest total violation.
InfillResult solve_infill(const InfillProblem& problem, const InfillOptions& options, std::uint64_t seed);

struct DedupResult {
    Eigen::VectorXd x;
    bool replaced = false;
    /// Every candidate considered collided with an evaluated point.
    bool exhausted = false;
};

/// Replaces a candidate whose decoded point was already evaluated. Draws 100
/// seeded LHS points and keeps the non-colliding one farthest (max-min
/// relaxed distance) from the evaluated set, preferring points accepted by
/// `feasible`. Finite spaces with no free draw are enumerated before giving
/// up with `exhausted`.
DedupResult dedup_guard(const DesignSpace& space, const Eigen::VectorXd& candidate,
                        const std::vector<MixedPoint>& evaluated, std::uint64_t seed,
                        const std::function<bool(const Eigen::VectorXd&)>& feasible = {});

}  // namespace mobo
