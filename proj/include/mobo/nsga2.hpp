#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mobo/design_space.hpp"
#include "mobo/pareto.hpp"

namespace mobo {

struct Nsga2Config {
    std::size_t population = 100;
    std::size_t generations = 200;
    double crossover_prob = 0.9;
    double crossover_eta = 15.0;
    /// Per-coordinate mutation probability; a negative value selects 1/d'.
    double mutation_prob = -1.0;
    double mutation_eta = 20.0;
    std::uint64_t seed = 0;
};

/// Objective (minimization) and constraint (<= 0) values of one point.
struct PointEvaluation {
    ObjectiveVector f;
    Eigen::VectorXd g;
};

using MixedEvaluator = std::function<PointEvaluation(const MixedPoint&)>;

/// Ranked fronts under Pareto dominance. Identical vectors share a rank, so
/// front 0 equals nondominated_filter() plus any later duplicates of its
/// members.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectiveVector> points);

/// Same ranking under constrained domination: a feasible point beats an
/// infeasible one, two infeasible points compare by total violation.
std::vector<std::vector<std::size_t>> constrained_nondominated_sort(std::span<const ObjectiveVector> points,
                                                                    std::span<const double> violations);

/// Crowding distance of each member of one front: boundary points get +inf,
/// interior points the sum over objectives of the normalized gap between
/// their neighbours. Repeats of a vector get 0; the first occurrence keeps
/// the distance computed on the distinct vectors.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

struct Nsga2Individual {
    Eigen::VectorXd genome;  // relaxed coordinates
    MixedPoint point;
    ObjectiveVector f;
    Eigen::VectorXd g;
    double violation = 0.0;
    std::size_t rank = 0;
    double crowding = 0.0;
};

using GenerationCallback = std::function<void(std::size_t generation, const std::vector<Nsga2Individual>& population)>;

/// NSGA-II over the relaxed space: binary tournament on (rank, crowding), SBX
/// crossover and polynomial mutation, decoding before every evaluation.
/// Returns the nondominated feasible members of the final population.
ParetoArchive evolve(const MixedEvaluator& evaluate, const DesignSpace& space, const Nsga2Config& config,
                     const GenerationCallback& on_generation = {});

}  // namespace mobo
