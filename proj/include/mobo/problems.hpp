#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mobo/design_space.hpp"
#include "mobo/nsga2.hpp"
#include "mobo/pareto.hpp"

namespace mobo {

enum class FrontKind { none, analytic, enumerable };

/// Analytic bi- and multi-objective test problems. Evaluators return
/// objectives in their native sense; `maximize` flags the ones to maximize.
struct BenchmarkProblem {
    std::string name;
    std::string description;
    DesignSpace space;
    std::size_t n_objectives = 2;
    std::size_t n_constraints = 0;
    std::vector<bool> maximize;
    MixedEvaluator evaluate;
    FrontKind front = FrontKind::none;
    /// Analytic fronts only: `n` points spread along the true front, in
    /// minimization form.
    std::function<std::vector<ObjectiveVector>(std::size_t n)> sample_front;
};

/// Objective vector of `problem` at `p` with maximized objectives negated.
ObjectiveVector minimization_objectives(const BenchmarkProblem& problem, const ObjectiveVector& f);

BenchmarkProblem zdt1(std::size_t dim = 5);
BenchmarkProblem bnh();
/// Minimizes f1 = x1 and f2 = (1 - x1)^2 + x2^2 on [0, 1]^2; the front is
/// f2 = (1 - f1)^2.
BenchmarkProblem convex_quad();
BenchmarkProblem mixed_retrofit_toy();
BenchmarkProblem mixed_family_toy();
/// Supply-chain toy with `sites` production sites per component and the given
/// material/process level counts for skin, spar, stringer and rib.
BenchmarkProblem cat_supply_toy(std::size_t sites = 21, std::vector<std::size_t> processes = {6, 5, 4, 5});
/// 4 sites and 2 processes per component: 4096 configurations.
BenchmarkProblem cat_supply_toy_small();

std::vector<std::string> problem_names();
/// Throws std::out_of_range for unknown names.
BenchmarkProblem make_problem(const std::string& name);

/// Feasible nondominated set (minimization form) of a finite problem found by
/// exhaustive enumeration. Empty optional if the space is not finite or has
/// more than `limit` configurations.
std::optional<ParetoArchive> enumerate_front(const BenchmarkProblem& problem, std::uint64_t limit = 1'000'000);

/// Smallest Euclidean distance from `f` to the sampled front.
double distance_to_front(const ObjectiveVector& f, const std::vector<ObjectiveVector>& front);

}  // namespace mobo
