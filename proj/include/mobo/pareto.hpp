#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mobo/design_space.hpp"

namespace mobo {

/// Objective values under the minimization convention.
using ObjectiveVector = Eigen::VectorXd;

/// Weak dominance: a_i <= b_i for every objective (so a dominates itself).
/// Throws std::invalid_argument on length mismatch.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Weak dominance by a distinct vector, i.e. Pareto dominance.
bool strictly_dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Indices of the vectors not dominated by any distinct vector. Among
/// identical vectors only the first occurrence is kept.
std::vector<std::size_t> nondominated_filter(std::span<const ObjectiveVector> points);

/// b tolerance-dominates a when b_i <= a_i + tol_i for every i and
/// b_j < a_j - tol_j for some j.
bool tolerance_dominates(const ObjectiveVector& b, const ObjectiveVector& a, const Eigen::VectorXd& tol);

/// Greedy thinning under tolerance dominance: points are visited by
/// increasing sum of a_i / tol_i and kept unless a kept point
/// tolerance-dominates them. Returns kept indices in input order; never empty
/// for nonempty input.
std::vector<std::size_t> tolerance_filter(std::span<const ObjectiveVector> points, const Eigen::VectorXd& tol);

/// Componentwise max of `points` plus 10% of the componentwise range plus
/// 1e-6, so every point strictly dominates the result.
ObjectiveVector reference_point(std::span<const ObjectiveVector> points);

struct ArchiveEntry {
    std::size_t id = 0;
    MixedPoint point;
    ObjectiveVector f;
    Eigen::VectorXd g;
    bool feasible = true;
};

/// Evaluated points with feasibility flags and the nondominated subset of the
/// feasible ones.
class ParetoArchive {
public:
    ParetoArchive() = default;
    explicit ParetoArchive(std::size_t n_objectives) : n_objectives_(n_objectives) {}

    void add(ArchiveEntry entry);

    std::size_t n_objectives() const { return n_objectives_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<ArchiveEntry>& entries() const { return entries_; }
    /// Indices (into entries()) of the nondominated feasible entries, in
    /// insertion order.
    const std::vector<std::size_t>& front_indices() const { return front_; }
    std::vector<ObjectiveVector> front() const;
    std::vector<ObjectiveVector> feasible_objectives() const;
    bool on_front(std::size_t index) const;

    /// Reference-point policy: reference_point() over the feasible entries,
    /// or over all entries while none is feasible.
    ObjectiveVector reference_point() const;

private:
    void refresh_front();

    std::size_t n_objectives_ = 0;
    std::vector<ArchiveEntry> entries_;
    std::vector<std::size_t> front_;
};

/// Writes `point_id,f1..fn,g1..gm,feasible,on_front`.
void write_front_csv(std::ostream& os, const ParetoArchive& archive, std::size_t n_constraints);

}  // namespace mobo
