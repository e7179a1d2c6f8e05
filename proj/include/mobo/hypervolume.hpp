#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mobo/pareto.hpp"

namespace mobo {

struct HypervolumeOptions {
    std::size_t mc_samples = 200000;
    std::uint64_t seed = 0x5eed;
};

struct HypervolumeResult {
    double value = 0.0;
    /// Zero for the exact two- and three-objective paths.
    double std_error = 0.0;
};

/// Volume dominated by `front` and bounded above by `ref`. Exact sweep for two
/// objectives, exact slicing for three, seeded Monte-Carlo for four or more.
/// Points that do not strictly dominate `ref` contribute nothing. Throws
/// std::invalid_argument for zero objectives.
HypervolumeResult hypervolume(std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                              const HypervolumeOptions& options = {});

/// HV(front + candidate) - HV(front), computed exactly for any number of
/// objectives through the box decomposition below.
double hypervolume_improvement(std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                               const ObjectiveVector& candidate);

/// Partition of the region not weakly dominated by a front, bounded above by
/// `upper` (entries may be +inf), into axis-aligned boxes.
///
/// Every axis but the last is cut at the front's coordinates; each resulting
/// column holds one box reaching from -inf up to the lowest last-axis value of
/// the points that dominate the column's lower corner. Boxes that touch and
/// agree on every other axis are then fused. Boxes are stored as
/// index pairs into per-axis coordinate lists so that any separable integrand
/// can be summed as sum_boxes prod_axes (G_a(hi) - G_a(lo)), where G_a is an
/// antiderivative along axis a.
class NondominatedBoxes {
public:
    /// Returns nullopt when the decomposition would exceed `max_boxes`.
    static std::optional<NondominatedBoxes> build(std::span<const ObjectiveVector> front, const Eigen::VectorXd& upper,
                                                  std::size_t max_boxes = 100000);

    std::size_t dimension() const { return coords_.size(); }
    std::size_t size() const { return n_boxes_; }
    /// Sorted cut coordinates of axis a: -inf first, upper[a] last.
    const std::vector<double>& coordinates(std::size_t a) const { return coords_[a]; }

    /// Sum over boxes of the product over axes of G(a, hi) - G(a, lo), where
    /// `antiderivative(a, values)` fills G at every coordinate of axis a.
    template <class Antiderivative>
    double integrate(Antiderivative&& antiderivative) const {
        const std::size_t n = coords_.size();
        std::vector<std::vector<double>> g(n);
        for (std::size_t a = 0; a < n; ++a) {
            g[a].resize(coords_[a].size());
            antiderivative(a, coords_[a], g[a]);
        }
        double total = 0.0;
        for (std::size_t b = 0; b < n_boxes_; ++b) {
            double prod = 1.0;
            const std::uint32_t* lo = &lo_[b * n];
            const std::uint32_t* hi = &hi_[b * n];
            for (std::size_t a = 0; a < n && prod != 0.0; ++a) prod *= g[a][hi[a]] - g[a][lo[a]];
            total += prod;
        }
        return total;
    }

private:
    void merge();

    std::vector<std::vector<double>> coords_;
    std::vector<std::uint32_t> lo_;
    std::vector<std::uint32_t> hi_;
    std::size_t n_boxes_ = 0;
};

}  // namespace mobo
