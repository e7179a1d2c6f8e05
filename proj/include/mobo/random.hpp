#pragma once

#include <cstdint>
#include <random>

namespace mobo {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent, reproducible seeds for
/// sub-streams (per iteration, per model, per multistart) from one run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(mix_seed(seed, stream));
}

}  // namespace mobo

#include <Eigen/Core>
#include <algorithm>
#include <numeric>
#include <vector>

namespace mobo {

/// n x dim Latin hypercube in the unit box: each column has exactly one
/// sample in each of the n equal-width bins.
inline Eigen::MatrixXd lhs_unit(std::size_t n, std::size_t dim, Rng& rng) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 0; j < dim; ++j) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < n; ++i)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (static_cast<double>(perm[i]) + unit(rng)) / static_cast<double>(n);
    }
    return out;
}

}  // namespace mobo
