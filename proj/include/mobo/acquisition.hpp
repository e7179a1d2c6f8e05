#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mobo/hypervolume.hpp"
#include "mobo/pareto.hpp"

namespace mobo {

enum class Criterion { ehvi, pi, mpi };
enum class Regularization { none, max, sum };

const char* to_string(Criterion c);
const char* to_string(Regularization r);
Criterion criterion_from_string(const std::string& name);
Regularization regularization_from_string(const std::string& name);

struct AcquisitionConfig {
    Criterion criterion = Criterion::ehvi;
    Regularization reg = Regularization::none;
    /// Weight of the criterion against the scalarized means; must be > 0.
    double gamma = 1.0;
    /// Seed for the Monte-Carlo fallbacks.
    std::uint64_t seed = 0;
    std::size_t mc_samples = 10000;
    /// Box count above which the exact paths fall back to Monte-Carlo.
    std::size_t max_boxes = 100000;
};

/// Per-objective affine map used before scalarizing predicted means.
struct Standardizer {
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;

    static Standardizer identity(std::size_t n);
    /// Mean and (population) standard deviation of `points`; a zero spread
    /// maps to scale 1.
    static Standardizer fit(std::span<const ObjectiveVector> points);

    ObjectiveVector apply(const ObjectiveVector& v) const;
    Eigen::VectorXd apply_sigma(const Eigen::VectorXd& s) const;
};

/// Expected hypervolume improvement of a candidate with independent Gaussian
/// objectives N(means_i, sigmas_i^2). Exact through NondominatedBoxes; falls
/// back to seeded Monte-Carlo when the decomposition is too large. With an
/// empty front this is the expected volume dominated up to `ref`.
double ehvi(const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas, std::span<const ObjectiveVector> front,
            const ObjectiveVector& ref, const AcquisitionConfig& config = {});

/// Probability that the candidate is not weakly dominated by any front member.
double pi(const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas, std::span<const ObjectiveVector> front,
          const AcquisitionConfig& config = {});

/// Minimum over front members y of prod_i Phi((y_i - means_i) / sigmas_i).
/// 1 for an empty front.
double mpi(const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas, std::span<const ObjectiveVector> front);

/// psi(means): max or sum of the (already standardized) means; 0 for none.
double scalarize(Regularization reg, const Eigen::VectorXd& standardized_means);

/// gamma * criterion - psi(standardizer(means)).
double regularized(const AcquisitionConfig& config, const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas,
                   std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                   const std::optional<Standardizer>& standardizer = std::nullopt);

/// The regularized acquisition for a fixed archive snapshot. Caches the box
/// decompositions so repeated evaluation inside the infill search is cheap.
/// Means passed to operator() are standardized before scalarization.
class Acquisition {
public:
    Acquisition(AcquisitionConfig config, std::vector<ObjectiveVector> front, ObjectiveVector ref,
                std::optional<Standardizer> standardizer = std::nullopt);

    double criterion(const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas) const;
    double operator()(const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas) const;

    const AcquisitionConfig& config() const { return config_; }
    const std::vector<ObjectiveVector>& front() const { return front_; }
    const ObjectiveVector& reference() const { return ref_; }

private:
    AcquisitionConfig config_;
    std::vector<ObjectiveVector> front_;
    ObjectiveVector ref_;
    std::optional<Standardizer> standardizer_;
    std::optional<NondominatedBoxes> hv_boxes_;
    std::optional<NondominatedBoxes> pi_boxes_;
    Eigen::MatrixXd normals_;  // shared Monte-Carlo draws
};

}  // namespace mobo
