#include "mobo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "mobo/random.hpp"

namespace mobo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// E[(t - Y)^+] for Y ~ N(m, s^2); the antiderivative of P(Y <= t).
double expected_shortfall(double t, double m, double s) {
    if (t == -kInf) return 0.0;
    if (s <= 0.0) return std::max(0.0, t - m);
    const double z = (t - m) / s;
    return (t - m) * norm_cdf(z) + s * norm_pdf(z);
}

// P(Y < t).
double below(double t, double m, double s) {
    if (t == -kInf) return 0.0;
    if (t == kInf) return 1.0;
    if (s <= 0.0) return t > m ? 1.0 : 0.0;
    return norm_cdf((t - m) / s);
}

void check_inputs(const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas) {
    if (means.size() != sigmas.size()) throw std::invalid_argument("acquisition: means and sigmas differ in length");
    if ((sigmas.array() < 0.0).any()) throw std::invalid_argument("acquisition: negative sigma");
}

double ehvi_boxes(const NondominatedBoxes& boxes, const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas) {
    return std::max(0.0, boxes.integrate([&](std::size_t a, const std::vector<double>& t, std::vector<double>& g) {
        const auto i = static_cast<Eigen::Index>(a);
        for (std::size_t k = 0; k < t.size(); ++k) g[k] = expected_shortfall(t[k], means[i], sigmas[i]);
    }));
}

double pi_boxes(const NondominatedBoxes& boxes, const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas) {
    return std::clamp(boxes.integrate([&](std::size_t a, const std::vector<double>& t, std::vector<double>& g) {
        const auto i = static_cast<Eigen::Index>(a);
        for (std::size_t k = 0; k < t.size(); ++k) g[k] = below(t[k], means[i], sigmas[i]);
    }), 0.0, 1.0);
}

bool dominated_by(std::span<const ObjectiveVector> front, const Eigen::VectorXd& z) {
    for (const auto& p : front)
        if ((p.array() <= z.array()).all()) return true;
    return false;
}

// EHVI = integral over the nondominated part of (-inf, ref] of prod_i
// P(Y_i <= z_i) dz, estimated with uniform draws on a box that holds all but a
// negligible part of the integrand.
double ehvi_mc(const Eigen::MatrixXd& uniforms, const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas,
               std::span<const ObjectiveVector> front, const ObjectiveVector& ref) {
    const Eigen::Index n = means.size();
    Eigen::VectorXd lo = means - 8.0 * sigmas;
    for (const auto& p : front) lo = lo.cwiseMin(p);
    lo = lo.cwiseMin(ref);
    const Eigen::VectorXd width = ref - lo;
    const double volume = width.prod();
    if (!(volume > 0.0)) return 0.0;
    double acc = 0.0;
    Eigen::VectorXd z(n);
    for (Eigen::Index s = 0; s < uniforms.rows(); ++s) {
        z = lo + width.cwiseProduct(uniforms.row(s).transpose());
        if (dominated_by(front, z)) continue;
        double prod = 1.0;
        for (Eigen::Index i = 0; i < n && prod > 0.0; ++i)
            prod *= sigmas[i] > 0.0 ? norm_cdf((z[i] - means[i]) / sigmas[i]) : (means[i] <= z[i] ? 1.0 : 0.0);
        acc += prod;
    }
    return volume * acc / static_cast<double>(uniforms.rows());
}

double pi_mc(const Eigen::MatrixXd& normals, const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas,
             std::span<const ObjectiveVector> front) {
    std::size_t hits = 0;
    Eigen::VectorXd y(means.size());
    for (Eigen::Index s = 0; s < normals.rows(); ++s) {
        y = means + sigmas.cwiseProduct(normals.row(s).transpose());
        if (!dominated_by(front, y)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(normals.rows());
}

Eigen::MatrixXd draws(std::size_t samples, std::size_t n, std::uint64_t seed, bool gaussian) {
    Rng rng = make_rng(seed, gaussian ? 0xA1 : 0xA2);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(n));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index s = 0; s < out.rows(); ++s)
        for (Eigen::Index i = 0; i < out.cols(); ++i) out(s, i) = gaussian ? normal(rng) : unit(rng);
    return out;
}

}  // namespace

const char* to_string(Criterion c) {
    switch (c) {
    case Criterion::ehvi: return "ehvi";
    case Criterion::pi: return "pi";
    case Criterion::mpi: return "mpi";
    }
    return "?";
}

const char* to_string(Regularization r) {
    switch (r) {
    case Regularization::none: return "none";
    case Regularization::max: return "max";
    case Regularization::sum: return "sum";
    }
    return "?";
}

Criterion criterion_from_string(const std::string& name) {
    if (name == "ehvi") return Criterion::ehvi;
    if (name == "pi") return Criterion::pi;
    if (name == "mpi") return Criterion::mpi;
    throw std::invalid_argument("unknown acquisition criterion '" + name + "'");
}

Regularization regularization_from_string(const std::string& name) {
    if (name == "none") return Regularization::none;
    if (name == "max") return Regularization::max;
    if (name == "sum") return Regularization::sum;
    throw std::invalid_argument("unknown regularization '" + name + "'");
}

Standardizer Standardizer::identity(std::size_t n) {
    return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))};
}

Standardizer Standardizer::fit(std::span<const ObjectiveVector> points) {
    if (points.empty()) throw std::invalid_argument("Standardizer::fit: no points");
    const Eigen::Index n = points.front().size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    Eigen::VectorXd var = Eigen::VectorXd::Zero(n);
    for (const auto& p : points) var += (p - mean).cwiseAbs2();
    var /= static_cast<double>(points.size());
    Eigen::VectorXd scale = var.cwiseSqrt();
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(scale[i] > 1e-12 * std::max(1.0, std::abs(mean[i])))) scale[i] = 1.0;
    return {mean, scale};
}

ObjectiveVector Standardizer::apply(const ObjectiveVector& v) const { return (v - shift).cwiseQuotient(scale); }

Eigen::VectorXd Standardizer::apply_sigma(const Eigen::VectorXd& s) const { return s.cwiseQuotient(scale); }

double ehvi(const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas, std::span<const ObjectiveVector> front,
            const ObjectiveVector& ref, const AcquisitionConfig& config) {
    check_inputs(means, sigmas);
    if (auto boxes = NondominatedBoxes::build(front, ref, config.max_boxes)) return ehvi_boxes(*boxes, means, sigmas);
    return ehvi_mc(draws(config.mc_samples, static_cast<std::size_t>(means.size()), config.seed, false), means, sigmas,
                   front, ref);
}

double pi(const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas, std::span<const ObjectiveVector> front,
          const AcquisitionConfig& config) {
    check_inputs(means, sigmas);
    if (front.empty()) return 1.0;
    const Eigen::VectorXd upper = Eigen::VectorXd::Constant(means.size(), kInf);
    if (auto boxes = NondominatedBoxes::build(front, upper, config.max_boxes)) return pi_boxes(*boxes, means, sigmas);
    return pi_mc(draws(config.mc_samples, static_cast<std::size_t>(means.size()), config.seed, true), means, sigmas, front);
}

double mpi(const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas, std::span<const ObjectiveVector> front) {
    check_inputs(means, sigmas);
    double best = 1.0;
    for (const auto& y : front) {
        if (y.size() != means.size()) throw std::invalid_argument("mpi: dimension mismatch");
        double prod = 1.0;
        for (Eigen::Index i = 0; i < means.size(); ++i) {
            const double diff = y[i] - means[i];
            prod *= sigmas[i] > 0.0 ? norm_cdf(diff / sigmas[i]) : (diff > 0.0 ? 1.0 : diff < 0.0 ? 0.0 : 0.5);
        }
        best = std::min(best, prod);
    }
    return best;
}

double scalarize(Regularization reg, const Eigen::VectorXd& standardized_means) {
    switch (reg) {
    case Regularization::none: return 0.0;
    case Regularization::max: return standardized_means.size() ? standardized_means.maxCoeff() : 0.0;
    case Regularization::sum: return standardized_means.sum();
    }
    return 0.0;
}

double regularized(const AcquisitionConfig& config, const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas,
                   std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                   const std::optional<Standardizer>& standardizer) {
    Acquisition acq(config, std::vector<ObjectiveVector>(front.begin(), front.end()), ref, standardizer);
    return acq(means, sigmas);
}

Acquisition::Acquisition(AcquisitionConfig config, std::vector<ObjectiveVector> front, ObjectiveVector ref,
                         std::optional<Standardizer> standardizer)
    : config_(config), front_(std::move(front)), ref_(std::move(ref)), standardizer_(std::move(standardizer)) {
    if (!(config_.gamma > 0.0)) throw std::invalid_argument("acquisition: gamma must be positive");
    const auto n = static_cast<std::size_t>(ref_.size());
    if (config_.criterion == Criterion::ehvi) {
        hv_boxes_ = NondominatedBoxes::build(front_, ref_, config_.max_boxes);
        if (!hv_boxes_) normals_ = draws(config_.mc_samples, n, config_.seed, false);
    } else if (config_.criterion == Criterion::pi && !front_.empty()) {
        pi_boxes_ = NondominatedBoxes::build(front_, Eigen::VectorXd::Constant(ref_.size(), kInf), config_.max_boxes);
        if (!pi_boxes_) normals_ = draws(config_.mc_samples, n, config_.seed, true);
    }
}

double Acquisition::criterion(const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas) const {
    check_inputs(means, sigmas);
    switch (config_.criterion) {
    case Criterion::ehvi:
        return hv_boxes_ ? ehvi_boxes(*hv_boxes_, means, sigmas) : ehvi_mc(normals_, means, sigmas, front_, ref_);
    case Criterion::pi:
        if (front_.empty()) return 1.0;
        return pi_boxes_ ? pi_boxes(*pi_boxes_, means, sigmas) : pi_mc(normals_, means, sigmas, front_);
    case Criterion::mpi: return mpi(means, sigmas, front_);
    }
    return 0.0;
}

double Acquisition::operator()(const Eigen::VectorXd& means, const Eigen::VectorXd& sigmas) const {
    const double alpha = criterion(means, sigmas);
    if (config_.reg == Regularization::none) return config_.gamma * alpha;
    const Eigen::VectorXd sm = standardizer_ ? standardizer_->apply(means) : means;
    return config_.gamma * alpha - scalarize(config_.reg, sm);
}

}  // namespace mobo
