#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <json.hpp>

namespace mobo {

enum class KernelFamily { squared_exponential, matern52 };

const char* to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

struct KernelConfig {
    KernelFamily family = KernelFamily::squared_exponential;
    /// Number of PLS components; 0 means one length-scale per relaxed dimension.
    std::size_t n_pls = 0;
    /// Initial diagonal regularization; escalated on Cholesky failure.
    double nugget = 1e-10;
};

/// Training outputs (or inputs) carry no information to regress on.
class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The correlation matrix stayed numerically indefinite after the nugget
/// reached its ceiling.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// First h PLS weight vectors of the regression of y on X (NIPALS on centred,
/// unit-variance data). Returns a d x h matrix; h = 0 gives a d x 0 matrix.
/// Throws DegenerateDataError when y has zero variance or X is constant.
Eigen::MatrixXd fit_pls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t h);

struct FitOptions {
    std::size_t n_starts = 10;
    double log10_theta_min = -3.0;
    double log10_theta_max = 2.0;
    /// Likelihood evaluations per local polish; 0 selects 20 * (p + 1).
    std::size_t max_evals_per_start = 0;
    double max_nugget = 1e-4;
    /// Rows closer than this (Euclidean) are merged, keeping the first.
    double duplicate_tol = 1e-12;
};

struct FitDiagnostics {
    /// log10 of the reduced hyperparameters at each multistart initial point.
    std::vector<Eigen::VectorXd> start_points;
    std::vector<double> start_log_likelihood;
    double log_likelihood = 0.0;
    std::size_t likelihood_evals = 0;
    std::size_t merged_duplicates = 0;
};

/// Ordinary kriging with a constant trend over the relaxed design space.
///
/// Inputs and outputs are standardized internally. With n_pls = h > 0 the
/// per-dimension inverse length-scales are theta_eff[i] = sum_k theta[k] *
/// w[i,k]^2, where w are PLS weights, so only h hyperparameters are fitted.
/// Hyperparameters maximize the concentrated log marginal likelihood.
class SurrogateModel {
public:
    struct Prediction {
        double mean = 0.0;
        double variance = 0.0;
    };

    static SurrogateModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& config,
                              std::uint64_t seed, const FitOptions& options = {});

    Prediction predict(const Eigen::VectorXd& x) const;
    double predict_mean(const Eigen::VectorXd& x) const;
    /// Gradient of the predicted mean with respect to x.
    Eigen::VectorXd predict_gradient(const Eigen::VectorXd& x) const;
    /// Unclamped variance, exposed for invariant checks.
    double raw_variance(const Eigen::VectorXd& x) const;

    /// True when the outputs were constant: the model predicts that constant
    /// with zero variance everywhere.
    bool degenerate() const { return degenerate_; }
    std::size_t dimension() const { return static_cast<std::size_t>(x_mean_.size()); }
    std::size_t n_train() const { return static_cast<std::size_t>(X_.rows()); }
    /// Fitted hyperparameters: h values under KPLS, d' otherwise.
    const Eigen::VectorXd& theta() const { return theta_; }
    /// Per-dimension inverse squared length-scales in standardized units.
    const Eigen::VectorXd& effective_theta() const { return theta_eff_; }
    const Eigen::MatrixXd& pls_weights() const { return pls_weights_; }
    double process_variance() const { return sigma2_ * y_std_ * y_std_; }
    double trend() const { return y_mean_ + y_std_ * mu_; }
    double nugget() const { return nugget_; }
    double log_likelihood() const { return diagnostics_.log_likelihood; }
    const FitDiagnostics& diagnostics() const { return diagnostics_; }
    const KernelConfig& config() const { return config_; }
    const Eigen::MatrixXd& train_inputs() const { return X_; }
    const Eigen::VectorXd& train_outputs() const { return y_; }

    /// Versioned structured-text dump; from_json reproduces predictions
    /// exactly.
    nlohmann::json to_json() const;
    static SurrogateModel from_json(const nlohmann::json& doc);

private:
    void set_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
    void factorize(const Eigen::VectorXd& theta, double nugget);
    Eigen::VectorXd correlations(const Eigen::VectorXd& xn) const;

    KernelConfig config_;
    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;
    Eigen::VectorXd x_mean_, x_std_;
    double y_mean_ = 0.0, y_std_ = 1.0;
    Eigen::MatrixXd Xn_;
    Eigen::VectorXd yn_;
    Eigen::MatrixXd pls_weights_;
    Eigen::VectorXd theta_;
    Eigen::VectorXd theta_eff_;
    double nugget_ = 0.0;
    double mu_ = 0.0;
    double sigma2_ = 0.0;
    Eigen::MatrixXd chol_;  // lower factor
    Eigen::VectorXd gamma_;  // R^-1 (y - mu)
    Eigen::VectorXd ones_solved_;  // L^-1 1
    double ones_quad_ = 1.0;  // 1' R^-1 1
    bool degenerate_ = false;
    FitDiagnostics diagnostics_;
};

/// One independent model per objective and per constraint, all trained on
/// the same inputs.
struct MultiOutputSurrogate {
    std::vector<SurrogateModel> objectives;
    std::vector<SurrogateModel> constraints;

    static MultiOutputSurrogate fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                                    const KernelConfig& config, std::uint64_t seed, const FitOptions& options = {});

    void predict_objectives(const Eigen::VectorXd& x, Eigen::VectorXd& means, Eigen::VectorXd& sigmas) const;
    Eigen::VectorXd constraint_means(const Eigen::VectorXd& x) const;
};

}  // namespace mobo
