#include "mobo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mobo/local_search.hpp"
#include "mobo/random.hpp"

namespace mobo {

const char* to_string(KernelFamily family) {
    return family == KernelFamily::matern52 ? "matern52" : "squared_exponential";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "squared_exponential" || name == "se" || name == "sqexp") return KernelFamily::squared_exponential;
    if (name == "matern52" || name == "matern-5/2" || name == "matern") return KernelFamily::matern52;
    throw std::invalid_argument("unknown kernel family '" + name + "'");
}

namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873;

// Correlation as a function of the weighted squared distance.
inline double kernel_of(KernelFamily family, double dist2) {
    if (family == KernelFamily::squared_exponential) return std::exp(-dist2);
    const double s = std::sqrt(dist2);
    return (1.0 + kSqrt5 * s + 5.0 / 3.0 * dist2) * std::exp(-kSqrt5 * s);
}

// d k / d (x_k) = factor * theta_k * (x_k - x'_k).
inline double kernel_grad_factor(KernelFamily family, double dist2) {
    if (family == KernelFamily::squared_exponential) return -2.0 * std::exp(-dist2);
    const double s = std::sqrt(dist2);
    return -5.0 / 3.0 * (1.0 + kSqrt5 * s) * std::exp(-kSqrt5 * s);
}

struct Factorization {
    bool ok = false;
    double nugget = 0.0;
    Eigen::MatrixXd L;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    double mu = 0.0;
    double sigma2 = 0.0;
    Eigen::VectorXd gamma;
    Eigen::VectorXd ones_solved;
    double ones_quad = 1.0;
};

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& Xn, const Eigen::VectorXd& theta_eff, KernelFamily family) {
    const Eigen::Index n = Xn.rows();
    const Eigen::MatrixXd Z = Xn * theta_eff.cwiseSqrt().asDiagonal();
    const Eigen::VectorXd sq = Z.rowwise().squaredNorm();
    Eigen::MatrixXd R(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        R(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double d2 = std::max(0.0, sq[i] + sq[j] - 2.0 * Z.row(i).dot(Z.row(j)));
            R(i, j) = R(j, i) = kernel_of(family, d2);
        }
    }
    return R;
}

Factorization factor(const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yn, const Eigen::VectorXd& theta_eff,
                     KernelFamily family, double nugget0, double max_nugget) {
    Factorization f;
    const Eigen::Index n = Xn.rows();
    const Eigen::MatrixXd R0 = correlation_matrix(Xn, theta_eff, family);
    for (double nugget = nugget0; nugget <= max_nugget * (1.0 + 1e-9); nugget *= 10.0) {
        Eigen::MatrixXd R = R0;
        R.diagonal().array() += nugget;
        Eigen::LLT<Eigen::MatrixXd> llt(R);
        if (llt.info() != Eigen::Success) continue;
        Eigen::MatrixXd L = llt.matrixL();
        // Pivots below the nugget mean round-off has destroyed definiteness.
        if (!L.allFinite() || (L.diagonal().array().square() < 0.5 * nugget).any()) continue;
        f.ok = true;
        f.nugget = nugget;
        f.L = std::move(L);
        break;
    }
    if (!f.ok) return f;
    const auto tri = f.L.triangularView<Eigen::Lower>();
    f.ones_solved = tri.solve(Eigen::VectorXd::Ones(n));
    const Eigen::VectorXd ys = tri.solve(yn);
    f.ones_quad = f.ones_solved.squaredNorm();
    f.mu = f.ones_solved.dot(ys) / f.ones_quad;
    const Eigen::VectorXd rs = ys - f.mu * f.ones_solved;  // L^-1 (y - mu 1)
    f.sigma2 = std::max(rs.squaredNorm() / static_cast<double>(n), 1e-300);
    f.gamma = f.L.transpose().triangularView<Eigen::Upper>().solve(rs);
    const double logdet = 2.0 * f.L.diagonal().array().log().sum();
    f.log_likelihood =
        -0.5 * static_cast<double>(n) * (std::log(2.0 * std::numbers::pi * f.sigma2) + 1.0) - 0.5 * logdet;
    return f;
}

Eigen::VectorXd kpls_theta(const Eigen::VectorXd& theta, const Eigen::MatrixXd& weights) {
    if (weights.cols() == 0) return theta;
    return weights.array().square().matrix() * theta;
}

}  // namespace

Eigen::MatrixXd fit_pls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t h) {
    const Eigen::Index d = X.cols();
    const Eigen::Index n = X.rows();
    if (y.size() != n) throw std::invalid_argument("fit_pls: X and y row counts differ");
    if (h == 0) return Eigen::MatrixXd(d, 0);
    if (static_cast<Eigen::Index>(h) > d) throw std::invalid_argument("fit_pls: more components than dimensions");
    if (n < static_cast<Eigen::Index>(h) + 1) throw std::invalid_argument("fit_pls: need at least h + 1 samples");

    const double y_mean = y.mean();
    const double y_std = std::sqrt((y.array() - y_mean).square().sum() / static_cast<double>(n));
    if (!(y_std > 1e-14 * std::max(1.0, std::abs(y_mean)))) throw DegenerateDataError("fit_pls: outputs have zero variance");

    Eigen::MatrixXd Xk = X.rowwise() - X.colwise().mean();
    bool any_varying = false;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double s = std::sqrt(Xk.col(j).squaredNorm() / static_cast<double>(n));
        if (s > 1e-14) {
            Xk.col(j) /= s;
            any_varying = true;
        } else {
            Xk.col(j).setZero();
        }
    }
    if (!any_varying) throw DegenerateDataError("fit_pls: every input column is constant");
    Eigen::VectorXd yk = (y.array() - y_mean).matrix() / y_std;

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(h));
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(h); ++k) {
        Eigen::VectorXd w = Xk.transpose() * yk;
        const double nw = w.norm();
        if (nw < 1e-12) break;  // outputs fully explained; remaining weights stay zero
        w /= nw;
        const Eigen::VectorXd t = Xk * w;
        const double tt = t.squaredNorm();
        if (tt < 1e-300) break;
        const Eigen::VectorXd p = Xk.transpose() * t / tt;
        const double c = yk.dot(t) / tt;
        Xk -= t * p.transpose();
        yk -= c * t;
        W.col(k) = w;
    }
    return W;
}

void SurrogateModel::set_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    X_ = X;
    y_ = y;
    const Eigen::Index n = X.rows();
    x_mean_ = X.colwise().mean().transpose();
    x_std_.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double s = std::sqrt((X.col(j).array() - x_mean_[j]).square().sum() / static_cast<double>(n));
        x_std_[j] = s > 1e-14 ? s : 1.0;
    }
    Xn_ = (X.rowwise() - x_mean_.transpose()) * x_std_.cwiseInverse().asDiagonal();
    y_mean_ = y.mean();
    const double s = std::sqrt((y.array() - y_mean_).square().sum() / static_cast<double>(n));
    degenerate_ = !(s > 1e-14 * std::max(1.0, std::abs(y_mean_)));
    y_std_ = degenerate_ ? 1.0 : s;
    yn_ = (y.array() - y_mean_).matrix() / y_std_;
}

void SurrogateModel::factorize(const Eigen::VectorXd& theta, double nugget) {
    theta_ = theta;
    theta_eff_ = kpls_theta(theta, pls_weights_);
    Factorization f = factor(Xn_, yn_, theta_eff_, config_.family, nugget, nugget);
    if (!f.ok) throw FitError("surrogate: correlation matrix not positive definite at nugget " + std::to_string(nugget));
    nugget_ = f.nugget;
    chol_ = std::move(f.L);
    mu_ = f.mu;
    sigma2_ = f.sigma2;
    gamma_ = std::move(f.gamma);
    ones_solved_ = std::move(f.ones_solved);
    ones_quad_ = f.ones_quad;
    diagnostics_.log_likelihood = f.log_likelihood;
}

SurrogateModel SurrogateModel::fit(const Eigen::MatrixXd& X_in, const Eigen::VectorXd& y_in, const KernelConfig& config,
                                   std::uint64_t seed, const FitOptions& options) {
    if (X_in.rows() != y_in.size()) throw std::invalid_argument("surrogate fit: X and y row counts differ");
    if (!(config.nugget > 0.0)) throw std::invalid_argument("surrogate fit: nugget must be positive");
    if (!X_in.allFinite() || !y_in.allFinite()) throw std::invalid_argument("surrogate fit: non-finite training data");

    // Merge near-duplicate rows, keeping the first occurrence.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < X_in.rows(); ++i) {
        bool dup = false;
        for (Eigen::Index k : keep)
            if ((X_in.row(i) - X_in.row(k)).norm() <= options.duplicate_tol) {
                dup = true;
                break;
            }
        if (!dup) keep.push_back(i);
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(keep.size()), X_in.cols());
    Eigen::VectorXd y(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        X.row(static_cast<Eigen::Index>(r)) = X_in.row(keep[r]);
        y[static_cast<Eigen::Index>(r)] = y_in[keep[r]];
    }
    if (X.rows() < 2) throw std::invalid_argument("surrogate fit: need at least 2 distinct training points");

    SurrogateModel m;
    m.config_ = config;
    m.diagnostics_.merged_duplicates = static_cast<std::size_t>(X_in.rows() - X.rows());
    m.set_data(X, y);
    const auto d = static_cast<std::size_t>(X.cols());
    const auto n = static_cast<std::size_t>(X.rows());
    if (config.n_pls > std::min(d, n)) throw std::invalid_argument("surrogate fit: n_pls exceeds min(d', n_train)");

    if (m.degenerate_) {
        m.pls_weights_ = Eigen::MatrixXd(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(config.n_pls));
        m.pls_weights_.setZero();
        m.theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.n_pls > 0 ? config.n_pls : d));
        m.theta_eff_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
        m.sigma2_ = 0.0;
        m.mu_ = 0.0;
        return m;
    }

    m.pls_weights_ = fit_pls(m.Xn_, m.yn_, config.n_pls);
    if (config.n_pls > 0 && m.pls_weights_.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateDataError("surrogate fit: PLS produced no informative direction");
    const std::size_t p = config.n_pls > 0 ? config.n_pls : d;

    const double lo = options.log10_theta_min;
    const double hi = options.log10_theta_max;
    Rng rng = make_rng(seed, 0xF17);
    const std::size_t n_starts = std::max<std::size_t>(1, options.n_starts);
    Eigen::MatrixXd starts = lhs_unit(n_starts, p, rng);
    starts = (starts.array() * (hi - lo) + lo).matrix();
    // First start: a moderate, isotropic guess.
    starts.row(0).setConstant(std::clamp(-1.0, lo, hi));

    auto neg_ll = [&](const Eigen::VectorXd& log_theta) {
        ++m.diagnostics_.likelihood_evals;
        const Eigen::VectorXd theta = log_theta.unaryExpr([](double v) { return std::pow(10.0, v); });
        Factorization f = factor(m.Xn_, m.yn_, kpls_theta(theta, m.pls_weights_), config.family, config.nugget,
                                 options.max_nugget);
        return f.ok ? -f.log_likelihood : std::numeric_limits<double>::infinity();
    };

    optim::BoxProblem problem;
    problem.lower = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p), lo);
    problem.upper = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p), hi);
    problem.evaluate = [&](const Eigen::VectorXd& v) { return optim::Evaluation{neg_ll(v), Eigen::VectorXd()}; };
    optim::LocalSearchOptions lso;
    lso.rho_begin = 0.1;
    lso.rho_end = 1e-3;
    lso.max_evals = options.max_evals_per_start > 0 ? options.max_evals_per_start : 20 * (p + 1);

    Eigen::VectorXd best;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < n_starts; ++s) {
        const Eigen::VectorXd x0 = starts.row(static_cast<Eigen::Index>(s)).transpose();
        const double v0 = neg_ll(x0);
        m.diagnostics_.start_points.push_back(x0);
        m.diagnostics_.start_log_likelihood.push_back(-v0);
        if (v0 < best_val) {
            best_val = v0;
            best = x0;
        }
        if (!std::isfinite(v0)) continue;
        auto r = optim::minimize(problem, x0, lso);
        if (r.objective < best_val) {
            best_val = r.objective;
            best = r.x;
        }
    }
    if (!std::isfinite(best_val))
        throw FitError("surrogate fit: no hyperparameters gave a positive definite correlation matrix up to nugget " +
                       std::to_string(options.max_nugget) + " (n=" + std::to_string(n) + ", d=" + std::to_string(d) +
                       ")");

    const Eigen::VectorXd theta = best.unaryExpr([](double v) { return std::pow(10.0, v); });
    // Re-run the escalation to learn which nugget the optimum needed.
    Factorization f = factor(m.Xn_, m.yn_, kpls_theta(theta, m.pls_weights_), config.family, config.nugget,
                             options.max_nugget);
    m.factorize(theta, f.nugget);
    return m;
}

Eigen::VectorXd SurrogateModel::correlations(const Eigen::VectorXd& xn) const {
    const Eigen::Index n = Xn_.rows();
    Eigen::VectorXd r(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double d2 = ((Xn_.row(j).transpose() - xn).array().square() * theta_eff_.array()).sum();
        r[j] = kernel_of(config_.family, d2);
    }
    return r;
}

double SurrogateModel::predict_mean(const Eigen::VectorXd& x) const {
    if (degenerate_) return y_mean_;
    const Eigen::VectorXd xn = (x - x_mean_).cwiseQuotient(x_std_);
    return y_mean_ + y_std_ * (mu_ + correlations(xn).dot(gamma_));
}

double SurrogateModel::raw_variance(const Eigen::VectorXd& x) const {
    if (degenerate_) return 0.0;
    const Eigen::VectorXd xn = (x - x_mean_).cwiseQuotient(x_std_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(correlations(xn));
    const double trend_term = 1.0 - ones_solved_.dot(v);
    const double s2 = 1.0 - v.squaredNorm() + trend_term * trend_term / ones_quad_;
    return sigma2_ * y_std_ * y_std_ * s2;
}

SurrogateModel::Prediction SurrogateModel::predict(const Eigen::VectorXd& x) const {
    if (degenerate_) return {y_mean_, 0.0};
    const Eigen::VectorXd xn = (x - x_mean_).cwiseQuotient(x_std_);
    const Eigen::VectorXd r = correlations(xn);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(r);
    const double trend_term = 1.0 - ones_solved_.dot(v);
    const double s2 = 1.0 - v.squaredNorm() + trend_term * trend_term / ones_quad_;
    return {y_mean_ + y_std_ * (mu_ + r.dot(gamma_)), std::max(0.0, sigma2_ * y_std_ * y_std_ * s2)};
}

Eigen::VectorXd SurrogateModel::predict_gradient(const Eigen::VectorXd& x) const {
    const Eigen::Index d = x_mean_.size();
    if (degenerate_) return Eigen::VectorXd::Zero(d);
    const Eigen::VectorXd xn = (x - x_mean_).cwiseQuotient(x_std_);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    for (Eigen::Index j = 0; j < Xn_.rows(); ++j) {
        const Eigen::VectorXd diff = xn - Xn_.row(j).transpose();
        const double d2 = (diff.array().square() * theta_eff_.array()).sum();
        g += (gamma_[j] * kernel_grad_factor(config_.family, d2)) * theta_eff_.cwiseProduct(diff);
    }
    return y_std_ * g.cwiseQuotient(x_std_);
}

nlohmann::json SurrogateModel::to_json() const {
    auto mat = [](const Eigen::MatrixXd& M) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(M.cols()));
            for (Eigen::Index j = 0; j < M.cols(); ++j) row[static_cast<std::size_t>(j)] = M(i, j);
            rows.push_back(row);
        }
        return rows;
    };
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return {{"format", "mobo-surrogate"},
            {"version", 1},
            {"config", {{"family", to_string(config_.family)}, {"n_pls", config_.n_pls}, {"nugget", config_.nugget}}},
            {"X", mat(X_)},
            {"y", vec(y_)},
            {"theta", vec(theta_)},
            {"pls_weights", mat(pls_weights_)},
            {"nugget_used", nugget_},
            {"degenerate", degenerate_},
            {"log_likelihood", diagnostics_.log_likelihood}};
}

SurrogateModel SurrogateModel::from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "mobo-surrogate" || doc.value("version", 0) != 1)
        throw std::invalid_argument("surrogate load: unsupported format or version");
    SurrogateModel m;
    const auto& c = doc.at("config");
    m.config_.family = kernel_family_from_string(c.at("family").get<std::string>());
    m.config_.n_pls = c.at("n_pls").get<std::size_t>();
    m.config_.nugget = c.at("nugget").get<double>();
    auto mat = [](const nlohmann::json& j, Eigen::Index cols) {
        Eigen::MatrixXd M(static_cast<Eigen::Index>(j.size()), cols);
        for (std::size_t i = 0; i < j.size(); ++i)
            for (Eigen::Index k = 0; k < cols; ++k) M(static_cast<Eigen::Index>(i), k) = j[i][static_cast<std::size_t>(k)].get<double>();
        return M;
    };
    auto vec = [](const nlohmann::json& j) {
        const auto v = j.get<std::vector<double>>();
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    const auto& jx = doc.at("X");
    const Eigen::Index d = jx.empty() ? 0 : static_cast<Eigen::Index>(jx[0].size());
    const Eigen::MatrixXd X = mat(jx, d);
    const Eigen::VectorXd y = vec(doc.at("y"));
    m.set_data(X, y);
    m.pls_weights_ = mat(doc.at("pls_weights"), static_cast<Eigen::Index>(m.config_.n_pls));
    if (m.pls_weights_.rows() == 0) m.pls_weights_.resize(d, static_cast<Eigen::Index>(m.config_.n_pls));
    const Eigen::VectorXd theta = vec(doc.at("theta"));
    if (m.degenerate_) {
        m.theta_ = theta;
        m.theta_eff_ = Eigen::VectorXd::Zero(d);
        m.sigma2_ = 0.0;
        return m;
    }
    m.factorize(theta, doc.at("nugget_used").get<double>());
    return m;
}

MultiOutputSurrogate MultiOutputSurrogate::fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                                               const KernelConfig& config, std::uint64_t seed, const FitOptions& options) {
    MultiOutputSurrogate out;
    for (Eigen::Index i = 0; i < F.cols(); ++i)
        out.objectives.push_back(SurrogateModel::fit(X, F.col(i), config, mix_seed(seed, static_cast<std::uint64_t>(i)), options));
    for (Eigen::Index j = 0; j < G.cols(); ++j)
        out.constraints.push_back(
            SurrogateModel::fit(X, G.col(j), config, mix_seed(seed, 1000 + static_cast<std::uint64_t>(j)), options));
    return out;
}

void MultiOutputSurrogate::predict_objectives(const Eigen::VectorXd& x, Eigen::VectorXd& means,
                                              Eigen::VectorXd& sigmas) const {
    const auto n = static_cast<Eigen::Index>(objectives.size());
    means.resize(n);
    sigmas.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto p = objectives[static_cast<std::size_t>(i)].predict(x);
        means[i] = p.mean;
        sigmas[i] = std::sqrt(p.variance);
    }
}

Eigen::VectorXd MultiOutputSurrogate::constraint_means(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g(static_cast<Eigen::Index>(constraints.size()));
    for (std::size_t j = 0; j < constraints.size(); ++j) g[static_cast<Eigen::Index>(j)] = constraints[j].predict_mean(x);
    return g;
}

}  // namespace mobo
