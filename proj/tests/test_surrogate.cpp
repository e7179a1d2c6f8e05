#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>

#include "mobo/surrogate.hpp"

namespace {

using namespace mobo;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double kern(KernelFamily fam, double d2) {
    if (fam == KernelFamily::squared_exponential) return std::exp(-d2);
    const double r = std::sqrt(5.0 * d2);
    return (1.0 + r + r * r / 3.0) * std::exp(-r);
}

VectorXd pop_std(const MatrixXd& X) {
    VectorXd s(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double m = X.col(j).mean();
        s[j] = std::sqrt((X.col(j).array() - m).square().mean());
        if (s[j] < 1e-14) s[j] = 1.0;
    }
    return s;
}

// Textbook ordinary kriging in raw units via a dense LU inverse, given the
// fitted hyperparameters of a model.
struct ReferenceKriging {
    MatrixXd X;
    VectorXd y, theta;
    KernelFamily fam;
    MatrixXd Rinv;
    double mu = 0, sigma2 = 0;

    ReferenceKriging(const SurrogateModel& m)
        : X(m.train_inputs()), y(m.train_outputs()), fam(m.config().family) {
        theta = m.effective_theta().cwiseQuotient(pop_std(X).cwiseAbs2());
        const auto n = X.rows();
        MatrixXd R(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) R(i, j) = k(X.row(i).transpose(), X.row(j).transpose());
        R.diagonal().array() += m.nugget();
        Rinv = R.fullPivLu().inverse();
        const VectorXd one = VectorXd::Ones(n);
        mu = one.dot(Rinv * y) / one.dot(Rinv * one);
        const VectorXd e = y - mu * one;
        sigma2 = e.dot(Rinv * e) / static_cast<double>(n);
    }
    double k(const VectorXd& a, const VectorXd& b) const {
        return kern(fam, ((a - b).array().square() * theta.array()).sum());
    }
    VectorXd r(const VectorXd& x) const {
        VectorXd out(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = k(x, X.row(i).transpose());
        return out;
    }
    double mean(const VectorXd& x) const { return mu + r(x).dot(Rinv * (y - mu * VectorXd::Ones(X.rows()))); }
    double variance(const VectorXd& x) const {
        const VectorXd rv = r(x), one = VectorXd::Ones(X.rows());
        const double t = 1.0 - one.dot(Rinv * rv);
        return sigma2 * (1.0 - rv.dot(Rinv * rv) + t * t / one.dot(Rinv * one));
    }
};

MatrixXd random_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = u(rng);
    return X;
}

VectorXd branin_like(const MatrixXd& X) {
    VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double s = 0;
        for (Eigen::Index j = 0; j < X.cols(); ++j) s += std::sin(3.0 * X(i, j) + static_cast<double>(j)) * (1.0 + 0.3 * j);
        y[i] = s + X(i, 0) * X(i, 0);
    }
    return y;
}

TEST(FitPls, LinearInFirstCoordinate) {
    // Large n keeps spurious sample correlations between columns small.
    MatrixXd X = random_matrix(2000, 6, 1);
    VectorXd y = 5.0 * X.col(0);
    const MatrixXd W = fit_pls(X, y, 2);
    ASSERT_EQ(W.rows(), 6);
    ASSERT_EQ(W.cols(), 2);
    EXPECT_GE(std::abs(W(0, 0)) / W.col(0).norm(), 0.99);

    // First NIPALS weight is the normalized covariance X_s' y_s.
    MatrixXd Xs = X.rowwise() - X.colwise().mean();
    Xs = Xs * pop_std(X).cwiseInverse().asDiagonal();
    VectorXd w = Xs.transpose() * (y.array() - y.mean()).matrix();
    w.normalize();
    EXPECT_NEAR(std::abs(w.dot(W.col(0)) / W.col(0).norm()), 1.0, 1e-10);
}

TEST(FitPls, ZeroComponentsAndDegenerate) {
    MatrixXd X = random_matrix(10, 3, 2);
    EXPECT_EQ(fit_pls(X, X.col(1), 0).cols(), 0);
    EXPECT_EQ(fit_pls(X, X.col(1), 0).rows(), 3);
    EXPECT_THROW(fit_pls(X, VectorXd::Constant(10, 2.0), 1), DegenerateDataError);
}

TEST(Fit, OneDimensionalExample) {
    MatrixXd X(3, 1);
    X << 0, 0.5, 1;
    VectorXd y(3);
    y << 0, 0.5, 1;
    const auto m = SurrogateModel::fit(X, y, {}, 1);
    const VectorXd q = VectorXd::Constant(1, 0.25);
    EXPECT_GE(m.predict_mean(q), 0.15);
    EXPECT_LE(m.predict_mean(q), 0.35);
    const ReferenceKriging ref(m);
    EXPECT_NEAR(m.predict_mean(q), ref.mean(q), 1e-8);
    EXPECT_NEAR(m.predict(q).variance, ref.variance(q), 1e-8 * (1.0 + ref.sigma2));
}

class FitFamilies : public ::testing::TestWithParam<std::tuple<KernelFamily, std::size_t>> {};

TEST_P(FitFamilies, MatchesReferenceAndInterpolates) {
    const auto [fam, h] = GetParam();
    const MatrixXd X = random_matrix(25, 4, 3);
    const VectorXd y = branin_like(X);
    const auto m = SurrogateModel::fit(X, y, {fam, h, 1e-10}, 42);
    EXPECT_EQ(static_cast<std::size_t>(m.theta().size()), h == 0 ? 4u : h);
    EXPECT_EQ(m.pls_weights().cols(), static_cast<Eigen::Index>(h));

    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto p = m.predict(X.row(i).transpose());
        EXPECT_LE(std::abs(p.mean - y[i]), 1e-6 * (1.0 + std::abs(y[i])));
        EXPECT_LE(p.variance, 1e-6 * m.process_variance());
    }
    const ReferenceKriging ref(m);
    EXPECT_NEAR(m.process_variance(), ref.sigma2, 1e-8 * ref.sigma2);
    const MatrixXd Q = random_matrix(50, 4, 4);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        const VectorXd q = Q.row(i).transpose();
        EXPECT_NEAR(m.predict_mean(q), ref.mean(q), 1e-6 * (1.0 + std::abs(ref.mean(q))));
        EXPECT_NEAR(m.predict(q).variance, ref.variance(q), 1e-6 * ref.sigma2);
        EXPECT_GE(m.raw_variance(q), -1e-8);
    }

    // Concentrated likelihood in standardized output units.
    const double ys = std::sqrt((y.array() - y.mean()).square().mean());
    const double n = static_cast<double>(X.rows());
    const double logdet = std::log(std::abs((ref.Rinv.inverse()).determinant()));
    const double s2n = ref.sigma2 / (ys * ys);
    EXPECT_NEAR(m.log_likelihood(), -0.5 * n * (std::log(2 * std::numbers::pi * s2n) + 1.0) - 0.5 * logdet, 1e-6);
    for (double ll : m.diagnostics().start_log_likelihood) EXPECT_GE(m.log_likelihood(), ll - 1e-12);
    EXPECT_EQ(m.diagnostics().start_points.size(), 10u);
}

INSTANTIATE_TEST_SUITE_P(Kernels, FitFamilies,
                         ::testing::Values(std::make_tuple(KernelFamily::squared_exponential, 0u),
                                           std::make_tuple(KernelFamily::matern52, 0u),
                                           std::make_tuple(KernelFamily::squared_exponential, 2u),
                                           std::make_tuple(KernelFamily::matern52, 1u)));

TEST(Fit, KplsHyperparameterCountOnWideInput) {
    const MatrixXd X = random_matrix(40, 104, 5);
    const VectorXd y = branin_like(X.leftCols(6));
    FitOptions opts;
    opts.n_starts = 2;
    const auto m = SurrogateModel::fit(X, y, {KernelFamily::squared_exponential, 4, 1e-10}, 1, opts);
    EXPECT_EQ(m.theta().size(), 4);
    EXPECT_EQ(m.effective_theta().size(), 104);
    EXPECT_EQ(m.pls_weights().rows(), 104);
    EXPECT_EQ(m.pls_weights().cols(), 4);
    const VectorXd expect = (m.pls_weights().cwiseAbs2() * m.theta());
    EXPECT_LE((expect - m.effective_theta()).norm(), 1e-12 * expect.norm());
}

TEST(Fit, ConstantOutputsAreDegenerate) {
    const MatrixXd X = random_matrix(6, 2, 6);
    const auto m = SurrogateModel::fit(X, VectorXd::Constant(6, 3.5), {}, 1);
    EXPECT_TRUE(m.degenerate());
    const VectorXd q = VectorXd::Constant(2, 0.3);
    EXPECT_EQ(m.predict(q).mean, 3.5);
    EXPECT_EQ(m.predict(q).variance, 0.0);
    EXPECT_EQ(m.predict_gradient(q), VectorXd::Zero(2));
}

TEST(Fit, DeterministicUnderSeed) {
    const MatrixXd X = random_matrix(20, 3, 7);
    const VectorXd y = branin_like(X);
    const auto a = SurrogateModel::fit(X, y, {}, 9);
    const auto b = SurrogateModel::fit(X, y, {}, 9);
    EXPECT_EQ(a.theta(), b.theta());
    EXPECT_EQ(a.log_likelihood(), b.log_likelihood());
}

TEST(Fit, DuplicateRowsMerged) {
    MatrixXd X(4, 1);
    X << 0, 0.5, 0.5, 1;
    VectorXd y(4);
    y << 0, 1, 1, 0;
    const auto m = SurrogateModel::fit(X, y, {}, 1);
    EXPECT_EQ(m.n_train(), 3u);
    EXPECT_EQ(m.diagnostics().merged_duplicates, 1u);
}

TEST(Fit, TooFewPoints) {
    MatrixXd X(1, 1);
    X << 0.2;
    EXPECT_ANY_THROW(SurrogateModel::fit(X, VectorXd::Constant(1, 1.0), {}, 1));
}

TEST(Predict, SymmetryAndPriorRecovery) {
    MatrixXd X(4, 1);
    X << 0.1, 0.35, 0.65, 0.9;
    VectorXd y(4);
    y << 1.0, -0.5, -0.5, 1.0;
    const auto m = SurrogateModel::fit(X, y, {}, 2);
    for (double t : {0.05, 0.2, 0.33}) {
        EXPECT_NEAR(m.predict_mean(VectorXd::Constant(1, 0.5 - t)), m.predict_mean(VectorXd::Constant(1, 0.5 + t)),
                    1e-9);
    }
    const double len = 1.0 / std::sqrt(m.effective_theta()[0]) * pop_std(X)[0];
    const auto far = m.predict(VectorXd::Constant(1, 0.9 + 12.0 * len));
    EXPECT_GE(far.variance, 0.99 * m.process_variance());
    EXPECT_NEAR(far.mean, m.trend(), 1e-6 * (1.0 + std::abs(m.trend())));
}

TEST(Gradient, MatchesCentralDifferences) {
    for (auto fam : {KernelFamily::squared_exponential, KernelFamily::matern52}) {
        const MatrixXd X = random_matrix(20, 3, 8);
        const VectorXd y = branin_like(X);
        const auto m = SurrogateModel::fit(X, y, {fam, 0, 1e-10}, 3);
        const MatrixXd Q = random_matrix(100, 3, 9);
        double worst = 0;
        for (Eigen::Index i = 0; i < Q.rows(); ++i) {
            const VectorXd q = Q.row(i).transpose();
            const VectorXd g = m.predict_gradient(q);
            VectorXd fd(3);
            for (int j = 0; j < 3; ++j) {
                const double h = 1e-5;
                VectorXd a = q, b = q;
                a[j] += h;
                b[j] -= h;
                fd[j] = (m.predict_mean(a) - m.predict_mean(b)) / (2 * h);
            }
            worst = std::max(worst, (g - fd).norm() / std::max(1.0, fd.norm()));
        }
        EXPECT_LE(worst, 1e-5) << to_string(fam);
    }
}

TEST(Gradient, SlopeSignInLinearRegion) {
    MatrixXd X(5, 1);
    X << 0, 0.25, 0.5, 0.75, 1;
    const VectorXd y = -2.0 * X.col(0);
    const auto m = SurrogateModel::fit(X, y, {}, 1);
    EXPECT_LT(m.predict_gradient(VectorXd::Constant(1, 0.4))[0], 0.0);
}

TEST(Dump, RoundTripReproducesPredictions) {
    const MatrixXd X = random_matrix(15, 5, 10);
    const VectorXd y = branin_like(X);
    const auto m = SurrogateModel::fit(X, y, {KernelFamily::matern52, 2, 1e-10}, 4);
    const auto text = m.to_json().dump();
    const auto back = SurrogateModel::from_json(nlohmann::json::parse(text));
    const MatrixXd Q = random_matrix(30, 5, 11);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        const VectorXd q = Q.row(i).transpose();
        EXPECT_NEAR(back.predict(q).mean, m.predict(q).mean, 1e-12 * (1 + std::abs(m.predict(q).mean)));
        EXPECT_NEAR(back.predict(q).variance, m.predict(q).variance, 1e-12 * (1 + m.process_variance()));
    }
    auto bad = m.to_json();
    bad["version"] = 999;
    EXPECT_ANY_THROW(SurrogateModel::from_json(bad));
}

TEST(MultiOutput, SharesInputs) {
    const MatrixXd X = random_matrix(12, 2, 12);
    MatrixXd F(12, 2), G(12, 1);
    F.col(0) = branin_like(X);
    F.col(1) = X.col(0) - X.col(1);
    G.col(0) = X.col(0) * 3.0;
    const auto s = MultiOutputSurrogate::fit(X, F, G, {}, 5);
    ASSERT_EQ(s.objectives.size(), 2u);
    ASSERT_EQ(s.constraints.size(), 1u);
    EXPECT_EQ(s.objectives[1].train_inputs(), s.constraints[0].train_inputs());
    VectorXd mu, sd;
    s.predict_objectives(X.row(3).transpose(), mu, sd);
    EXPECT_NEAR(mu[0], F(3, 0), 1e-6 * (1 + std::abs(F(3, 0))));
    EXPECT_NEAR(s.constraint_means(X.row(3).transpose())[0], G(3, 0), 1e-6);
}

}  // namespace
