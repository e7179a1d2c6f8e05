#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mobo/problems.hpp"

namespace {

using namespace mobo;
using Eigen::VectorXd;

TEST(Catalog, ContainsRequiredProblems) {
    const auto names = problem_names();
    for (const char* n : {"zdt1", "bnh", "mixed-retrofit-toy", "mixed-family-toy", "cat-supply-toy"})
        EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
    EXPECT_THROW(make_problem("nope"), std::out_of_range);
}

TEST(Catalog, ShapesMirrorTheCaseStudies) {
    const auto r = make_problem("mixed-retrofit-toy");
    EXPECT_EQ(r.space.relaxed_dimension(), 7u);
    EXPECT_EQ(r.n_objectives, 4u);
    EXPECT_EQ(r.n_constraints, 4u);
    const auto f = make_problem("mixed-family-toy");
    EXPECT_EQ(f.space.n_continuous(), 9u);
    EXPECT_EQ(f.space.n_categorical(), 10u);
    const auto c = make_problem("cat-supply-toy");
    EXPECT_EQ(c.n_objectives, 5u);
    EXPECT_EQ(c.n_constraints, 2u);
    std::vector<std::size_t> levels;
    for (const auto& v : c.space.variables()) levels.push_back(v.levels.size());
    EXPECT_EQ(levels, (std::vector<std::size_t>{21, 21, 21, 21, 6, 5, 4, 5}));
    EXPECT_EQ(bnh().n_constraints, 2u);
}

TEST(Catalog, EvaluatorsDeterministicAndSized) {
    std::mt19937_64 rng(1);
    for (const auto& name : problem_names()) {
        const auto p = make_problem(name);
        for (const auto& x : p.space.lhs_sample(20, 3)) {
            const auto a = p.evaluate(x), b = p.evaluate(x);
            EXPECT_EQ(a.f, b.f);
            EXPECT_EQ(a.g, b.g);
            EXPECT_EQ(static_cast<std::size_t>(a.f.size()), p.n_objectives) << name;
            EXPECT_EQ(static_cast<std::size_t>(a.g.size()), p.n_constraints) << name;
            EXPECT_TRUE(a.f.allFinite());
        }
    }
}

TEST(Zdt1, FrontIdentity) {
    const auto p = zdt1();
    for (double f1 : {0.0, 0.25, 1.0}) {
        std::vector<double> x(5, 0.0);
        x[0] = f1;
        const auto e = p.evaluate(p.space.make_point(x));
        EXPECT_DOUBLE_EQ(e.f[0], f1);
        EXPECT_NEAR(e.f[1], 1.0 - std::sqrt(f1), 1e-12);
    }
    for (const auto& f : p.sample_front(50)) EXPECT_NEAR(f[1], 1.0 - std::sqrt(f[0]), 1e-12);
}

// Sampled front points must be attainable and not dominated by random designs.
TEST(AnalyticFronts, ConsistentWithEvaluator) {
    for (const auto& name : problem_names()) {
        const auto p = make_problem(name);
        if (p.front != FrontKind::analytic) continue;
        const auto front = p.sample_front(200);
        ASSERT_FALSE(front.empty()) << name;
        std::mt19937_64 rng(2);
        for (const auto& x : p.space.lhs_sample(2000, 7)) {
            const auto e = p.evaluate(x);
            if (e.g.size() && e.g.maxCoeff() > 0) continue;
            const auto f = minimization_objectives(p, e.f);
            for (const auto& y : front) ASSERT_FALSE(strictly_dominates(f, y) && (f - y).minCoeff() < -1e-6) << name;
        }
    }
}

TEST(AnalyticFronts, ConvexQuadAndBnh) {
    for (const auto& f : convex_quad().sample_front(20)) EXPECT_NEAR(f[1], (1 - f[0]) * (1 - f[0]), 1e-12);
    const auto b = bnh();
    // BNH front at x1 = x2 = t: f1 = 8t^2, f2 = 2(t-5)^2.
    const auto e = b.evaluate(b.space.make_point({1.0, 1.0}));
    EXPECT_DOUBLE_EQ(e.f[0], 8.0);
    EXPECT_DOUBLE_EQ(e.f[1], 32.0);
    EXPECT_LT(distance_to_front(e.f, b.sample_front(2000)), 0.1);
}

TEST(CatSupplySmall, EnumerationOracle) {
    const auto p = cat_supply_toy_small();
    EXPECT_EQ(p.front, FrontKind::enumerable);
    EXPECT_EQ(*p.space.cardinality(), 4096u);
    EXPECT_EQ(p.space.relaxed_dimension(), 24u);
    const auto ar = enumerate_front(p);
    ASSERT_TRUE(ar.has_value());

    // Independent brute force over the same enumeration.
    std::vector<ObjectiveVector> feas;
    p.space.enumerate([&](const MixedPoint& x) {
        const auto e = p.evaluate(x);
        if (e.g.maxCoeff() <= 0) feas.push_back(minimization_objectives(p, e.f));
    });
    std::size_t count = 0;
    for (std::size_t i = 0; i < feas.size(); ++i) {
        bool dom = false;
        for (std::size_t j = 0; j < feas.size() && !dom; ++j) dom = strictly_dominates(feas[j], feas[i]);
        bool dup = false;
        for (std::size_t j = 0; j < i && !dup; ++j) dup = feas[j] == feas[i];
        count += !dom && !dup;
    }
    EXPECT_EQ(ar->front_indices().size(), count);
    EXPECT_GT(count, 1u);
    EXPECT_FALSE(enumerate_front(cat_supply_toy(), 1000).has_value());
    EXPECT_FALSE(enumerate_front(zdt1()).has_value());
}

TEST(MixedFamily, InactiveVariablesDoNotMatter) {
    const auto p = mixed_family_toy();
    const auto share = *p.space.index_of("share_wing_12");
    const auto sweep = *p.space.index_of("sweep_1");
    auto x = p.space.lhs_sample(1, 4)[0].values;
    x[share] = 1;
    x[sweep] = p.space.variable(sweep).lower;
    const auto a = p.evaluate(p.space.make_point(x));
    x[sweep] = p.space.variable(sweep).upper;
    const auto b = p.evaluate(p.space.make_point(x));
    EXPECT_EQ(a.f, b.f);
}

}  // namespace
