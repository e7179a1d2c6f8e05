#include "mobo/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mobo {

namespace {

using std::numbers::pi;

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

double sq(double x) { return x * x; }

}  // namespace

ObjectiveVector minimization_objectives(const BenchmarkProblem& problem, const ObjectiveVector& f) {
    ObjectiveVector out = f;
    for (std::size_t i = 0; i < problem.maximize.size(); ++i)
        if (problem.maximize[i]) out[static_cast<Eigen::Index>(i)] = -out[static_cast<Eigen::Index>(i)];
    return out;
}

BenchmarkProblem zdt1(std::size_t dim) {
    if (dim < 2) throw std::invalid_argument("zdt1: dimension must be >= 2");
    std::vector<VariableSpec> vars;
    for (std::size_t i = 0; i < dim; ++i) vars.push_back(VariableSpec::continuous("x" + std::to_string(i + 1), 0.0, 1.0));
    BenchmarkProblem p;
    p.name = "zdt1";
    p.description = "continuous bi-objective, front f2 = 1 - sqrt(f1)";
    p.space = DesignSpace("zdt1", std::move(vars));
    p.evaluate = [dim](const MixedPoint& x) {
        const auto& v = x.values;
        double s = 0.0;
        for (std::size_t i = 1; i < dim; ++i) s += v[i];
        const double g = 1.0 + 9.0 * s / static_cast<double>(dim - 1);
        return PointEvaluation{vec({v[0], g * (1.0 - std::sqrt(v[0] / g))}), Eigen::VectorXd()};
    };
    p.front = FrontKind::analytic;
    p.sample_front = [](std::size_t n) {
        std::vector<ObjectiveVector> out;
        for (std::size_t k = 0; k < n; ++k) {
            const double f1 = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
            out.push_back(vec({f1, 1.0 - std::sqrt(f1)}));
        }
        return out;
    };
    return p;
}

BenchmarkProblem bnh() {
    BenchmarkProblem p;
    p.name = "bnh";
    p.description = "constrained bi-objective (Binh and Korn), two inequality constraints";
    p.space = DesignSpace("bnh", {VariableSpec::continuous("x1", 0.0, 5.0), VariableSpec::continuous("x2", 0.0, 3.0)});
    p.n_constraints = 2;
    p.evaluate = [](const MixedPoint& x) {
        const double a = x.values[0], b = x.values[1];
        return PointEvaluation{vec({4 * a * a + 4 * b * b, sq(a - 5) + sq(b - 5)}),
                               vec({sq(a - 5) + b * b - 25, 7.7 - sq(a - 8) - sq(b + 3)})};
    };
    p.front = FrontKind::analytic;
    p.sample_front = [](std::size_t n) {
        // x1 = x2 = t on [0, 3], then x2 = 3 with x1 on [3, 5].
        std::vector<ObjectiveVector> out;
        for (std::size_t k = 0; k < n; ++k) {
            const double s = n == 1 ? 0.0 : 5.0 * static_cast<double>(k) / static_cast<double>(n - 1);
            const double a = s, b = std::min(s, 3.0);
            out.push_back(vec({4 * a * a + 4 * b * b, sq(a - 5) + sq(b - 5)}));
        }
        return out;
    };
    return p;
}

BenchmarkProblem convex_quad() {
    BenchmarkProblem p;
    p.name = "convex-quad";
    p.description = "smooth bi-objective on [0,1]^2, front f2 = (1 - f1)^2";
    p.space = DesignSpace("convex-quad", {VariableSpec::continuous("x1", 0.0, 1.0), VariableSpec::continuous("x2", 0.0, 1.0)});
    p.evaluate = [](const MixedPoint& x) {
        const double a = x.values[0], b = x.values[1];
        return PointEvaluation{vec({a, sq(1 - a) + b * b}), Eigen::VectorXd()};
    };
    p.front = FrontKind::analytic;
    p.sample_front = [](std::size_t n) {
        std::vector<ObjectiveVector> out;
        for (std::size_t k = 0; k < n; ++k) {
            const double f1 = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
            out.push_back(vec({f1, sq(1 - f1)}));
        }
        return out;
    };
    return p;
}

BenchmarkProblem mixed_retrofit_toy() {
    BenchmarkProblem p;
    p.name = "mixed-retrofit-toy";
    p.description = "airframe upgrade analogue: OBS architecture + 3 engine variables, 4 objectives, 4 constraints";
    p.space = DesignSpace("mixed-retrofit-toy", {VariableSpec::categorical("obs", {"CONV", "MEA1", "MEA2", "AEA"}),
                                                 VariableSpec::continuous("bpr", 9.0, 15.0),
                                                 VariableSpec::continuous("engine_x", -0.98, -0.80),
                                                 VariableSpec::continuous("engine_z", -0.39, -0.21)});
    p.n_objectives = 4;
    p.n_constraints = 4;
    p.maximize = {false, false, false, true};
    p.evaluate = [](const MixedPoint& x) {
        const double e = x.values[0];
        const double t = (x.values[1] - 9.0) / 6.0;
        const double u = (x.values[2] + 0.98) / 0.18;
        const double v = (x.values[3] + 0.39) / 0.18;
        const double mtow = 38800 + 260 * t * t - 90 * t + 45 * e + 40 * sq(u - 0.5) + 30 * sq(v - 0.4);
        const double cei = 1.0 - 0.08 * t - 0.03 * e - 0.01 * std::sin(pi * u) + 0.02 * sq(v - 0.5);
        const double cost = -0.2 + 0.35 * t * t + 0.12 * e + 0.05 * sq(u - 0.3) + 0.03 * v;
        const double sar = 1.0 + 0.2 * t - 0.1 * t * t + 0.025 * e + 0.03 * std::cos(pi * (u - 0.4)) - 0.02 * sq(v - 0.6);
        const double tofl = 1380 + 90 * t * t + 25 * e + 30 * v;
        const double lfl = 1320 + 40 * t + 20 * e + 10 * u;
        const double noise = 266 - 5 * t - 0.8 * e + 2 * sq(u - 0.5);
        return PointEvaluation{vec({mtow, cei, cost, sar}),
                               vec({mtow - 39058.5, tofl - 1500, lfl - 1400, noise - 263})};
    };
    return p;
}

BenchmarkProblem mixed_family_toy() {
    std::vector<VariableSpec> vars;
    for (const char* n : {"engine_12", "engine_23", "wing_12", "wing_23", "gear_12", "gear_23", "obs_12", "obs_23",
                          "empennage_13", "empennage_32"})
        vars.push_back(VariableSpec::categorical(std::string("share_") + n, {"no", "yes"}));
    // Wing 2 is the reference wing; wings 1 and 3 own their planform only
    // when they are not shared with it.
    for (std::size_t w = 1; w <= 3; ++w) {
        const std::string s = std::to_string(w);
        auto sweep = VariableSpec::continuous("sweep_" + s, 30.0, 42.0);
        auto rear = VariableSpec::continuous("rear_spar_" + s, 0.72, 0.82);
        auto tc = VariableSpec::continuous("tc_" + s, 0.06, 0.11);
        if (w != 2) {
            const std::size_t ctrl = w == 1 ? 2 : 3;
            sweep.when(ctrl, {0});
            rear.when(ctrl, {0});
            tc.when(ctrl, {0});
        }
        vars.push_back(sweep);
        vars.push_back(rear);
        vars.push_back(tc);
    }
    BenchmarkProblem p;
    p.name = "mixed-family-toy";
    p.description = "aircraft family analogue: 10 commonality choices + 9 hierarchical wing variables, 2 objectives, 2 constraints";
    p.space = DesignSpace("mixed-family-toy", std::move(vars));
    p.n_constraints = 2;
    p.evaluate = [](const MixedPoint& x) {
        const auto& v = x.values;
        std::array<std::array<double, 3>, 3> wing{};
        for (std::size_t w = 0; w < 3; ++w)
            for (std::size_t k = 0; k < 3; ++k) wing[w][k] = v[10 + 3 * w + k];
        if (v[2] == 1.0) wing[0] = wing[1];
        if (v[3] == 1.0) wing[2] = wing[1];
        const std::array<std::array<double, 3>, 3> best{{{32.0, 0.74, 0.10}, {36.0, 0.77, 0.09}, {40.0, 0.80, 0.07}}};
        double doc = 0.0;
        for (std::size_t w = 0; w < 3; ++w)
            doc += sq((wing[w][0] - best[w][0]) / 12.0) + sq((wing[w][1] - best[w][1]) / 0.1) +
                   sq((wing[w][2] - best[w][2]) / 0.05);
        static constexpr std::array<double, 10> doc_penalty{0.12, 0.18, 0.0, 0.0, 0.05, 0.07, 0.04, 0.06, 0.03, 0.05};
        static constexpr std::array<double, 10> nrc_saving{0.9, 1.1, 1.6, 1.4, 0.4, 0.5, 0.3, 0.35, 0.25, 0.3};
        double nrc = 10.0;
        for (std::size_t i = 0; i < 10; ++i) {
            doc += doc_penalty[i] * v[i];
            nrc -= nrc_saving[i] * v[i];
        }
        for (std::size_t w = 0; w < 3; ++w) nrc += 0.3 * (wing[w][0] - 30.0) / 12.0 + 2.0 * (0.11 - wing[w][2]);
        const double bfl = 1400 + 12 * (wing[2][0] - 30.0) + 40 * v[1] - 300 * (wing[2][2] - 0.06);
        const double lfl = 700 + 4 * (wing[0][0] - 30.0) + 300 * (0.82 - wing[0][1]) + 15 * v[4];
        return PointEvaluation{vec({doc, nrc}), vec({bfl - 1524, lfl - 762})};
    };
    return p;
}

BenchmarkProblem cat_supply_toy(std::size_t sites, std::vector<std::size_t> processes) {
    if (sites < 2 || processes.size() != 4)
        throw std::invalid_argument("cat_supply_toy: need >= 2 sites and 4 process level counts");
    static const std::array<const char*, 4> parts{"skin", "spar", "stringer", "rib"};
    std::vector<VariableSpec> vars;
    for (std::size_t k = 0; k < 4; ++k) {
        std::vector<std::string> levels;
        for (std::size_t s = 0; s < sites; ++s) levels.push_back("site" + std::to_string(s + 1));
        vars.push_back(VariableSpec::categorical(std::string(parts[k]) + "_site", std::move(levels)));
    }
    for (std::size_t k = 0; k < 4; ++k) {
        if (processes[k] < 2) throw std::invalid_argument("cat_supply_toy: need >= 2 processes per part");
        std::vector<std::string> levels;
        for (std::size_t q = 0; q < processes[k]; ++q) levels.push_back("process" + std::to_string(q + 1));
        vars.push_back(VariableSpec::categorical(std::string(parts[k]) + "_process", std::move(levels)));
    }
    BenchmarkProblem p;
    const bool full = sites == 21 && processes == std::vector<std::size_t>{6, 5, 4, 5};
    p.name = full ? "cat-supply-toy" : "cat-supply-toy-small";
    p.description = "supply chain analogue: site and process choice per component, 5 objectives, 2 feasibility masks";
    p.space = DesignSpace(p.name, std::move(vars));
    p.n_objectives = 5;
    p.n_constraints = 2;
    p.maximize = {false, false, false, false, true};
    p.front = full ? FrontKind::none : FrontKind::enumerable;
    p.evaluate = [processes](const MixedPoint& x) {
        // Each component choice carries an integer penalty shared by all
        // objectives plus a small objective-specific term. Zero-penalty
        // choices have trade-off terms summing to a constant, so any mix of
        // them is mutually nondominated and dominates every other mix.
        Eigen::VectorXd f = Eigen::VectorXd::Zero(5);
        double incompatible = 0.0, incompetent = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            const auto s = static_cast<std::size_t>(x.values[k]);
            const auto q = static_cast<std::size_t>(x.values[4 + k]);
            const double site_pen = (s + k) % 2 == 0 ? 0.0 : 1.0 + static_cast<double>(s % 3);
            const double proc_pen = q == k % processes[k] ? 0.0 : 1.0 + static_cast<double>(q % 2);
            const double penalty = site_pen + proc_pen;
            for (std::size_t o = 0; o < 5; ++o) {
                const double phase = 1.3 * static_cast<double>(k) + 0.7 * static_cast<double>(s) + 2.1 * static_cast<double>(q);
                double trade;
                if (penalty == 0.0)
                    trade = 0.5 + 0.4 * std::sin(phase + 2.0 * pi * static_cast<double>(o) / 5.0);
                else
                    trade = 0.5 + 0.5 * std::sin(1.7 * static_cast<double>(o) + 2.3 * phase);
                f[static_cast<Eigen::Index>(o)] += penalty + 0.05 * trade;
            }
            if ((s * 3 + k + 2 * q) % 11 == 10) incompetent += 1.0;
        }
        const auto q0 = static_cast<std::size_t>(x.values[4]), q1 = static_cast<std::size_t>(x.values[5]);
        const auto q2 = static_cast<std::size_t>(x.values[6]), q3 = static_cast<std::size_t>(x.values[7]);
        if ((q0 + q3) % 3 == 2) incompatible += 1.0;
        if ((q1 + 2 * q2) % 4 == 3) incompatible += 1.0;
        // Quality is maximized: report it as a score decreasing with its loss.
        f[4] = 10.0 - f[4];
        return PointEvaluation{f, vec({incompatible - 0.5, incompetent - 0.5})};
    };
    return p;
}

BenchmarkProblem cat_supply_toy_small() { return cat_supply_toy(4, {2, 2, 2, 2}); }

std::vector<std::string> problem_names() {
    return {"zdt1", "bnh", "convex-quad", "mixed-retrofit-toy", "mixed-family-toy", "cat-supply-toy", "cat-supply-toy-small"};
}

BenchmarkProblem make_problem(const std::string& name) {
    if (name == "zdt1") return zdt1();
    if (name == "bnh") return bnh();
    if (name == "convex-quad") return convex_quad();
    if (name == "mixed-retrofit-toy") return mixed_retrofit_toy();
    if (name == "mixed-family-toy") return mixed_family_toy();
    if (name == "cat-supply-toy") return cat_supply_toy();
    if (name == "cat-supply-toy-small") return cat_supply_toy_small();
    throw std::out_of_range("unknown problem '" + name + "'");
}

std::optional<ParetoArchive> enumerate_front(const BenchmarkProblem& problem, std::uint64_t limit) {
    const auto card = problem.space.cardinality();
    if (!card || *card > limit) return std::nullopt;
    ParetoArchive all(problem.n_objectives);
    std::size_t id = 0;
    problem.space.enumerate([&](const MixedPoint& x) {
        const auto e = problem.evaluate(x);
        const bool feasible = e.g.size() == 0 || e.g.maxCoeff() <= 0.0;
        if (feasible) all.add({id, x, minimization_objectives(problem, e.f), e.g, true});
        ++id;
    });
    ParetoArchive front(problem.n_objectives);
    for (auto i : all.front_indices()) front.add(all.entries()[i]);
    return front;
}

double distance_to_front(const ObjectiveVector& f, const std::vector<ObjectiveVector>& front) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : front) best = std::min(best, (f - q).norm());
    return best;
}

}  // namespace mobo
