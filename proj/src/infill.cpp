#include "mobo/infill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "mobo/local_search.hpp"
#include "mobo/random.hpp"

namespace mobo {

namespace {

bool constraints_hold(const Eigen::VectorXd& g, double tol) { return g.size() == 0 || g.maxCoeff() <= tol; }

std::vector<Eigen::VectorXd> start_points(const InfillProblem& problem, const InfillOptions& options, Rng& rng) {
    const Eigen::Index d = problem.lower.size();
    const std::size_t n_archive = std::min(options.n_archive_starts, problem.archive_points.size());
    const std::size_t n_lhs = options.n_starts > n_archive ? options.n_starts - n_archive : 0;
    std::vector<Eigen::VectorXd> starts;
    if (n_lhs > 0) {
        if (problem.space != nullptr) {
            for (const auto& p : problem.space->lhs_sample(n_lhs, rng())) starts.push_back(problem.space->encode(p));
        } else {
            const Eigen::MatrixXd u = lhs_unit(n_lhs, static_cast<std::size_t>(d), rng);
            for (Eigen::Index i = 0; i < u.rows(); ++i)
                starts.push_back(problem.lower + (problem.upper - problem.lower).cwiseProduct(u.row(i).transpose()));
        }
    }
    std::normal_distribution<double> normal(0.0, options.perturbation);
    for (std::size_t k = 0; k < n_archive; ++k) {
        // Spread picks over the archive rather than taking its first entries.
        const std::size_t idx = (k * problem.archive_points.size()) / n_archive;
        Eigen::VectorXd x = problem.archive_points[idx];
        for (Eigen::Index i = 0; i < d; ++i) x[i] += normal(rng) * (problem.upper[i] - problem.lower[i]);
        starts.push_back(x.cwiseMax(problem.lower).cwiseMin(problem.upper));
    }
    return starts;
}

double squared_distance_to_set(const Eigen::VectorXd& x, const std::vector<Eigen::VectorXd>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : set) best = std::min(best, (x - y).squaredNorm());
    return best;
}

}  // namespace

InfillResult solve_infill(const InfillProblem& problem, const InfillOptions& options, std::uint64_t seed) {
    if (!problem.acquisition) throw std::invalid_argument("infill: acquisition is required");
    const Eigen::Index d = problem.lower.size();
    if (problem.upper.size() != d || !problem.lower.allFinite() || !problem.upper.allFinite())
        throw std::invalid_argument("infill: bounds must be finite and of equal dimension");

    Rng rng = make_rng(seed, 0x1F1);
    const auto starts = start_points(problem, options, rng);

    optim::BoxProblem box;
    box.lower = problem.lower;
    box.upper = problem.upper;
    box.evaluate = [&](const Eigen::VectorXd& x) {
        optim::Evaluation e;
        e.objective = -problem.acquisition(x);
        if (problem.constraints) e.constraints = problem.constraints(x);
        return e;
    };
    optim::LocalSearchOptions lso;
    lso.rho_begin = options.rho_begin;
    lso.rho_end = options.rho_end;
    lso.feasibility_tol = options.constraint_tol;
    lso.max_evals = options.max_evals_per_start > 0 ? options.max_evals_per_start
                                                    : 30 * (static_cast<std::size_t>(d) + 1);

    InfillResult result;
    for (const auto& x0 : starts) {
        const auto r = optim::minimize(box, x0, lso);
        InfillStart s;
        s.start = x0;
        s.x = r.x;
        s.value = -r.objective;
        s.violation = r.violation;
        s.feasible = constraints_hold(r.constraints, options.constraint_tol);
        result.starts.push_back(std::move(s));
    }

    std::size_t best = 0;
    bool any_feasible = false;
    for (std::size_t i = 0; i < result.starts.size(); ++i) {
        const auto& s = result.starts[i];
        if (s.feasible && (!any_feasible || s.value > result.starts[best].value)) {
            best = i;
            any_feasible = true;
        }
    }
    if (!any_feasible)
        for (std::size_t i = 1; i < result.starts.size(); ++i)
            if (result.starts[i].violation < result.starts[best].violation) best = i;
    if (result.starts.empty()) throw std::invalid_argument("infill: no start points");
    const auto& b = result.starts[best];
    result.x = b.x;
    result.value = b.value;
    result.feasible = b.feasible;
    result.violation = b.violation;
    return result;
}

DedupResult dedup_guard(const DesignSpace& space, const Eigen::VectorXd& candidate,
                        const std::vector<MixedPoint>& evaluated, std::uint64_t seed,
                        const std::function<bool(const Eigen::VectorXd&)>& feasible) {
    std::set<std::vector<double>> seen;
    std::vector<Eigen::VectorXd> encoded;
    for (const auto& p : evaluated) {
        seen.insert(p.values);
        encoded.push_back(space.encode(p));
    }
    const MixedPoint decoded = space.decode(candidate);
    if (!seen.count(decoded.values)) return {candidate, false, false};

    // Best non-colliding pick by (feasible first, then max-min distance).
    std::optional<Eigen::VectorXd> best;
    bool best_feasible = false;
    double best_dist = -1.0;
    auto consider = [&](const MixedPoint& p) {
        if (seen.count(p.values)) return;
        const Eigen::VectorXd x = space.encode(p);
        const bool ok = !feasible || feasible(x);
        const double dist = squared_distance_to_set(x, encoded);
        if (!best || (ok && !best_feasible) || (ok == best_feasible && dist > best_dist)) {
            best = x;
            best_feasible = ok;
            best_dist = dist;
        }
    };
    for (const auto& p : space.lhs_sample(100, mix_seed(seed, 0xDED))) consider(p);
    if (!best) {
        const auto card = space.cardinality();
        if (card && *card <= 100000) space.enumerate(consider);
    }
    if (!best) return {candidate, false, true};
    return {*best, true, false};
}

}  // namespace mobo
