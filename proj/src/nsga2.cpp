#include "mobo/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "mobo/local_search.hpp"
#include "mobo/random.hpp"

namespace mobo {

namespace {

// a constrained-dominates b.
bool cdominates(const ObjectiveVector& fa, double va, const ObjectiveVector& fb, double vb) {
    if (va <= 0.0 && vb > 0.0) return true;
    if (va > 0.0 && vb <= 0.0) return false;
    if (va > 0.0 && vb > 0.0) return va < vb;
    return strictly_dominates(fa, fb);
}

std::vector<std::vector<std::size_t>> sort_by(std::size_t n, const std::function<bool(std::size_t, std::size_t)>& dom) {
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dom(p, q))
                dominated[p].push_back(q);
            else if (dom(q, p))
                ++count[p];
        }
        if (count[p] == 0) fronts[0].push_back(p);
    }
    if (n == 0) return {};
    std::size_t i = 0;
    while (!fronts[i].empty()) {
        std::vector<std::size_t> next;
        for (auto p : fronts[i])
            for (auto q : dominated[p])
                if (--count[q] == 0) next.push_back(q);
        std::sort(next.begin(), next.end());
        ++i;
        fronts.push_back(std::move(next));
    }
    fronts.pop_back();
    return fronts;
}

double sbx_child(double x1, double x2, double lo, double hi, double eta, double u, bool first) {
    // Bounded SBX as in Deb's reference implementation.
    const double y1 = std::min(x1, x2);
    const double y2 = std::max(x1, x2);
    const double span = y2 - y1;
    if (span < 1e-14) return first ? x1 : x2;
    const double beta = 1.0 + 2.0 * (first ? (y1 - lo) : (hi - y2)) / span;
    const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
    const double betaq = u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                          : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
    const double c = first ? 0.5 * ((y1 + y2) - betaq * span) : 0.5 * ((y1 + y2) + betaq * span);
    return std::clamp(c, lo, hi);
}

double polynomial_mutation(double x, double lo, double hi, double eta, double u) {
    const double span = hi - lo;
    if (span <= 0.0) return x;
    const double d1 = (x - lo) / span;
    const double d2 = (hi - x) / span;
    const double p = 1.0 / (eta + 1.0);
    double dq;
    if (u < 0.5) {
        const double v = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
        dq = std::pow(v, p) - 1.0;
    } else {
        const double v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
        dq = 1.0 - std::pow(v, p);
    }
    return std::clamp(x + dq * span, lo, hi);
}

}  // namespace

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectiveVector> points) {
    return sort_by(points.size(), [&](std::size_t a, std::size_t b) { return strictly_dominates(points[a], points[b]); });
}

std::vector<std::vector<std::size_t>> constrained_nondominated_sort(std::span<const ObjectiveVector> points,
                                                                    std::span<const double> violations) {
    if (points.size() != violations.size()) throw std::invalid_argument("constrained sort: size mismatch");
    return sort_by(points.size(), [&](std::size_t a, std::size_t b) {
        return cdominates(points[a], violations[a], points[b], violations[b]);
    });
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
    const std::size_t n = front.size();
    if (n == 0) throw std::invalid_argument("crowding_distance: empty front");
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> out(n, 0.0);

    // Distinct vectors, first occurrence wins.
    std::vector<std::size_t> distinct;
    for (std::size_t i = 0; i < n; ++i) {
        bool repeat = false;
        for (auto j : distinct)
            if (front[j] == front[i]) {
                repeat = true;
                break;
            }
        if (!repeat) distinct.push_back(i);
    }
    const std::size_t k = distinct.size();
    if (k <= 2) {
        for (auto i : distinct) out[i] = inf;
        return out;
    }
    const Eigen::Index m = front[0].size();
    std::vector<std::size_t> order(k);
    for (Eigen::Index obj = 0; obj < m; ++obj) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return front[distinct[a]][obj] < front[distinct[b]][obj]; });
        const double lo = front[distinct[order.front()]][obj];
        const double hi = front[distinct[order.back()]][obj];
        out[distinct[order.front()]] = inf;
        out[distinct[order.back()]] = inf;
        if (hi - lo <= 0.0) continue;
        for (std::size_t r = 1; r + 1 < k; ++r) {
            auto& c = out[distinct[order[r]]];
            if (c == inf) continue;
            c += (front[distinct[order[r + 1]]][obj] - front[distinct[order[r - 1]]][obj]) / (hi - lo);
        }
    }
    return out;
}

ParetoArchive evolve(const MixedEvaluator& evaluate, const DesignSpace& space, const Nsga2Config& config,
                     const GenerationCallback& on_generation) {
    if (config.population < 4 || config.population % 2 != 0)
        throw std::invalid_argument("nsga2: population must be even and >= 4");
    const Eigen::VectorXd& lo = space.relaxed_lower();
    const Eigen::VectorXd& hi = space.relaxed_upper();
    const Eigen::Index d = lo.size();
    const double pm = config.mutation_prob >= 0.0 ? config.mutation_prob : 1.0 / static_cast<double>(d);
    Rng rng = make_rng(config.seed, 0x6A);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto make = [&](Eigen::VectorXd genome) {
        Nsga2Individual ind;
        ind.genome = std::move(genome);
        ind.point = space.decode(ind.genome);
        auto e = evaluate(ind.point);
        ind.f = std::move(e.f);
        ind.g = std::move(e.g);
        ind.violation = optim::violation(ind.g);
        return ind;
    };

    auto assign = [&](std::vector<Nsga2Individual>& pop) {
        std::vector<ObjectiveVector> fs;
        std::vector<double> vs;
        for (const auto& ind : pop) {
            fs.push_back(ind.f);
            vs.push_back(ind.violation);
        }
        auto fronts = constrained_nondominated_sort(fs, vs);
        for (std::size_t r = 0; r < fronts.size(); ++r) {
            std::vector<ObjectiveVector> ff;
            for (auto i : fronts[r]) ff.push_back(pop[i].f);
            const auto cd = crowding_distance(ff);
            for (std::size_t k = 0; k < fronts[r].size(); ++k) {
                pop[fronts[r][k]].rank = r;
                pop[fronts[r][k]].crowding = cd[k];
            }
        }
        return fronts;
    };

    std::vector<Nsga2Individual> pop;
    for (const auto& p : space.lhs_sample(config.population, mix_seed(config.seed, 1))) pop.push_back(make(space.encode(p)));
    assign(pop);
    if (on_generation) on_generation(0, pop);

    auto tournament = [&]() -> const Nsga2Individual& {
        const auto& a = pop[static_cast<std::size_t>(unit(rng) * static_cast<double>(pop.size())) % pop.size()];
        const auto& b = pop[static_cast<std::size_t>(unit(rng) * static_cast<double>(pop.size())) % pop.size()];
        if (a.rank != b.rank) return a.rank < b.rank ? a : b;
        if (a.crowding != b.crowding) return a.crowding > b.crowding ? a : b;
        return unit(rng) < 0.5 ? a : b;
    };

    for (std::size_t gen = 1; gen <= config.generations; ++gen) {
        std::vector<Nsga2Individual> offspring;
        while (offspring.size() < config.population) {
            Eigen::VectorXd c1 = tournament().genome;
            Eigen::VectorXd c2 = tournament().genome;
            if (unit(rng) < config.crossover_prob) {
                for (Eigen::Index i = 0; i < d; ++i) {
                    if (unit(rng) > 0.5) continue;
                    const double u = unit(rng);
                    const double a = sbx_child(c1[i], c2[i], lo[i], hi[i], config.crossover_eta, u, true);
                    const double b = sbx_child(c1[i], c2[i], lo[i], hi[i], config.crossover_eta, u, false);
                    if (unit(rng) < 0.5) {
                        c1[i] = a;
                        c2[i] = b;
                    } else {
                        c1[i] = b;
                        c2[i] = a;
                    }
                }
            }
            for (auto* c : {&c1, &c2})
                for (Eigen::Index i = 0; i < d; ++i)
                    if (unit(rng) < pm) (*c)[i] = polynomial_mutation((*c)[i], lo[i], hi[i], config.mutation_eta, unit(rng));
            offspring.push_back(make(std::move(c1)));
            offspring.push_back(make(std::move(c2)));
        }

        std::vector<Nsga2Individual> merged = std::move(pop);
        for (auto& o : offspring) merged.push_back(std::move(o));
        const auto fronts = assign(merged);
        pop.clear();
        for (const auto& front : fronts) {
            if (pop.size() + front.size() <= config.population) {
                for (auto i : front) pop.push_back(merged[i]);
                continue;
            }
            std::vector<std::size_t> order = front;
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return merged[a].crowding > merged[b].crowding; });
            for (std::size_t k = 0; pop.size() < config.population; ++k) pop.push_back(merged[order[k]]);
            break;
        }
        assign(pop);
        if (on_generation) on_generation(gen, pop);
    }

    ParetoArchive out(pop.empty() ? 0 : static_cast<std::size_t>(pop.front().f.size()));
    std::vector<ObjectiveVector> fs;
    std::vector<std::size_t> feasible;
    for (std::size_t i = 0; i < pop.size(); ++i)
        if (pop[i].violation <= 0.0) {
            feasible.push_back(i);
            fs.push_back(pop[i].f);
        }
    std::size_t id = 0;
    for (auto k : nondominated_filter(fs)) {
        const auto& ind = pop[feasible[k]];
        out.add({id++, ind.point, ind.f, ind.g, true});
    }
    return out;
}

}  // namespace mobo
