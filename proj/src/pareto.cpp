#include "mobo/pareto.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace mobo {

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dominates: objective vectors differ in length");
    return (a.array() <= b.array()).all();
}

bool strictly_dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    return dominates(a, b) && (a.array() < b.array()).any();
}

std::vector<std::size_t> nondominated_filter(std::span<const ObjectiveVector> points) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool keep = true;
        for (std::size_t j = 0; j < points.size() && keep; ++j) {
            if (i == j) continue;
            if (strictly_dominates(points[j], points[i])) keep = false;
            else if (j < i && points[j] == points[i]) keep = false;  // duplicate of an earlier vector
        }
        if (keep) out.push_back(i);
    }
    return out;
}

bool tolerance_dominates(const ObjectiveVector& b, const ObjectiveVector& a, const Eigen::VectorXd& tol) {
    if (a.size() != b.size() || a.size() != tol.size()) throw std::invalid_argument("tolerance_dominates: length mismatch");
    return (b.array() <= a.array() + tol.array()).all() && (b.array() < a.array() - tol.array()).any();
}

std::vector<std::size_t> tolerance_filter(std::span<const ObjectiveVector> points, const Eigen::VectorXd& tol) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> key(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) key[i] = points[i].cwiseQuotient(tol).sum();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    std::vector<std::size_t> kept;
    for (auto i : order) {
        bool keep = true;
        for (auto k : kept)
            if (tolerance_dominates(points[k], points[i], tol)) {
                keep = false;
                break;
            }
        if (keep) kept.push_back(i);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

ObjectiveVector reference_point(std::span<const ObjectiveVector> points) {
    if (points.empty()) throw std::invalid_argument("reference_point: no points");
    ObjectiveVector hi = points.front();
    ObjectiveVector lo = points.front();
    for (const auto& p : points) {
        hi = hi.cwiseMax(p);
        lo = lo.cwiseMin(p);
    }
    return (hi + 0.1 * (hi - lo)).array() + 1e-6;
}

void ParetoArchive::add(ArchiveEntry entry) {
    if (n_objectives_ == 0) n_objectives_ = static_cast<std::size_t>(entry.f.size());
    if (static_cast<std::size_t>(entry.f.size()) != n_objectives_)
        throw std::invalid_argument("archive: objective count mismatch");
    if (!entry.f.allFinite()) throw std::invalid_argument("archive: non-finite objective values");
    entries_.push_back(std::move(entry));
    refresh_front();
}

void ParetoArchive::refresh_front() {
    std::vector<std::size_t> feasible;
    std::vector<ObjectiveVector> objs;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].feasible) {
            feasible.push_back(i);
            objs.push_back(entries_[i].f);
        }
    front_.clear();
    for (auto k : nondominated_filter(objs)) front_.push_back(feasible[k]);
}

std::vector<ObjectiveVector> ParetoArchive::front() const {
    std::vector<ObjectiveVector> out;
    for (auto i : front_) out.push_back(entries_[i].f);
    return out;
}

std::vector<ObjectiveVector> ParetoArchive::feasible_objectives() const {
    std::vector<ObjectiveVector> out;
    for (const auto& e : entries_)
        if (e.feasible) out.push_back(e.f);
    return out;
}

bool ParetoArchive::on_front(std::size_t index) const {
    for (auto i : front_)
        if (i == index) return true;
    return false;
}

ObjectiveVector ParetoArchive::reference_point() const {
    auto objs = feasible_objectives();
    if (objs.empty())
        for (const auto& e : entries_) objs.push_back(e.f);
    return mobo::reference_point(objs);
}

void write_front_csv(std::ostream& os, const ParetoArchive& archive, std::size_t n_constraints) {
    os << "point_id";
    for (std::size_t i = 0; i < archive.n_objectives(); ++i) os << ",f" << i + 1;
    for (std::size_t j = 0; j < n_constraints; ++j) os << ",g" << j + 1;
    os << ",feasible,on_front\n";
    const auto old = os.precision(17);
    for (std::size_t k = 0; k < archive.size(); ++k) {
        const auto& e = archive.entries()[k];
        os << e.id;
        for (Eigen::Index i = 0; i < e.f.size(); ++i) os << ',' << e.f[i];
        for (std::size_t j = 0; j < n_constraints; ++j) {
            os << ',';
            if (static_cast<Eigen::Index>(j) < e.g.size()) os << e.g[static_cast<Eigen::Index>(j)];
        }
        os << ',' << (e.feasible ? 1 : 0) << ',' << (archive.on_front(k) ? 1 : 0) << '\n';
    }
    os.precision(old);
}

}  // namespace mobo
