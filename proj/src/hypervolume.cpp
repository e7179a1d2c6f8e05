#include "mobo/hypervolume.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

#include "mobo/random.hpp"

namespace mobo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<ObjectiveVector> inside(std::span<const ObjectiveVector> front, const ObjectiveVector& ref) {
    std::vector<ObjectiveVector> out;
    for (const auto& p : front) {
        if (p.size() != ref.size()) throw std::invalid_argument("hypervolume: dimension mismatch");
        if ((p.array() < ref.array()).all()) out.push_back(p);
    }
    return out;
}

// Staircase sweep over (x, y) pairs.
double sweep_2d(std::vector<std::pair<double, double>> pts, double rx, double ry) {
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    double cur = ry;
    for (const auto& [x, y] : pts) {
        if (y < cur) {
            area += (rx - x) * (cur - y);
            cur = y;
        }
    }
    return area;
}

double slice_3d(std::vector<ObjectiveVector> pts, const ObjectiveVector& ref) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a[2] < b[2]; });
    double volume = 0.0;
    std::vector<std::pair<double, double>> active;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        active.emplace_back(pts[i][0], pts[i][1]);
        const double top = i + 1 < pts.size() ? pts[i + 1][2] : ref[2];
        if (top > pts[i][2]) volume += sweep_2d(active, ref[0], ref[1]) * (top - pts[i][2]);
    }
    return volume;
}

}  // namespace

HypervolumeResult hypervolume(std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                              const HypervolumeOptions& options) {
    const auto n = static_cast<std::size_t>(ref.size());
    if (n == 0) throw std::invalid_argument("hypervolume: zero objectives");
    const auto pts = inside(front, ref);
    if (pts.empty()) return {0.0, 0.0};
    if (n == 1) {
        double m = ref[0];
        for (const auto& p : pts) m = std::min(m, p[0]);
        return {ref[0] - m, 0.0};
    }
    if (n == 2) {
        std::vector<std::pair<double, double>> xy;
        for (const auto& p : pts) xy.emplace_back(p[0], p[1]);
        return {sweep_2d(std::move(xy), ref[0], ref[1]), 0.0};
    }
    if (n == 3) return {slice_3d(pts, ref), 0.0};

    ObjectiveVector lo = pts.front();
    for (const auto& p : pts) lo = lo.cwiseMin(p);
    const Eigen::VectorXd width = ref - lo;
    const double box = width.prod();
    Rng rng = make_rng(options.seed, 0x4F);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t hits = 0;
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < options.mc_samples; ++s) {
        for (std::size_t a = 0; a < n; ++a) z[static_cast<Eigen::Index>(a)] = lo[static_cast<Eigen::Index>(a)] + width[static_cast<Eigen::Index>(a)] * unit(rng);
        for (const auto& p : pts)
            if ((p.array() <= z.array()).all()) {
                ++hits;
                break;
            }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(options.mc_samples);
    return {box * frac, box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(options.mc_samples))};
}

double hypervolume_improvement(std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                               const ObjectiveVector& candidate) {
    if (candidate.size() != ref.size()) throw std::invalid_argument("hypervolume_improvement: dimension mismatch");
    if (!(candidate.array() < ref.array()).all()) return 0.0;
    for (const auto& p : front)
        if (dominates(p, candidate)) return 0.0;
    if (auto boxes = NondominatedBoxes::build(front, ref)) {
        return boxes->integrate([&](std::size_t a, const std::vector<double>& t, std::vector<double>& g) {
            const double c = candidate[static_cast<Eigen::Index>(a)];
            for (std::size_t k = 0; k < t.size(); ++k) g[k] = t[k] > c ? t[k] - c : 0.0;
        });
    }
    std::vector<ObjectiveVector> extended(front.begin(), front.end());
    extended.push_back(candidate);
    return std::max(0.0, hypervolume(extended, ref).value - hypervolume(front, ref).value);
}

std::optional<NondominatedBoxes> NondominatedBoxes::build(std::span<const ObjectiveVector> front,
                                                          const Eigen::VectorXd& upper, std::size_t max_boxes) {
    const auto n = static_cast<std::size_t>(upper.size());
    if (n == 0) throw std::invalid_argument("NondominatedBoxes: zero objectives");
    std::vector<ObjectiveVector> pts;
    for (const auto& p : front) {
        if (static_cast<std::size_t>(p.size()) != n) throw std::invalid_argument("NondominatedBoxes: dimension mismatch");
        if ((p.array() < upper.array()).all()) pts.push_back(p);
    }
    // Only nondominated points shape the region.
    {
        auto keep = nondominated_filter(pts);
        std::vector<ObjectiveVector> nd;
        for (auto k : keep) nd.push_back(pts[k]);
        pts = std::move(nd);
    }

    NondominatedBoxes out;
    out.coords_.resize(n);
    std::size_t columns = 1;
    for (std::size_t a = 0; a < n; ++a) {
        auto& c = out.coords_[a];
        c.push_back(-kInf);
        for (const auto& p : pts) c.push_back(p[static_cast<Eigen::Index>(a)]);
        std::sort(c.begin() + 1, c.end());
        c.erase(std::unique(c.begin() + 1, c.end()), c.end());
        c.push_back(upper[static_cast<Eigen::Index>(a)]);
        if (a + 1 < n) {
            columns *= c.size() - 1;
            if (columns > 50 * max_boxes) return std::nullopt;
        }
    }

    const std::size_t last = n - 1;
    std::vector<std::uint32_t> cell(n - 1, 0);
    while (true) {
        // Lowest last-axis value among points dominating the column's corner.
        double t = upper[static_cast<Eigen::Index>(last)];
        for (const auto& p : pts) {
            bool dom = true;
            for (std::size_t a = 0; a < last && dom; ++a) dom = p[static_cast<Eigen::Index>(a)] <= out.coords_[a][cell[a]];
            if (dom) t = std::min(t, p[static_cast<Eigen::Index>(last)]);
        }
        const auto& lc = out.coords_[last];
        const auto hi_last = static_cast<std::uint32_t>(std::lower_bound(lc.begin() + 1, lc.end(), t) - lc.begin());
        // Columns adjacent along the innermost axis with equal height merge
        // into one box.
        const std::size_t inner = last - (last > 0 ? 1 : 0);
        bool merged = false;
        if (last > 0 && out.n_boxes_ > 0 && cell[inner] > 0) {
            const std::size_t b = (out.n_boxes_ - 1) * n;
            merged = out.hi_[b + last] == hi_last && out.hi_[b + inner] == cell[inner];
            for (std::size_t a = 0; a < inner && merged; ++a) merged = out.lo_[b + a] == cell[a];
            if (merged) out.hi_[b + inner] = cell[inner] + 1;
        }
        if (!merged) {
            for (std::size_t a = 0; a < last; ++a) {
                out.lo_.push_back(cell[a]);
                out.hi_.push_back(cell[a] + 1);
            }
            out.lo_.push_back(0);
            out.hi_.push_back(hi_last);
            ++out.n_boxes_;
        }

        bool done = true;
        for (std::size_t a = last; a-- > 0;) {
            if (cell[a] + 2 < out.coords_[a].size()) {
                ++cell[a];
                done = false;
                break;
            }
            cell[a] = 0;
        }
        if (done) break;
    }
    out.merge();
    if (out.n_boxes_ > max_boxes) return std::nullopt;
    return out;
}

void NondominatedBoxes::merge() {
    const std::size_t n = coords_.size();
    if (n < 3) return;
    std::vector<std::size_t> order(n_boxes_);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t axis = 0; axis + 1 < n; ++axis) {
            // Boxes equal on every other axis and touching along `axis` fuse.
            auto key_less = [&](std::size_t x, std::size_t y) {
                for (std::size_t a = 0; a < n; ++a) {
                    if (a == axis) continue;
                    if (lo_[x * n + a] != lo_[y * n + a]) return lo_[x * n + a] < lo_[y * n + a];
                    if (hi_[x * n + a] != hi_[y * n + a]) return hi_[x * n + a] < hi_[y * n + a];
                }
                return lo_[x * n + axis] < lo_[y * n + axis];
            };
            auto same_key = [&](std::size_t x, std::size_t y) {
                for (std::size_t a = 0; a < n; ++a)
                    if (a != axis && (lo_[x * n + a] != lo_[y * n + a] || hi_[x * n + a] != hi_[y * n + a])) return false;
                return true;
            };
            order.resize(n_boxes_);
            for (std::size_t b = 0; b < n_boxes_; ++b) order[b] = b;
            std::sort(order.begin(), order.end(), key_less);
            std::vector<std::uint32_t> lo, hi;
            lo.reserve(lo_.size());
            hi.reserve(hi_.size());
            std::size_t count = 0;
            for (std::size_t k = 0; k < order.size(); ++k) {
                const std::size_t b = order[k];
                if (count > 0) {
                    const std::size_t prev = order[k - 1];
                    const std::size_t last = (count - 1) * n;
                    if (same_key(prev, b) && hi[last + axis] == lo_[b * n + axis]) {
                        hi[last + axis] = hi_[b * n + axis];
                        changed = true;
                        continue;
                    }
                }
                lo.insert(lo.end(), lo_.begin() + static_cast<std::ptrdiff_t>(b * n), lo_.begin() + static_cast<std::ptrdiff_t>(b * n + n));
                hi.insert(hi.end(), hi_.begin() + static_cast<std::ptrdiff_t>(b * n), hi_.begin() + static_cast<std::ptrdiff_t>(b * n + n));
                ++count;
            }
            lo_ = std::move(lo);
            hi_ = std::move(hi);
            n_boxes_ = count;
        }
    }
}

}  // namespace mobo
