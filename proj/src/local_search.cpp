#include "mobo/local_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/LU>

namespace mobo::optim {

double violation(const Eigen::VectorXd& constraints) {
    return constraints.size() == 0 ? 0.0 : constraints.cwiseMax(0.0).sum();
}

namespace {

struct Vertex {
    Eigen::VectorXd y;  // unit-box coordinates
    double f = 0.0;
    Eigen::VectorXd c;
    double v = 0.0;
};

class Solver {
public:
    Solver(const BoxProblem& problem, const LocalSearchOptions& options)
        : problem_(problem), opt_(options), n_(problem.lower.size()) {
        width_ = problem.upper - problem.lower;
        for (Eigen::Index i = 0; i < n_; ++i)
            if (!(width_[i] >= 0.0) || !std::isfinite(width_[i]))
                throw std::invalid_argument("local search: bounds must be finite with lower <= upper");
    }

    LocalSearchResult run(const Eigen::VectorXd& x0) {
        Eigen::VectorXd y0(n_);
        for (Eigen::Index i = 0; i < n_; ++i)
            y0[i] = width_[i] > 0.0 ? std::clamp((x0[i] - problem_.lower[i]) / width_[i], 0.0, 1.0) : 0.0;
        best_ = eval(y0);
        double rho = opt_.rho_begin;
        if (n_ > 0) build_simplex(rho);

        while (n_ > 0 && evals_ < opt_.max_evals && rho >= opt_.rho_end) {
            Eigen::VectorXd g;
            Eigen::MatrixXd gc;
            if (!fit_models(rho, g, gc)) {
                build_simplex(rho);
                continue;
            }
            Eigen::VectorXd d = direction(g, gc, rho);
            const double norm = d.norm();
            Eigen::VectorXd yt;
            if (norm > 0.0 && std::isfinite(norm)) yt = (best_.y - (rho / norm) * d).cwiseMax(0.0).cwiseMin(1.0);
            if (yt.size() == 0 || (yt - best_.y).norm() < 1e-15) {
                rho *= 0.25;
                if (rho >= opt_.rho_end) build_simplex(rho);
                continue;
            }
            Vertex trial = eval(yt);
            if (better(trial, best_)) {
                simplex_[farthest()] = std::move(best_);
                best_ = std::move(trial);
            } else {
                rho *= 0.25;
                if (rho >= opt_.rho_end) build_simplex(rho);
            }
        }

        LocalSearchResult r;
        r.x = problem_.lower + width_.cwiseProduct(best_.y);
        r.objective = best_.f;
        r.constraints = best_.c;
        r.violation = best_.v;
        r.feasible = best_.v <= opt_.feasibility_tol;
        r.evals = evals_;
        return r;
    }

private:
    Vertex eval(const Eigen::VectorXd& y) {
        ++evals_;
        Vertex v;
        v.y = y;
        Evaluation e = problem_.evaluate(problem_.lower + width_.cwiseProduct(y));
        v.f = std::isfinite(e.objective) ? e.objective : std::numeric_limits<double>::max();
        v.c = std::move(e.constraints);
        for (Eigen::Index j = 0; j < v.c.size(); ++j)
            if (!std::isfinite(v.c[j])) v.c[j] = std::numeric_limits<double>::max();
        v.v = violation(v.c);
        return v;
    }

    bool better(const Vertex& a, const Vertex& b) const {
        if (std::max(a.v, b.v) > opt_.feasibility_tol && a.v != b.v) return a.v < b.v;
        return a.f < b.f;
    }

    void build_simplex(double rho) {
        simplex_.clear();
        for (Eigen::Index i = 0; i < n_ && evals_ < opt_.max_evals; ++i) {
            Eigen::VectorXd y = best_.y;
            y[i] += (y[i] + rho <= 1.0) ? rho : -rho;
            simplex_.push_back(eval(y));
        }
        for (auto& v : simplex_)
            if (better(v, best_)) std::swap(v, best_);
    }

    std::size_t farthest() const {
        std::size_t k = 0;
        double dmax = -1.0;
        for (std::size_t i = 0; i < simplex_.size(); ++i) {
            const double d = (simplex_[i].y - best_.y).squaredNorm();
            if (d > dmax) {
                dmax = d;
                k = i;
            }
        }
        return k;
    }

    bool fit_models(double rho, Eigen::VectorXd& g, Eigen::MatrixXd& gc) const {
        if (simplex_.size() != static_cast<std::size_t>(n_)) return false;
        const Eigen::Index m = best_.c.size();
        Eigen::MatrixXd dy(n_, n_);
        Eigen::VectorXd df(n_);
        Eigen::MatrixXd dc(n_, m);
        for (Eigen::Index i = 0; i < n_; ++i) {
            const auto& v = simplex_[static_cast<std::size_t>(i)];
            dy.row(i) = (v.y - best_.y).transpose();
            if (dy.row(i).norm() > 3.0 * rho) return false;
            df[i] = v.f - best_.f;
            if (m > 0) dc.row(i) = (v.c - best_.c).transpose();
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(dy);
        if (!(lu.rcond() > 1e-10)) return false;
        g = lu.solve(df);
        gc = m > 0 ? Eigen::MatrixXd(lu.solve(dc)) : Eigen::MatrixXd(n_, 0);
        return g.allFinite() && gc.allFinite();
    }

    Eigen::VectorXd direction(const Eigen::VectorXd& g, const Eigen::MatrixXd& gc, double rho) const {
        const Eigen::Index m = gc.cols();
        Eigen::VectorXd d;
        if (best_.v > opt_.feasibility_tol) {
            d = Eigen::VectorXd::Zero(n_);
            for (Eigen::Index j = 0; j < m; ++j)
                if (best_.c[j] > 0.0) d += gc.col(j);
        } else {
            d = g;
            // Remove components that would push nearly active constraints
            // past zero, Gram-Schmidt over the growing active set.
            std::vector<Eigen::VectorXd> basis;
            std::vector<bool> used(static_cast<std::size_t>(m), false);
            for (Eigen::Index pass = 0; pass < m; ++pass) {
                const double nd = d.norm();
                if (nd == 0.0) break;
                const Eigen::VectorXd s = -(rho / nd) * d;
                Eigen::Index hit = -1;
                for (Eigen::Index j = 0; j < m; ++j) {
                    if (used[static_cast<std::size_t>(j)]) continue;
                    const double slope = gc.col(j).dot(s);
                    if (slope > 0.0 && best_.c[j] + slope > 0.0) {
                        hit = j;
                        break;
                    }
                }
                if (hit < 0) break;
                used[static_cast<std::size_t>(hit)] = true;
                Eigen::VectorXd q = gc.col(hit);
                for (const auto& b : basis) q -= q.dot(b) * b;
                const double nq = q.norm();
                if (nq < 1e-14) continue;
                q /= nq;
                basis.push_back(q);
                d -= d.dot(q) * q;
            }
        }
        for (Eigen::Index i = 0; i < n_; ++i) {
            if ((best_.y[i] <= 0.0 && d[i] > 0.0) || (best_.y[i] >= 1.0 && d[i] < 0.0) || width_[i] == 0.0) d[i] = 0.0;
        }
        return d;
    }

    const BoxProblem& problem_;
    LocalSearchOptions opt_;
    Eigen::Index n_;
    Eigen::VectorXd width_;
    Vertex best_;
    std::vector<Vertex> simplex_;
    std::size_t evals_ = 0;
};

}  // namespace

LocalSearchResult minimize(const BoxProblem& problem, const Eigen::VectorXd& x0, const LocalSearchOptions& options) {
    if (problem.lower.size() != problem.upper.size() || x0.size() != problem.lower.size())
        throw std::invalid_argument("local search: dimension mismatch");
    Solver solver(problem, options);
    return solver.run(x0);
}

}  // namespace mobo::optim
