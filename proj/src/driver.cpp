#include "mobo/driver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "mobo/local_search.hpp"
#include "mobo/random.hpp"

namespace mobo {

namespace {

// Seed streams.
constexpr std::uint64_t kDoeStream = 0xD0E;
constexpr std::uint64_t kAskStream = 0xA5C;
constexpr std::uint64_t kFinalStream = 0xF1A;
// Predicted points within this fraction of an objective's spread are not told
// apart; it suppresses fronts spread along surrogate round-off.
constexpr double kPredictedFrontTolerance = 1e-3;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

template <class T>
T take(const nlohmann::json& obj, const char* key, T fallback, std::vector<std::string>& issues,
       const std::string& path) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        issues.push_back(path + key + ": wrong type");
        return fallback;
    }
}

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known, const std::string& path,
                    std::vector<std::string>& issues) {
    for (const auto& [key, _] : obj.items())
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            issues.push_back(path + key + ": unknown field");
}

}  // namespace

const char* to_string(Origin o) { return o == Origin::doe ? "doe" : "infill"; }
const char* to_string(EvalStatus s) { return s == EvalStatus::ok ? "ok" : "failed"; }
const char* to_string(Phase p) {
    switch (p) {
    case Phase::doe: return "doe";
    case Phase::enrich: return "enrich";
    case Phase::done: return "done";
    }
    return "?";
}

void RunConfig::validate() const {
    if (space.size() == 0) throw std::invalid_argument("config.space: empty design space");
    if (n_objectives < 1) throw std::invalid_argument("config.n_objectives: must be >= 1");
    if (!maximize.empty() && maximize.size() != n_objectives)
        throw std::invalid_argument("config.maximize: must have one flag per objective");
    if (doe_size < 2) throw std::invalid_argument("config.doe_size: must be >= 2");
    if (budget < doe_size) throw std::invalid_argument("config.budget: must be >= doe_size");
    if (!(acquisition.gamma > 0.0)) throw std::invalid_argument("config.acquisition.gamma: must be > 0");
    if (!(kernel.nugget > 0.0)) throw std::invalid_argument("config.kernel.nugget: must be > 0");
    if (nsga2.population < 4 || nsga2.population % 2) throw std::invalid_argument("config.nsga2.population: even and >= 4");
    if (infill.n_starts < 1) throw std::invalid_argument("config.infill.n_starts: must be >= 1");
}

nlohmann::json RunConfig::to_json() const {
    return {{"n_objectives", n_objectives},
            {"n_constraints", n_constraints},
            {"maximize", maximize},
            {"doe_size", doe_size},
            {"budget", budget},
            {"seed", seed},
            {"acquisition",
             {{"criterion", to_string(acquisition.criterion)},
              {"reg", to_string(acquisition.reg)},
              {"gamma", acquisition.gamma}}},
            {"kernel", {{"family", to_string(kernel.family)}, {"n_pls", kernel.n_pls}, {"nugget", kernel.nugget}}},
            {"infill", {{"n_starts", infill.n_starts}, {"max_evals_per_start", infill.max_evals_per_start}}},
            {"nsga2", {{"population", nsga2.population}, {"generations", nsga2.generations}}}};
}

RunConfig RunConfig::from_json(const nlohmann::json& doc, DesignSpace space) {
    std::vector<std::string> issues;
    if (!doc.is_object()) throw SchemaError({"config: expected an object"});
    reject_unknown(doc,
                   {"n_objectives", "n_constraints", "maximize", "doe_size", "budget", "seed", "acquisition", "kernel",
                    "infill", "nsga2"},
                   "config.", issues);
    RunConfig c;
    c.space = std::move(space);
    c.n_objectives = take<std::size_t>(doc, "n_objectives", c.n_objectives, issues, "config.");
    c.n_constraints = take<std::size_t>(doc, "n_constraints", c.n_constraints, issues, "config.");
    c.maximize = take<std::vector<bool>>(doc, "maximize", {}, issues, "config.");
    c.doe_size = take<std::size_t>(doc, "doe_size", c.doe_size, issues, "config.");
    c.budget = take<std::size_t>(doc, "budget", c.budget, issues, "config.");
    c.seed = take<std::uint64_t>(doc, "seed", c.seed, issues, "config.");
    if (doc.contains("acquisition")) {
        const auto& a = doc["acquisition"];
        if (!a.is_object()) {
            issues.emplace_back("config.acquisition: expected an object");
        } else {
            reject_unknown(a, {"criterion", "reg", "gamma"}, "config.acquisition.", issues);
            try {
                c.acquisition.criterion = criterion_from_string(take<std::string>(a, "criterion", "ehvi", issues, "config.acquisition."));
                c.acquisition.reg = regularization_from_string(take<std::string>(a, "reg", "none", issues, "config.acquisition."));
            } catch (const std::invalid_argument& e) {
                issues.push_back(std::string("config.acquisition: ") + e.what());
            }
            c.acquisition.gamma = take<double>(a, "gamma", 1.0, issues, "config.acquisition.");
        }
    }
    if (doc.contains("kernel")) {
        const auto& k = doc["kernel"];
        if (!k.is_object()) {
            issues.emplace_back("config.kernel: expected an object");
        } else {
            reject_unknown(k, {"family", "n_pls", "nugget"}, "config.kernel.", issues);
            try {
                c.kernel.family = kernel_family_from_string(take<std::string>(k, "family", "squared_exponential", issues, "config.kernel."));
            } catch (const std::invalid_argument& e) {
                issues.push_back(std::string("config.kernel.family: ") + e.what());
            }
            c.kernel.n_pls = take<std::size_t>(k, "n_pls", c.kernel.n_pls, issues, "config.kernel.");
            c.kernel.nugget = take<double>(k, "nugget", c.kernel.nugget, issues, "config.kernel.");
        }
    }
    if (doc.contains("infill")) {
        const auto& k = doc["infill"];
        reject_unknown(k, {"n_starts", "max_evals_per_start"}, "config.infill.", issues);
        c.infill.n_starts = take<std::size_t>(k, "n_starts", c.infill.n_starts, issues, "config.infill.");
        c.infill.max_evals_per_start = take<std::size_t>(k, "max_evals_per_start", 0, issues, "config.infill.");
    }
    if (doc.contains("nsga2")) {
        const auto& k = doc["nsga2"];
        reject_unknown(k, {"population", "generations"}, "config.nsga2.", issues);
        c.nsga2.population = take<std::size_t>(k, "population", c.nsga2.population, issues, "config.nsga2.");
        c.nsga2.generations = take<std::size_t>(k, "generations", c.nsga2.generations, issues, "config.nsga2.");
    }
    if (!issues.empty()) throw SchemaError(std::move(issues));
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError({e.what()});
    }
    return c;
}

RunConfig RunConfig::from_snapshot(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("space")) throw SchemaError({"config.space: missing"});
    nlohmann::json rest = doc;
    rest.erase("space");
    return from_json(rest, DesignSpace::from_json(doc["space"]));
}

std::string ProximityReport::summary() const {
    std::ostringstream os;
    os << "combined front: " << database_survivors << " of " << database_total << " database points + "
       << predicted_survivors << " of " << predicted_total << " predicted points";
    return os.str();
}

Optimizer::Optimizer(RunConfig config) : config_(std::move(config)), archive_(config_.n_objectives) {
    config_.validate();
    config_.acquisition.seed = config_.seed;
    doe_ = config_.space.lhs_sample(config_.doe_size, mix_seed(config_.seed, kDoeStream));
}

ObjectiveVector Optimizer::to_minimization(const Eigen::VectorXd& f) const {
    ObjectiveVector out = f;
    for (std::size_t i = 0; i < config_.maximize.size(); ++i)
        if (config_.maximize[i]) out[static_cast<Eigen::Index>(i)] = -out[static_cast<Eigen::Index>(i)];
    return out;
}

bool Optimizer::is_feasible(const Eigen::VectorXd& g) const { return g.size() == 0 || g.maxCoeff() <= 0.0; }

MixedPoint Optimizer::ask() {
    if (pending_) throw ProtocolError(ProtocolError::Kind::pending_outstanding, "pending evaluation");
    if (phase_ == Phase::done || history_.size() >= config_.budget)
        throw ProtocolError(ProtocolError::Kind::budget_exhausted, "budget exhausted");
    MixedPoint p;
    if (history_.size() < doe_.size()) {
        p = doe_[history_.size()];
        pending_origin_ = Origin::doe;
    } else {
        p = next_infill();
        pending_origin_ = Origin::infill;
    }
    pending_ = p;
    ++n_asks_;
    return p;
}

void Optimizer::restore_pending(const MixedPoint& p) {
    if (pending_) throw ProtocolError(ProtocolError::Kind::pending_outstanding, "pending evaluation");
    if (phase_ == Phase::done) throw ProtocolError(ProtocolError::Kind::budget_exhausted, "budget exhausted");
    if (!config_.space.contains(p)) throw std::invalid_argument("restore_pending: point not valid in design space");
    pending_ = p;
    pending_origin_ = history_.size() < doe_.size() ? Origin::doe : Origin::infill;
    ++n_asks_;
}

TellOutcome Optimizer::tell(const MixedPoint& p, const Eigen::VectorXd& f, const Eigen::VectorXd& g, EvalStatus status) {
    if (!pending_) throw ProtocolError(ProtocolError::Kind::no_pending, "no pending evaluation");
    if (!(p == *pending_)) throw ProtocolError(ProtocolError::Kind::point_mismatch, "told point differs from pending ask");
    const bool has_values = f.size() > 0 || g.size() > 0;
    if (status == EvalStatus::ok || has_values) {
        if (static_cast<std::size_t>(f.size()) != config_.n_objectives ||
            static_cast<std::size_t>(g.size()) != config_.n_constraints)
            throw ProtocolError(ProtocolError::Kind::arity, "expected " + std::to_string(config_.n_objectives) +
                                                                " objectives and " + std::to_string(config_.n_constraints) +
                                                                " constraints");
    }
    HistoryEntry e;
    e.index = history_.size();
    e.point = p;
    e.f = f;
    e.g = g;
    e.origin = *pending_origin_;
    e.status = status;
    if (status == EvalStatus::ok && !(f.allFinite() && g.allFinite())) e.status = EvalStatus::failed;
    e.feasible = e.status == EvalStatus::ok && is_feasible(g);
    e.timestamp = std::chrono::system_clock::now();
    const auto outcome = e.status == status ? TellOutcome::recorded : TellOutcome::recorded_as_failed;
    pending_.reset();
    pending_origin_.reset();
    record(std::move(e));
    return outcome;
}

void Optimizer::record(HistoryEntry entry) {
    if (entry.status == EvalStatus::ok)
        archive_.add({entry.index, entry.point, to_minimization(entry.f), entry.g, entry.feasible});
    history_.push_back(std::move(entry));
    if (history_.size() >= config_.budget)
        phase_ = Phase::done;
    else if (history_.size() >= doe_.size())
        phase_ = Phase::enrich;
}

void Optimizer::restore_history(const std::vector<HistoryEntry>& entries) {
    if (pending_) throw ProtocolError(ProtocolError::Kind::pending_outstanding, "pending evaluation");
    for (auto e : entries) {
        if (history_.size() >= config_.budget) throw ProtocolError(ProtocolError::Kind::budget_exhausted, "budget exhausted");
        if (!config_.space.contains(e.point)) throw std::invalid_argument("restore_history: invalid point");
        e.index = history_.size();
        ++n_asks_;
        record(std::move(e));
    }
}

MixedPoint Optimizer::space_filling_point(std::uint64_t seed) const {
    std::vector<MixedPoint> evaluated;
    for (const auto& h : history_) evaluated.push_back(h.point);
    // An already evaluated candidate forces the guard to pick a fresh point.
    const Eigen::VectorXd seed_point = evaluated.empty() ? config_.space.encode(doe_.front())
                                                         : config_.space.encode(evaluated.front());
    auto r = dedup_guard(config_.space, seed_point, evaluated, seed);
    return config_.space.decode(r.x);
}

MixedPoint Optimizer::next_infill() {
    const std::uint64_t seed = mix_seed(config_.seed, kAskStream + 7919 * history_.size());
    const auto& space = config_.space;
    std::vector<const HistoryEntry*> ok;
    for (const auto& h : history_)
        if (h.status == EvalStatus::ok) ok.push_back(&h);
    if (ok.size() < 2) return space_filling_point(seed);

    const auto d = static_cast<Eigen::Index>(space.relaxed_dimension());
    const auto n = static_cast<Eigen::Index>(ok.size());
    Eigen::MatrixXd X(n, d);
    Eigen::MatrixXd F(n, static_cast<Eigen::Index>(config_.n_objectives));
    Eigen::MatrixXd G(n, static_cast<Eigen::Index>(config_.n_constraints));
    std::vector<ObjectiveVector> fmin;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& h = *ok[static_cast<std::size_t>(i)];
        X.row(i) = space.encode(h.point).transpose();
        fmin.push_back(to_minimization(h.f));
        F.row(i) = fmin.back().transpose();
        if (G.cols() > 0) G.row(i) = h.g.transpose();
    }

    KernelConfig kernel = config_.kernel;
    kernel.n_pls = std::min<std::size_t>({kernel.n_pls, static_cast<std::size_t>(d), static_cast<std::size_t>(n - 1)});
    MultiOutputSurrogate models;
    try {
        models = MultiOutputSurrogate::fit(X, F, G, kernel, seed, config_.fit);
    } catch (const std::exception&) {
        return space_filling_point(seed);
    }

    const Standardizer stand = Standardizer::fit(fmin);
    const ObjectiveVector ref = archive_.reference_point();
    references_.push_back(ref);
    std::vector<ObjectiveVector> front;
    for (const auto& f : archive_.front()) front.push_back(stand.apply(f));
    AcquisitionConfig acfg = config_.acquisition;
    acfg.seed = seed;
    const Acquisition acquisition(acfg, front, stand.apply(ref), Standardizer::identity(config_.n_objectives));

    InfillProblem problem;
    problem.lower = space.relaxed_lower();
    problem.upper = space.relaxed_upper();
    problem.space = &space;
    Eigen::VectorXd means, sigmas;
    problem.acquisition = [&](const Eigen::VectorXd& x) {
        models.predict_objectives(x, means, sigmas);
        return acquisition(stand.apply(means), stand.apply_sigma(sigmas));
    };
    if (config_.n_constraints > 0) problem.constraints = [&](const Eigen::VectorXd& x) { return models.constraint_means(x); };
    for (auto idx : archive_.front_indices()) problem.archive_points.push_back(space.encode(archive_.entries()[idx].point));

    const InfillResult best = solve_infill(problem, config_.infill, seed);

    std::vector<MixedPoint> evaluated;
    for (const auto& h : history_) evaluated.push_back(h.point);
    std::function<bool(const Eigen::VectorXd&)> feasible;
    if (config_.n_constraints > 0)
        feasible = [&](const Eigen::VectorXd& x) {
            return models.constraint_means(x).maxCoeff() <= config_.infill.constraint_tol;
        };
    const DedupResult guarded = dedup_guard(space, best.x, evaluated, seed, feasible);
    return space.decode(guarded.x);
}

RunOutputs Optimizer::finalize(bool force) const {
    if (phase_ != Phase::done && !force) throw ProtocolError(ProtocolError::Kind::not_done, "run not finished");
    RunOutputs out;
    out.pf_database = ParetoArchive(config_.n_objectives);
    out.predicted_pf = ParetoArchive(config_.n_objectives);
    for (auto idx : archive_.front_indices()) out.pf_database.add(archive_.entries()[idx]);
    if (out.pf_database.empty()) out.warnings.emplace_back("no feasible evaluated point: pf_database is empty");
    if (!archive_.empty()) out.reference = archive_.reference_point();

    const auto& space = config_.space;
    std::vector<const ArchiveEntry*> ok;
    for (const auto& e : archive_.entries()) ok.push_back(&e);
    std::vector<ObjectiveVector> fmin;
    for (auto* e : ok) fmin.push_back(e->f);

    if (ok.size() >= 2) {
        const auto d = static_cast<Eigen::Index>(space.relaxed_dimension());
        const auto n = static_cast<Eigen::Index>(ok.size());
        Eigen::MatrixXd X(n, d);
        Eigen::MatrixXd F(n, static_cast<Eigen::Index>(config_.n_objectives));
        Eigen::MatrixXd G(n, static_cast<Eigen::Index>(config_.n_constraints));
        for (Eigen::Index i = 0; i < n; ++i) {
            X.row(i) = space.encode(ok[static_cast<std::size_t>(i)]->point).transpose();
            F.row(i) = fmin[static_cast<std::size_t>(i)].transpose();
            if (G.cols() > 0) G.row(i) = ok[static_cast<std::size_t>(i)]->g.transpose();
        }
        KernelConfig kernel = config_.kernel;
        kernel.n_pls = std::min<std::size_t>({kernel.n_pls, static_cast<std::size_t>(d), static_cast<std::size_t>(n - 1)});
        const std::uint64_t seed = mix_seed(config_.seed, kFinalStream);
        try {
            const auto models = MultiOutputSurrogate::fit(X, F, G, kernel, seed, config_.fit);
            Nsga2Config nsga = config_.nsga2;
            nsga.seed = seed;
            out.predicted_pf = evolve(
                [&](const MixedPoint& p) {
                    const Eigen::VectorXd x = space.encode(p);
                    PointEvaluation e;
                    e.f.resize(static_cast<Eigen::Index>(models.objectives.size()));
                    for (std::size_t i = 0; i < models.objectives.size(); ++i)
                        e.f[static_cast<Eigen::Index>(i)] = models.objectives[i].predict_mean(x);
                    e.g = models.constraint_means(x);
                    return e;
                },
                space, nsga);
            const Eigen::VectorXd tol = kPredictedFrontTolerance * Standardizer::fit(fmin).scale;
            const auto raw = out.predicted_pf;
            const auto raw_front = raw.front();
            out.predicted_pf = ParetoArchive(config_.n_objectives);
            for (auto k : tolerance_filter(raw_front, tol)) out.predicted_pf.add(raw.entries()[raw.front_indices()[k]]);
        } catch (const std::exception& ex) {
            out.warnings.push_back(std::string("predicted front unavailable: ") + ex.what());
        }
    } else {
        out.warnings.emplace_back("fewer than two successful evaluations: predicted front unavailable");
    }

    // Proximity in objective space standardized by the successful history.
    auto& prox = out.proximity;
    const auto db = out.pf_database.front();
    const auto pred = out.predicted_pf.front();
    prox.database_total = db.size();
    prox.predicted_total = pred.size();
    if (!fmin.empty()) {
        const Standardizer stand = Standardizer::fit(fmin);
        if (!db.empty()) {
            for (const auto& p : pred) {
                double best = std::numeric_limits<double>::infinity();
                std::size_t arg = 0;
                for (std::size_t k = 0; k < db.size(); ++k) {
                    const double dist = (stand.apply(p) - stand.apply(db[k])).norm();
                    if (dist < best) {
                        best = dist;
                        arg = out.pf_database.entries()[k].id;
                    }
                }
                prox.distances.push_back(best);
                prox.nearest_database_id.push_back(arg);
            }
        }
    }
    std::vector<ObjectiveVector> merged = db;
    merged.insert(merged.end(), pred.begin(), pred.end());
    prox.predicted_on_combined.assign(pred.size(), false);
    for (auto k : nondominated_filter(merged)) {
        if (k < db.size())
            ++prox.database_survivors;
        else {
            ++prox.predicted_survivors;
            prox.predicted_on_combined[k - db.size()] = true;
        }
    }
    return out;
}

RunResult run(const RunConfig& config, const Evaluator& evaluator) {
    Optimizer opt(config);
    while (opt.phase() != Phase::done) {
        const MixedPoint p = opt.ask();
        PointEvaluation e;
        EvalStatus status = EvalStatus::ok;
        try {
            e = evaluator(p);
        } catch (const std::exception&) {
            status = EvalStatus::failed;
        }
        if (status == EvalStatus::ok &&
            (static_cast<std::size_t>(e.f.size()) != config.n_objectives ||
             static_cast<std::size_t>(e.g.size()) != config.n_constraints))
            status = EvalStatus::failed;
        if (status == EvalStatus::failed) {
            e.f.resize(0);
            e.g.resize(0);
        }
        opt.tell(p, e.f, e.g, status);
    }
    RunOutputs outputs = opt.finalize();
    return {std::move(opt), std::move(outputs)};
}

void write_history_csv(std::ostream& os, const RunConfig& config, const std::vector<HistoryEntry>& history) {
    const auto& space = config.space;
    os << "index";
    for (const auto& v : space.variables()) os << ',' << v.name;
    for (std::size_t i = 0; i < config.n_objectives; ++i) os << ",f" << i + 1;
    for (std::size_t j = 0; j < config.n_constraints; ++j) os << ",g" << j + 1;
    os << ",origin,status,feasible\n";
    for (const auto& h : history) {
        os << h.index;
        for (std::size_t i = 0; i < space.size(); ++i) os << ',' << space.format_value(i, h.point.values[i]);
        for (std::size_t i = 0; i < config.n_objectives; ++i) {
            os << ',';
            if (static_cast<std::size_t>(h.f.size()) == config.n_objectives) os << fmt(h.f[static_cast<Eigen::Index>(i)]);
        }
        for (std::size_t j = 0; j < config.n_constraints; ++j) {
            os << ',';
            if (static_cast<std::size_t>(h.g.size()) == config.n_constraints) os << fmt(h.g[static_cast<Eigen::Index>(j)]);
        }
        os << ',' << to_string(h.origin) << ',' << to_string(h.status) << ',' << (h.feasible ? 1 : 0) << '\n';
    }
}

std::vector<HistoryEntry> read_history_csv(std::istream& is, const RunConfig& config) {
    const auto& space = config.space;
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("history csv: missing header");
    const auto header = split_csv(line);
    const std::size_t expected = 1 + space.size() + config.n_objectives + config.n_constraints + 3;
    if (header.size() != expected) throw std::invalid_argument("history csv: header does not match the run configuration");
    for (std::size_t i = 0; i < space.size(); ++i)
        if (header[1 + i] != space.variable(i).name)
            throw std::invalid_argument("history csv: unexpected column '" + header[1 + i] + "'");
    std::vector<HistoryEntry> out;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto cells = split_csv(line);
        if (cells.size() != expected) throw std::invalid_argument("history csv: row " + std::to_string(row) + " has wrong width");
        HistoryEntry e;
        e.index = static_cast<std::size_t>(std::stoull(cells[0]));
        std::vector<double> values(space.size());
        for (std::size_t i = 0; i < space.size(); ++i) {
            const auto& cell = cells[1 + i];
            values[i] = space.variable(i).kind == VariableKind::categorical ? space.value_from_json(i, cell) : std::stod(cell);
        }
        e.point = space.make_point(std::move(values));
        std::size_t c = 1 + space.size();
        auto read_block = [&](std::size_t count) {
            Eigen::VectorXd v(static_cast<Eigen::Index>(count));
            bool empty = true;
            for (std::size_t k = 0; k < count; ++k) {
                const auto& cell = cells[c + k];
                if (cell.empty()) {
                    v[static_cast<Eigen::Index>(k)] = std::numeric_limits<double>::quiet_NaN();
                } else {
                    v[static_cast<Eigen::Index>(k)] = std::stod(cell);
                    empty = false;
                }
            }
            c += count;
            return (empty && count > 0) ? Eigen::VectorXd() : v;
        };
        e.f = read_block(config.n_objectives);
        e.g = read_block(config.n_constraints);
        e.origin = cells[c] == "infill" ? Origin::infill : Origin::doe;
        e.status = cells[c + 1] == "ok" ? EvalStatus::ok : EvalStatus::failed;
        e.feasible = cells[c + 2] == "1";
        if (e.status == EvalStatus::ok && config.n_objectives > 0 && e.f.size() == 0) e.status = EvalStatus::failed;
        out.push_back(std::move(e));
    }
    return out;
}

void write_front_points_csv(std::ostream& os, const DesignSpace& space, const ParetoArchive& archive) {
    os << "point_id";
    for (const auto& v : space.variables()) os << ',' << v.name;
    os << '\n';
    for (const auto& e : archive.entries()) {
        os << e.id;
        for (std::size_t i = 0; i < space.size(); ++i) os << ',' << space.format_value(i, e.point.values[i]);
        os << '\n';
    }
}

void write_proximity_csv(std::ostream& os, const RunOutputs& outputs) {
    const auto& p = outputs.proximity;
    os << "predicted_id,nearest_database_id,distance,on_combined_front\n";
    for (std::size_t k = 0; k < outputs.predicted_pf.size(); ++k) {
        os << outputs.predicted_pf.entries()[k].id << ',';
        if (k < p.distances.size()) os << p.nearest_database_id[k] << ',' << fmt(p.distances[k]);
        else os << ',';
        os << ',' << (k < p.predicted_on_combined.size() && p.predicted_on_combined[k] ? 1 : 0) << '\n';
    }
}

void write_artifacts(const std::string& dir, const Optimizer& state, const RunOutputs& outputs,
                     const std::vector<std::string>& log_lines) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto& cfg = state.config();
    {
        std::ofstream os(fs::path(dir) / "config.json");
        nlohmann::json doc = cfg.to_json();
        doc["space"] = cfg.space.to_json();
        os << doc.dump(2) << '\n';
    }
    {
        std::ofstream os(fs::path(dir) / "history.csv");
        write_history_csv(os, cfg, state.history());
    }
    {
        std::ofstream os(fs::path(dir) / "pf_database.csv");
        write_front_csv(os, outputs.pf_database, cfg.n_constraints);
    }
    {
        std::ofstream os(fs::path(dir) / "predicted_pf.csv");
        write_front_csv(os, outputs.predicted_pf, cfg.n_constraints);
    }
    {
        std::ofstream os(fs::path(dir) / "predicted_pf_points.csv");
        write_front_points_csv(os, cfg.space, outputs.predicted_pf);
    }
    {
        std::ofstream os(fs::path(dir) / "proximity.csv");
        write_proximity_csv(os, outputs);
    }
    {
        std::ofstream os(fs::path(dir) / "run.log");
        for (const auto& l : log_lines) os << l << '\n';
        os << "evaluations: " << state.history().size() << " of " << cfg.budget << '\n';
        os << "phase: " << to_string(state.phase()) << '\n';
        os << "objective standardization: scalarized means use per-objective archive mean/std\n";
        os << outputs.proximity.summary() << '\n';
        for (const auto& w : outputs.warnings) os << "warning: " << w << '\n';
    }
}

}  // namespace mobo
