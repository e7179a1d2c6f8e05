#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "mobo/acquisition.hpp"
#include "mobo/design_space.hpp"
#include "mobo/infill.hpp"
#include "mobo/nsga2.hpp"
#include "mobo/pareto.hpp"
#include "mobo/surrogate.hpp"

namespace mobo {

enum class Origin { doe, infill };
enum class EvalStatus { ok, failed };
enum class Phase { doe, enrich, done };

const char* to_string(Origin o);
const char* to_string(EvalStatus s);
const char* to_string(Phase p);

/// Violations of the ask/tell protocol.
class ProtocolError : public std::logic_error {
public:
    enum class Kind { pending_outstanding, budget_exhausted, no_pending, point_mismatch, arity, not_done };
    ProtocolError(Kind kind, const std::string& what) : std::logic_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct RunConfig {
    DesignSpace space;
    std::size_t n_objectives = 2;
    std::size_t n_constraints = 0;
    /// Objectives to maximize; they are negated before modelling. Empty means
    /// all minimized.
    std::vector<bool> maximize;
    std::size_t doe_size = 10;
    /// Total number of evaluations, DOE included.
    std::size_t budget = 20;
    AcquisitionConfig acquisition;
    /// n_pls is capped per fit at min(d', n_train - 1).
    KernelConfig kernel{KernelFamily::squared_exponential, 3, 1e-10};
    FitOptions fit;
    InfillOptions infill;
    Nsga2Config nsga2;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    nlohmann::json to_json() const;
    /// Reads the run fields of a config document (space excluded).
    static RunConfig from_json(const nlohmann::json& doc, DesignSpace space);
    /// Reads a config.json snapshot: run fields plus a "space" member.
    static RunConfig from_snapshot(const nlohmann::json& doc);
};

struct HistoryEntry {
    std::size_t index = 0;
    MixedPoint point;
    /// Values as told (native sense); empty when the evaluation failed
    /// without values.
    Eigen::VectorXd f;
    Eigen::VectorXd g;
    Origin origin = Origin::doe;
    EvalStatus status = EvalStatus::ok;
    bool feasible = false;
    std::chrono::system_clock::time_point timestamp;
};

struct ProximityReport {
    /// Per predicted point: nearest database point and the Euclidean distance
    /// in standardized objective space. Empty when the database is empty.
    std::vector<std::size_t> nearest_database_id;
    std::vector<double> distances;
    std::size_t database_total = 0;
    std::size_t database_survivors = 0;
    std::size_t predicted_total = 0;
    std::size_t predicted_survivors = 0;
    /// Which predicted points survive in the merged front.
    std::vector<bool> predicted_on_combined;

    /// e.g. "combined front: 52 of 65 database points + 26 of 33 predicted points"
    std::string summary() const;
};

/// Outputs of a run. Fronts use the minimization convention (maximized
/// objectives appear negated).
struct RunOutputs {
    ParetoArchive pf_database;
    ParetoArchive predicted_pf;
    ProximityReport proximity;
    ObjectiveVector reference;
    std::vector<std::string> warnings;
};

enum class TellOutcome { recorded, recorded_as_failed };

/// Ask/tell state machine for one constrained multi-objective run.
///
/// The first doe_size asks replay a Latin hypercube. Each later ask refits one
/// surrogate per objective and constraint on the successful history, builds
/// the regularized acquisition over a standardized copy of the archive, solves
/// the infill problem and decodes the result. All randomness is derived from
/// the run seed and the history length, so a run can be replayed from its
/// told history.
class Optimizer {
public:
    explicit Optimizer(RunConfig config);

    MixedPoint ask();
    TellOutcome tell(const MixedPoint& p, const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                     EvalStatus status = EvalStatus::ok);
    /// Reinstates a pending ask recorded earlier without recomputing it.
    void restore_pending(const MixedPoint& p);
    /// Appends already evaluated entries (used to rebuild from a history file).
    void restore_history(const std::vector<HistoryEntry>& entries);

    /// Requires phase done unless `force`.
    RunOutputs finalize(bool force = false) const;

    Phase phase() const { return phase_; }
    const RunConfig& config() const { return config_; }
    const std::vector<HistoryEntry>& history() const { return history_; }
    const std::optional<MixedPoint>& pending() const { return pending_; }
    const ParetoArchive& archive() const { return archive_; }
    /// Reference point used by each enrichment ask, in native units of the
    /// minimization convention.
    const std::vector<ObjectiveVector>& reference_history() const { return references_; }
    std::size_t n_asks() const { return n_asks_; }
    std::size_t n_tells() const { return history_.size(); }
    const std::vector<MixedPoint>& doe_points() const { return doe_; }

    /// Told objectives converted to the minimization convention.
    ObjectiveVector to_minimization(const Eigen::VectorXd& f) const;

private:
    MixedPoint next_infill();
    MixedPoint space_filling_point(std::uint64_t seed) const;
    void record(HistoryEntry entry);
    bool is_feasible(const Eigen::VectorXd& g) const;

    RunConfig config_;
    std::vector<MixedPoint> doe_;
    std::vector<HistoryEntry> history_;
    std::optional<MixedPoint> pending_;
    std::optional<Origin> pending_origin_;
    ParetoArchive archive_;
    std::vector<ObjectiveVector> references_;
    Phase phase_ = Phase::doe;
    std::size_t n_asks_ = 0;
};

using Evaluator = std::function<PointEvaluation(const MixedPoint&)>;

struct RunResult {
    Optimizer state;
    RunOutputs outputs;
};

/// Drives ask/tell to completion and finalizes. Evaluator exceptions and
/// non-finite values mark the point failed.
RunResult run(const RunConfig& config, const Evaluator& evaluator);

/// `index,<variables>,f1..fn,g1..gm,origin,status,feasible`
void write_history_csv(std::ostream& os, const RunConfig& config, const std::vector<HistoryEntry>& history);
std::vector<HistoryEntry> read_history_csv(std::istream& is, const RunConfig& config);

/// pf_database.csv, predicted_pf.csv, predicted_pf_points.csv, proximity.csv.
void write_front_points_csv(std::ostream& os, const DesignSpace& space, const ParetoArchive& archive);
void write_proximity_csv(std::ostream& os, const RunOutputs& outputs);

/// Writes config.json, history.csv, the front files, proximity.csv and run.log
/// under `dir` (created if needed).
void write_artifacts(const std::string& dir, const Optimizer& state, const RunOutputs& outputs,
                     const std::vector<std::string>& log_lines = {});

}  // namespace mobo
