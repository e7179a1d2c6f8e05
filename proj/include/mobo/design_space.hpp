#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace mobo {

/// Raised when a structured-text document does not match its schema. Carries
/// one message per offending field, each prefixed with the field path.
class SchemaError : public std::invalid_argument {
public:
    explicit SchemaError(std::vector<std::string> issues);
    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    std::vector<std::string> issues_;
};

enum class VariableKind { continuous, integer, categorical };

const char* to_string(VariableKind kind);

/// A variable is active only when every condition holds: the referenced
/// categorical variable is itself active and currently takes one of `levels`.
struct ActivityCondition {
    std::size_t variable = 0;
    std::vector<std::size_t> levels;
};

struct VariableSpec {
    std::string name;
    VariableKind kind = VariableKind::continuous;
    double lower = 0.0;
    double upper = 0.0;
    std::vector<std::string> levels;
    std::vector<ActivityCondition> active_when;

    static VariableSpec continuous(std::string name, double lower, double upper);
    static VariableSpec integer(std::string name, double lower, double upper);
    static VariableSpec categorical(std::string name, std::vector<std::string> levels);

    VariableSpec& when(std::size_t variable, std::vector<std::size_t> levels);

    std::size_t level_count() const { return levels.size(); }
    /// Number of coordinates this variable occupies after relaxation.
    std::size_t relaxed_width() const { return kind == VariableKind::categorical ? levels.size() : 1; }
    /// Value held by the variable while it is inactive.
    double placeholder() const;
};

/// A design point in native coordinates. Integer values are stored as exact
/// integral doubles and categorical values as level indices.
struct MixedPoint {
    std::vector<double> values;
    std::vector<bool> active;

    friend bool operator==(const MixedPoint&, const MixedPoint&) = default;
};

/// Continuous relaxation of a MixedPoint. The block layout is owned by the
/// DesignSpace (see DesignSpace::offset).
using RelaxedVector = Eigen::VectorXd;

class DesignSpace {
public:
    DesignSpace() = default;
    DesignSpace(std::string name, std::vector<VariableSpec> variables);

    /// Parses the design-space document:
    ///
    ///     {"name": "retrofit",
    ///      "variables": [
    ///        {"name": "bpr",  "kind": "continuous",  "bounds": [9, 15]},
    ///        {"name": "n",    "kind": "integer",     "bounds": [1, 5]},
    ///        {"name": "obs",  "kind": "categorical", "levels": ["CONV", "MEA1"]},
    ///        {"name": "sweep2", "kind": "continuous", "bounds": [30, 42],
    ///         "active_when": {"variable": "share_w12", "levels": ["no"]}}]}
    ///
    /// `active_when` is an object or an array of objects (all must hold) and
    /// may only reference categorical variables declared earlier. Unknown
    /// kinds and unknown keys are rejected with a SchemaError.
    static DesignSpace from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    const std::string& name() const { return name_; }
    std::size_t size() const { return variables_.size(); }
    const VariableSpec& variable(std::size_t i) const { return variables_.at(i); }
    const std::vector<VariableSpec>& variables() const { return variables_; }
    std::optional<std::size_t> index_of(std::string_view name) const;

    std::size_t n_continuous() const { return n_continuous_; }
    std::size_t n_integer() const { return n_integer_; }
    std::size_t n_categorical() const { return n_categorical_; }

    /// d' = d + l + sum of categorical level counts.
    std::size_t relaxed_dimension() const { return relaxed_dimension_; }
    /// First relaxed coordinate of variable i.
    std::size_t offset(std::size_t i) const { return offsets_.at(i); }
    const Eigen::VectorXd& relaxed_lower() const { return relaxed_lower_; }
    const Eigen::VectorXd& relaxed_upper() const { return relaxed_upper_; }

    std::vector<bool> activity(std::span<const double> values) const;

    /// Builds a point from raw values: computes activity, imputes inactive
    /// variables and validates. Throws std::out_of_range on invalid values.
    MixedPoint make_point(std::vector<double> values) const;

    /// True when the point has the right arity, every value is in range,
    /// activity flags are consistent and inactive variables hold placeholders.
    bool contains(const MixedPoint& p) const;

    RelaxedVector encode(const MixedPoint& p) const;
    /// Total on R^d': clips continuous, rounds integers, argmax over each
    /// one-hot block (ties to the lowest level), then re-imputes.
    MixedPoint decode(std::span<const double> coords) const;
    MixedPoint decode(const RelaxedVector& v) const {
        return decode(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
    }
    MixedPoint impute(MixedPoint p) const;

    std::vector<MixedPoint> lhs_sample(std::size_t n, std::uint64_t seed) const;

    /// Number of distinct configurations when no continuous variable exists.
    std::optional<std::uint64_t> cardinality() const;
    /// Calls `visit` once per distinct valid point of a finite space.
    void enumerate(const std::function<void(const MixedPoint&)>& visit) const;

    /// Human-readable value of variable i (level label for categoricals).
    nlohmann::json value_to_json(std::size_t i, double value) const;
    double value_from_json(std::size_t i, const nlohmann::json& v) const;
    std::string format_value(std::size_t i, double value) const;

private:
    void validate_and_index();

    std::string name_;
    std::vector<VariableSpec> variables_;
    std::vector<std::size_t> offsets_;
    std::size_t n_continuous_ = 0;
    std::size_t n_integer_ = 0;
    std::size_t n_categorical_ = 0;
    std::size_t relaxed_dimension_ = 0;
    Eigen::VectorXd relaxed_lower_;
    Eigen::VectorXd relaxed_upper_;
};

}  // namespace mobo
