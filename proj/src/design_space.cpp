#include "mobo/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "mobo/random.hpp"

namespace mobo {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
    std::string out = "schema violation";
    for (const auto& s : issues) {
        out += "; ";
        out += s;
    }
    return out;
}

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

}  // namespace

SchemaError::SchemaError(std::vector<std::string> issues)
    : std::invalid_argument(join_issues(issues)), issues_(std::move(issues)) {}

const char* to_string(VariableKind kind) {
    switch (kind) {
    case VariableKind::continuous: return "continuous";
    case VariableKind::integer: return "integer";
    case VariableKind::categorical: return "categorical";
    }
    return "?";
}

VariableSpec VariableSpec::continuous(std::string name, double lower, double upper) {
    VariableSpec v;
    v.name = std::move(name);
    v.kind = VariableKind::continuous;
    v.lower = lower;
    v.upper = upper;
    return v;
}

VariableSpec VariableSpec::integer(std::string name, double lower, double upper) {
    VariableSpec v = continuous(std::move(name), lower, upper);
    v.kind = VariableKind::integer;
    return v;
}

VariableSpec VariableSpec::categorical(std::string name, std::vector<std::string> levels) {
    VariableSpec v;
    v.name = std::move(name);
    v.kind = VariableKind::categorical;
    v.levels = std::move(levels);
    return v;
}

VariableSpec& VariableSpec::when(std::size_t variable, std::vector<std::size_t> lv) {
    active_when.push_back({variable, std::move(lv)});
    return *this;
}

double VariableSpec::placeholder() const {
    switch (kind) {
    case VariableKind::continuous: return 0.5 * (lower + upper);
    case VariableKind::integer: return std::round(0.5 * (lower + upper));
    case VariableKind::categorical: return 0.0;
    }
    return 0.0;
}

DesignSpace::DesignSpace(std::string name, std::vector<VariableSpec> variables)
    : name_(std::move(name)), variables_(std::move(variables)) {
    validate_and_index();
}

void DesignSpace::validate_and_index() {
    std::vector<std::string> issues;
    std::set<std::string> names;
    if (variables_.empty()) issues.emplace_back("variables: at least one variable is required");
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto& v = variables_[i];
        const std::string where = "variables[" + std::to_string(i) + "]";
        if (v.name.empty()) issues.push_back(where + ".name: must be nonempty");
        if (!names.insert(v.name).second) issues.push_back(where + ".name: duplicate name '" + v.name + "'");
        if (v.kind == VariableKind::categorical) {
            if (v.levels.empty()) issues.push_back(where + ".levels: must be nonempty");
            std::set<std::string> labels(v.levels.begin(), v.levels.end());
            if (labels.size() != v.levels.size()) issues.push_back(where + ".levels: labels must be unique");
        } else {
            if (!std::isfinite(v.lower) || !std::isfinite(v.upper) || !(v.lower < v.upper))
                issues.push_back(where + ".bounds: require finite lower < upper");
            if (v.kind == VariableKind::integer && (!is_integral(v.lower) || !is_integral(v.upper)))
                issues.push_back(where + ".bounds: integer bounds must be integral");
        }
        for (const auto& c : v.active_when) {
            if (c.variable >= i) {
                issues.push_back(where + ".active_when: may only reference variables declared earlier");
                continue;
            }
            const auto& ref = variables_[c.variable];
            if (ref.kind != VariableKind::categorical) {
                issues.push_back(where + ".active_when: '" + ref.name + "' is not categorical");
                continue;
            }
            if (c.levels.empty()) issues.push_back(where + ".active_when: levels must be nonempty");
            for (auto l : c.levels)
                if (l >= ref.level_count())
                    issues.push_back(where + ".active_when: level index out of range for '" + ref.name + "'");
        }
    }
    if (!issues.empty()) throw SchemaError(std::move(issues));

    offsets_.clear();
    n_continuous_ = n_integer_ = n_categorical_ = 0;
    std::size_t off = 0;
    for (const auto& v : variables_) {
        offsets_.push_back(off);
        off += v.relaxed_width();
        switch (v.kind) {
        case VariableKind::continuous: ++n_continuous_; break;
        case VariableKind::integer: ++n_integer_; break;
        case VariableKind::categorical: ++n_categorical_; break;
        }
    }
    relaxed_dimension_ = off;
    relaxed_lower_.resize(static_cast<Eigen::Index>(off));
    relaxed_upper_.resize(static_cast<Eigen::Index>(off));
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto& v = variables_[i];
        const auto o = static_cast<Eigen::Index>(offsets_[i]);
        if (v.kind == VariableKind::categorical) {
            relaxed_lower_.segment(o, static_cast<Eigen::Index>(v.level_count())).setZero();
            relaxed_upper_.segment(o, static_cast<Eigen::Index>(v.level_count())).setOnes();
        } else {
            relaxed_lower_[o] = v.lower;
            relaxed_upper_[o] = v.upper;
        }
    }
}

std::optional<std::size_t> DesignSpace::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i].name == name) return i;
    return std::nullopt;
}

std::vector<bool> DesignSpace::activity(std::span<const double> values) const {
    std::vector<bool> active(variables_.size(), true);
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        for (const auto& c : variables_[i].active_when) {
            const auto level = static_cast<std::size_t>(values[c.variable]);
            const bool ok = active[c.variable] &&
                            std::find(c.levels.begin(), c.levels.end(), level) != c.levels.end();
            if (!ok) {
                active[i] = false;
                break;
            }
        }
    }
    return active;
}

MixedPoint DesignSpace::impute(MixedPoint p) const {
    p.active = activity(p.values);
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (!p.active[i]) p.values[i] = variables_[i].placeholder();
    return p;
}

MixedPoint DesignSpace::make_point(std::vector<double> values) const {
    if (values.size() != variables_.size())
        throw std::out_of_range("expected " + std::to_string(variables_.size()) + " values, got " +
                                std::to_string(values.size()));
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto& v = variables_[i];
        const double x = values[i];
        bool ok = std::isfinite(x);
        if (ok && v.kind == VariableKind::categorical)
            ok = is_integral(x) && x >= 0 && x < static_cast<double>(v.level_count());
        else if (ok)
            ok = x >= v.lower && x <= v.upper && (v.kind == VariableKind::continuous || is_integral(x));
        if (!ok)
            throw std::out_of_range("value " + std::to_string(x) + " out of range for variable '" + v.name + "'");
    }
    MixedPoint p{std::move(values), {}};
    return impute(std::move(p));
}

bool DesignSpace::contains(const MixedPoint& p) const {
    if (p.values.size() != variables_.size() || p.active.size() != variables_.size()) return false;
    try {
        return make_point(p.values) == p;
    } catch (const std::out_of_range&) {
        return false;
    }
}

RelaxedVector DesignSpace::encode(const MixedPoint& p) const {
    if (!contains(p)) throw std::out_of_range("encode: point is not valid in design space '" + name_ + "'");
    RelaxedVector out = RelaxedVector::Zero(static_cast<Eigen::Index>(relaxed_dimension_));
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto o = static_cast<Eigen::Index>(offsets_[i]);
        if (variables_[i].kind == VariableKind::categorical)
            out[o + static_cast<Eigen::Index>(p.values[i])] = 1.0;
        else
            out[o] = p.values[i];
    }
    return out;
}

MixedPoint DesignSpace::decode(std::span<const double> coords) const {
    if (coords.size() != relaxed_dimension_)
        throw std::invalid_argument("decode: expected " + std::to_string(relaxed_dimension_) + " coordinates");
    std::vector<double> values(variables_.size());
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto& v = variables_[i];
        const std::size_t o = offsets_[i];
        switch (v.kind) {
        case VariableKind::continuous: {
            const double x = std::isnan(coords[o]) ? v.lower : coords[o];
            values[i] = std::clamp(x, v.lower, v.upper);
            break;
        }
        case VariableKind::integer: {
            const double x = std::isnan(coords[o]) ? v.lower : coords[o];
            values[i] = std::clamp(std::round(x), v.lower, v.upper);
            break;
        }
        case VariableKind::categorical: {
            std::size_t best = 0;
            for (std::size_t k = 1; k < v.level_count(); ++k) {
                // NaN never wins.
                if (coords[o + k] > coords[o + best] || std::isnan(coords[o + best])) best = k;
            }
            values[i] = static_cast<double>(best);
            break;
        }
        }
    }
    return impute(MixedPoint{std::move(values), {}});
}

std::vector<MixedPoint> DesignSpace::lhs_sample(std::size_t n, std::uint64_t seed) const {
    if (n == 0) throw std::invalid_argument("lhs_sample: n must be >= 1");
    Rng rng = make_rng(seed, 0x1A5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> values(n, std::vector<double>(variables_.size()));
    std::vector<std::size_t> perm(n);
    const double dn = static_cast<double>(n);
    for (std::size_t j = 0; j < variables_.size(); ++j) {
        const auto& v = variables_[j];
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < n; ++i) {
            // Stratified position in [0, 1), one sample per bin.
            const double u = std::min((static_cast<double>(perm[i]) + unit(rng)) / dn, std::nextafter(1.0, 0.0));
            switch (v.kind) {
            case VariableKind::continuous:
                values[i][j] = v.lower + u * (v.upper - v.lower);
                break;
            case VariableKind::integer:
                values[i][j] = std::clamp(std::round(v.lower - 0.5 + u * (v.upper - v.lower + 1.0)), v.lower, v.upper);
                break;
            case VariableKind::categorical:
                values[i][j] = std::floor(u * static_cast<double>(v.level_count()));
                break;
            }
        }
    }
    std::vector<MixedPoint> out;
    out.reserve(n);
    for (auto& row : values) out.push_back(make_point(std::move(row)));
    return out;
}

std::optional<std::uint64_t> DesignSpace::cardinality() const {
    if (n_continuous_ > 0) return std::nullopt;
    std::set<std::vector<double>> seen;
    std::uint64_t raw = 1;
    for (const auto& v : variables_) {
        const auto w = v.kind == VariableKind::categorical ? v.level_count()
                                                            : static_cast<std::size_t>(v.upper - v.lower + 1.0);
        if (raw > (std::uint64_t{1} << 40) / w) return std::nullopt;
        raw *= w;
    }
    bool hierarchical = std::any_of(variables_.begin(), variables_.end(),
                                    [](const VariableSpec& v) { return !v.active_when.empty(); });
    if (!hierarchical) return raw;
    std::uint64_t count = 0;
    enumerate([&](const MixedPoint&) { ++count; });
    return count;
}

void DesignSpace::enumerate(const std::function<void(const MixedPoint&)>& visit) const {
    if (n_continuous_ > 0) throw std::logic_error("enumerate: space has continuous variables");
    const std::size_t nv = variables_.size();
    std::vector<double> lo(nv), hi(nv), cur(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        const auto& v = variables_[i];
        lo[i] = v.kind == VariableKind::categorical ? 0.0 : v.lower;
        hi[i] = v.kind == VariableKind::categorical ? static_cast<double>(v.level_count() - 1) : v.upper;
        cur[i] = lo[i];
    }
    const bool hierarchical = std::any_of(variables_.begin(), variables_.end(),
                                          [](const VariableSpec& v) { return !v.active_when.empty(); });
    std::set<std::vector<double>> seen;
    while (true) {
        MixedPoint p = make_point(cur);
        if (!hierarchical || seen.insert(p.values).second) visit(p);
        std::size_t k = nv;
        while (k > 0) {
            --k;
            if (cur[k] < hi[k]) {
                cur[k] += 1.0;
                break;
            }
            cur[k] = lo[k];
            if (k == 0) return;
        }
    }
}

nlohmann::json DesignSpace::value_to_json(std::size_t i, double value) const {
    const auto& v = variables_.at(i);
    switch (v.kind) {
    case VariableKind::continuous: return value;
    case VariableKind::integer: return static_cast<long long>(value);
    case VariableKind::categorical: return v.levels.at(static_cast<std::size_t>(value));
    }
    return nullptr;
}

double DesignSpace::value_from_json(std::size_t i, const nlohmann::json& j) const {
    const auto& v = variables_.at(i);
    if (v.kind == VariableKind::categorical) {
        if (j.is_string()) {
            auto it = std::find(v.levels.begin(), v.levels.end(), j.get<std::string>());
            if (it == v.levels.end()) throw std::out_of_range("unknown level for variable '" + v.name + "'");
            return static_cast<double>(it - v.levels.begin());
        }
        if (j.is_number_integer()) return j.get<double>();
        throw std::out_of_range("variable '" + v.name + "' expects a level label");
    }
    if (!j.is_number()) throw std::out_of_range("variable '" + v.name + "' expects a number");
    return j.get<double>();
}

std::string DesignSpace::format_value(std::size_t i, double value) const {
    const auto& v = variables_.at(i);
    switch (v.kind) {
    case VariableKind::categorical: return v.levels.at(static_cast<std::size_t>(value));
    case VariableKind::integer: return std::to_string(static_cast<long long>(value));
    case VariableKind::continuous: {
        std::ostringstream os;
        os.precision(17);
        os << value;
        return os.str();
    }
    }
    return {};
}

DesignSpace DesignSpace::from_json(const nlohmann::json& doc) {
    std::vector<std::string> issues;
    if (!doc.is_object()) throw SchemaError({"<root>: expected an object"});
    for (const auto& [key, _] : doc.items())
        if (key != "name" && key != "variables") issues.push_back(key + ": unknown field");
    std::string name = "space";
    if (doc.contains("name")) {
        if (doc["name"].is_string())
            name = doc["name"].get<std::string>();
        else
            issues.emplace_back("name: expected a string");
    }
    if (!doc.contains("variables") || !doc["variables"].is_array()) {
        issues.emplace_back("variables: expected an array");
        throw SchemaError(std::move(issues));
    }

    std::vector<VariableSpec> vars;
    const auto& arr = doc["variables"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& jv = arr[i];
        const std::string where = "variables[" + std::to_string(i) + "]";
        if (!jv.is_object()) {
            issues.push_back(where + ": expected an object");
            continue;
        }
        for (const auto& [key, _] : jv.items())
            if (key != "name" && key != "kind" && key != "bounds" && key != "levels" && key != "active_when")
                issues.push_back(where + "." + key + ": unknown field");
        VariableSpec spec;
        if (jv.contains("name") && jv["name"].is_string())
            spec.name = jv["name"].get<std::string>();
        else
            issues.push_back(where + ".name: expected a string");
        const std::string kind = jv.contains("kind") && jv["kind"].is_string() ? jv["kind"].get<std::string>() : "";
        if (kind == "continuous" || kind == "integer") {
            spec.kind = kind == "continuous" ? VariableKind::continuous : VariableKind::integer;
            const auto* b = jv.contains("bounds") ? &jv["bounds"] : nullptr;
            if (b && b->is_array() && b->size() == 2 && (*b)[0].is_number() && (*b)[1].is_number()) {
                spec.lower = (*b)[0].get<double>();
                spec.upper = (*b)[1].get<double>();
            } else {
                issues.push_back(where + ".bounds: expected [lower, upper]");
            }
            if (jv.contains("levels")) issues.push_back(where + ".levels: not allowed for kind '" + kind + "'");
        } else if (kind == "categorical") {
            spec.kind = VariableKind::categorical;
            const auto* l = jv.contains("levels") ? &jv["levels"] : nullptr;
            if (l && l->is_array() && std::all_of(l->begin(), l->end(), [](const auto& e) { return e.is_string(); }))
                spec.levels = l->get<std::vector<std::string>>();
            else
                issues.push_back(where + ".levels: expected an array of strings");
            if (jv.contains("bounds")) issues.push_back(where + ".bounds: not allowed for kind 'categorical'");
        } else {
            issues.push_back(where + ".kind: unknown kind '" + kind + "'");
        }
        if (jv.contains("active_when")) {
            nlohmann::json conds = jv["active_when"];
            if (conds.is_object()) conds = nlohmann::json::array({conds});
            if (!conds.is_array()) {
                issues.push_back(where + ".active_when: expected an object or array");
            } else {
                for (const auto& c : conds) {
                    if (!c.is_object() || !c.contains("variable") || !c["variable"].is_string() ||
                        !c.contains("levels") || !c["levels"].is_array()) {
                        issues.push_back(where + ".active_when: expected {variable, levels}");
                        continue;
                    }
                    for (const auto& [key, _] : c.items())
                        if (key != "variable" && key != "levels")
                            issues.push_back(where + ".active_when." + key + ": unknown field");
                    const auto ref = c["variable"].get<std::string>();
                    auto it = std::find_if(vars.begin(), vars.end(), [&](const VariableSpec& s) { return s.name == ref; });
                    if (it == vars.end()) {
                        issues.push_back(where + ".active_when: '" + ref + "' is not declared earlier");
                        continue;
                    }
                    ActivityCondition cond{static_cast<std::size_t>(it - vars.begin()), {}};
                    for (const auto& lv : c["levels"]) {
                        const auto& labels = it->levels;
                        auto pos = lv.is_string() ? std::find(labels.begin(), labels.end(), lv.get<std::string>())
                                                  : labels.end();
                        if (pos == labels.end())
                            issues.push_back(where + ".active_when: unknown level for '" + ref + "'");
                        else
                            cond.levels.push_back(static_cast<std::size_t>(pos - labels.begin()));
                    }
                    spec.active_when.push_back(std::move(cond));
                }
            }
        }
        vars.push_back(std::move(spec));
    }
    if (!issues.empty()) throw SchemaError(std::move(issues));
    return DesignSpace(std::move(name), std::move(vars));
}

nlohmann::json DesignSpace::to_json() const {
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : variables_) {
        nlohmann::json jv{{"name", v.name}, {"kind", to_string(v.kind)}};
        if (v.kind == VariableKind::categorical)
            jv["levels"] = v.levels;
        else
            jv["bounds"] = {v.lower, v.upper};
        if (!v.active_when.empty()) {
            nlohmann::json conds = nlohmann::json::array();
            for (const auto& c : v.active_when) {
                const auto& ref = variables_[c.variable];
                nlohmann::json labels = nlohmann::json::array();
                for (auto l : c.levels) labels.push_back(ref.levels[l]);
                conds.push_back({{"variable", ref.name}, {"levels", labels}});
            }
            jv["active_when"] = conds;
        }
        vars.push_back(std::move(jv));
    }
    return {{"name", name_}, {"variables", vars}};
}

}  // namespace mobo
