#include "mobo/service.hpp"

#include <condition_variable>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <httplib.h>

#include "mobo/random.hpp"

namespace mobo::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Response error(int status, const std::string& code, const std::string& message, std::vector<std::string> issues = {}) {
    json body{{"version", kWireVersion}, {"error", {{"code", code}, {"message", message}}}};
    if (!issues.empty()) body["error"]["issues"] = issues;
    return {status, std::move(body), std::nullopt};
}

Response not_found(const std::string& id) { return error(404, "unknown_session", "no session '" + id + "'"); }

std::string iso_time(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

json point_to_wire(const DesignSpace& space, const MixedPoint& p) {
    json out = json::object();
    for (std::size_t i = 0; i < space.size(); ++i) out[space.variable(i).name] = space.value_to_json(i, p.values[i]);
    return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::isfinite(v[i]))
            out.push_back(v[i]);
        else
            out.push_back(nullptr);
    }
    return out;
}

// Null entries stand for non-finite values.
Eigen::VectorXd vector_from_json(const json& j, const std::string& field, std::vector<std::string>& issues) {
    if (!j.is_array()) {
        issues.push_back(field + ": expected an array of numbers");
        return {};
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].is_number())
            v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
        else if (j[i].is_null())
            v[static_cast<Eigen::Index>(i)] = std::numeric_limits<double>::quiet_NaN();
        else
            issues.push_back(field + "[" + std::to_string(i) + "]: expected a number");
    }
    return v;
}

std::vector<std::string> check_envelope(const json& doc, std::initializer_list<const char*> known) {
    std::vector<std::string> issues;
    if (!doc.is_object()) return {"<root>: expected an object"};
    if (!doc.contains("version"))
        issues.emplace_back("version: missing");
    else if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kWireVersion)
        issues.push_back("version: expected " + std::to_string(kWireVersion));
    for (const auto& [key, _] : doc.items())
        if (key != "version" && std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            issues.push_back(key + ": unknown field");
    return issues;
}

json front_to_wire(const ParetoArchive& front, const Optimizer& opt) {
    json out = json::array();
    const auto& space = opt.config().space;
    for (const auto& e : front.entries()) {
        // Archives hold minimization values; the wire carries the native sense.
        out.push_back({{"point_id", e.id},
                       {"point", point_to_wire(space, e.point)},
                       {"f", vector_to_json(opt.to_minimization(e.f))},
                       {"g", vector_to_json(e.g)}});
    }
    return out;
}

Response ask_locked(Session& s) {
    auto& opt = s.optimizer;
    if (opt.phase() == Phase::done) {
        Response r = error(410, "budget_exhausted", "budget exhausted");
        r.body["links"] = {{"results", "/v1/sessions/" + s.id + "/results"},
                           {"history", "/v1/sessions/" + s.id + "/history"}};
        return r;
    }
    if (opt.pending()) return error(409, "pending_evaluation", "pending evaluation: tell the outstanding point first");
    return {};
}

}  // namespace

Session::Session(std::string id_, RunConfig config, json body)
    : id(std::move(id_)), optimizer(std::move(config)), create_body(std::move(body)),
      created(std::chrono::system_clock::now()), updated(created) {}

SessionStore::SessionStore(fs::path data_dir) : data_dir_(std::move(data_dir)) {
    id_state_ = mix_seed(std::random_device{}(), static_cast<std::uint64_t>(
                                                     std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(data_dir_);
    std::vector<fs::path> logs;
    for (const auto& entry : fs::directory_iterator(data_dir_))
        if (entry.is_directory() && fs::exists(entry.path() / "events.jsonl")) logs.push_back(entry.path() / "events.jsonl");
    std::sort(logs.begin(), logs.end());
    for (const auto& log : logs) replay(log);
}

std::size_t SessionStore::size() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::string SessionStore::fresh_id() {
    for (;;) {
        id_state_ = mix_seed(id_state_, 0x1D);
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << id_state_;
        if (!sessions_.count(os.str())) return os.str();
    }
}

void SessionStore::append_event(const Session& s, const json& event) const {
    const fs::path dir = data_dir_ / s.id;
    fs::create_directories(dir);
    std::ofstream os(dir / "events.jsonl", std::ios::app);
    os << event.dump() << '\n';
    os.flush();
    if (!os) throw std::runtime_error("cannot write event log for session " + s.id);
}

void SessionStore::replay(const fs::path& log) {
    std::ifstream is(log);
    std::string line;
    std::shared_ptr<Session> s;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json ev;
        try {
            ev = json::parse(line);
        } catch (const json::parse_error&) {
            break;  // torn final write
        }
        const auto kind = ev.value("event", "");
        if (kind == "create") {
            const auto& body = ev["body"];
            auto config = RunConfig::from_json(body["config"], DesignSpace::from_json(body["space"]));
            s = std::make_shared<Session>(ev["id"].get<std::string>(), std::move(config), body);
        } else if (!s) {
            break;
        } else if (kind == "ask") {
            const auto& space = s->optimizer.config().space;
            s->optimizer.restore_pending(space.make_point(ev["values"].get<std::vector<double>>()));
            s->pending_token = ev["token"].get<std::string>();
            ++s->token_counter;
        } else if (kind == "tell") {
            std::vector<std::string> issues;
            const auto f = vector_from_json(ev["f"], "f", issues);
            const auto g = vector_from_json(ev["g"], "g", issues);
            const auto status = ev["status"].get<std::string>() == "ok" ? EvalStatus::ok : EvalStatus::failed;
            s->optimizer.tell(*s->optimizer.pending(), f, g, status);
            s->pending_token.clear();
        }
    }
    if (s) {
        std::unique_lock lock(sessions_mutex_);
        sessions_[s->id] = s;
    }
}

Response SessionStore::create_session(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        return error(400, "invalid_json", e.what());
    }
    auto issues = check_envelope(doc, {"space", "config"});
    if (!issues.empty()) return error(400, "schema_violation", "invalid session request", issues);
    if (!doc.contains("space")) return error(400, "schema_violation", "invalid session request", {"space: missing"});
    std::optional<RunConfig> config;
    try {
        config = RunConfig::from_json(doc.value("config", json::object()), DesignSpace::from_json(doc["space"]));
    } catch (const SchemaError& e) {
        return error(400, "schema_violation", "invalid session request", e.issues());
    } catch (const std::invalid_argument& e) {
        return error(400, "schema_violation", "invalid session request", {e.what()});
    }
    std::shared_ptr<Session> s;
    {
        std::unique_lock lock(sessions_mutex_);
        const std::string id = fresh_id();
        s = std::make_shared<Session>(id, std::move(*config), doc);
        append_event(*s, {{"event", "create"}, {"id", id}, {"time", iso_time(s->created)}, {"body", doc}});
        sessions_[id] = s;
    }
    const auto& cfg = s->optimizer.config();
    return {201,
            {{"version", kWireVersion},
             {"id", s->id},
             {"relaxed_dimension", cfg.space.relaxed_dimension()},
             {"phase", to_string(s->optimizer.phase())},
             {"budget", cfg.budget},
             {"doe_size", cfg.doe_size}},
            std::nullopt};
}

Response SessionStore::ask(const std::string& id) {
    auto s = find(id);
    if (!s) return not_found(id);
    std::lock_guard lock(s->mutex);
    if (Response r = ask_locked(*s); r.status != 200) return r;
    const MixedPoint p = s->optimizer.ask();
    s->pending_token = s->id + "." + std::to_string(++s->token_counter);
    s->updated = std::chrono::system_clock::now();
    append_event(*s, {{"event", "ask"}, {"token", s->pending_token}, {"time", iso_time(s->updated)}, {"values", p.values}});
    const auto& space = s->optimizer.config().space;
    json active = json::object();
    for (std::size_t i = 0; i < space.size(); ++i) active[space.variable(i).name] = static_cast<bool>(p.active[i]);
    return {200,
            {{"version", kWireVersion},
             {"token", s->pending_token},
             {"index", s->optimizer.n_tells()},
             {"origin", s->optimizer.n_tells() < s->optimizer.doe_points().size() ? "doe" : "infill"},
             {"point", point_to_wire(space, p)},
             {"active", active}},
            std::nullopt};
}

Response SessionStore::tell(const std::string& id, const std::string& body) {
    auto s = find(id);
    if (!s) return not_found(id);
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        return error(400, "invalid_json", e.what());
    }
    auto issues = check_envelope(doc, {"token", "f", "g", "status"});
    if (!doc.is_object()) return error(400, "schema_violation", "invalid tell request", issues);
    if (!doc.contains("token") || !doc["token"].is_string()) issues.emplace_back("token: expected a string");
    std::string status_text = "ok";
    if (doc.contains("status")) {
        if (!doc["status"].is_string() || (doc["status"] != "ok" && doc["status"] != "failed"))
            issues.emplace_back("status: expected \"ok\" or \"failed\"");
        else
            status_text = doc["status"].get<std::string>();
    }
    const EvalStatus status = status_text == "ok" ? EvalStatus::ok : EvalStatus::failed;
    Eigen::VectorXd f, g;
    if (doc.contains("f")) f = vector_from_json(doc["f"], "f", issues);
    else if (status == EvalStatus::ok) issues.emplace_back("f: missing");
    if (doc.contains("g")) g = vector_from_json(doc["g"], "g", issues);
    if (!issues.empty()) return error(400, "schema_violation", "invalid tell request", issues);

    std::lock_guard lock(s->mutex);
    auto& opt = s->optimizer;
    if (!opt.pending() || doc["token"].get<std::string>() != s->pending_token)
        return error(409, "token_mismatch", "token does not match the pending ask");
    const auto& cfg = opt.config();
    if (status == EvalStatus::ok && !doc.contains("g") && cfg.n_constraints == 0) g.resize(0);
    const bool has_values = f.size() > 0 || g.size() > 0;
    if ((status == EvalStatus::ok || has_values) &&
        (static_cast<std::size_t>(f.size()) != cfg.n_objectives || static_cast<std::size_t>(g.size()) != cfg.n_constraints))
        return error(422, "arity_mismatch",
                     "expected " + std::to_string(cfg.n_objectives) + " objectives and " +
                         std::to_string(cfg.n_constraints) + " constraints");
    const auto outcome = opt.tell(*opt.pending(), f, g, status);
    s->updated = std::chrono::system_clock::now();
    append_event(*s, {{"event", "tell"},
                      {"token", s->pending_token},
                      {"time", iso_time(s->updated)},
                      {"f", vector_to_json(f)},
                      {"g", vector_to_json(g)},
                      {"status", status_text}});
    s->pending_token.clear();
    return {200,
            {{"version", kWireVersion},
             {"phase", to_string(opt.phase())},
             {"evaluations", opt.n_tells()},
             {"budget", cfg.budget},
             {"recorded_status", outcome == TellOutcome::recorded ? status_text : "failed"}},
            std::nullopt};
}

Response SessionStore::results(const std::string& id, bool force) {
    auto s = find(id);
    if (!s) return not_found(id);
    std::lock_guard lock(s->mutex);
    const auto& opt = s->optimizer;
    if (opt.phase() != Phase::done && !force)
        return error(409, "not_done", "session not finished; pass force=true to compute fronts from the current history");
    const std::size_t n = opt.n_tells();
    if (!s->results_cache || s->results_cache->first != n) {
        const RunOutputs out = opt.finalize(true);
        const auto& p = out.proximity;
        json prox{{"database_total", p.database_total},
                  {"database_survivors", p.database_survivors},
                  {"predicted_total", p.predicted_total},
                  {"predicted_survivors", p.predicted_survivors},
                  {"nearest_database_id", p.nearest_database_id},
                  {"distances", p.distances},
                  {"predicted_on_combined", p.predicted_on_combined},
                  {"summary", p.summary()}};
        json body{{"version", kWireVersion},
                  {"phase", to_string(opt.phase())},
                  {"evaluations", n},
                  {"pf_database", front_to_wire(out.pf_database, opt)},
                  {"predicted_pf", front_to_wire(out.predicted_pf, opt)},
                  {"proximity", prox},
                  {"reference", vector_to_json(out.reference)},
                  {"warnings", out.warnings}};
        s->results_cache.emplace(n, std::move(body));
    }
    return {200, s->results_cache->second, std::nullopt};
}

Response SessionStore::status(const std::string& id) {
    auto s = find(id);
    if (!s) return not_found(id);
    std::lock_guard lock(s->mutex);
    const auto& opt = s->optimizer;
    return {200,
            {{"version", kWireVersion},
             {"id", s->id},
             {"phase", to_string(opt.phase())},
             {"evaluations", opt.n_tells()},
             {"asks", opt.n_asks()},
             {"budget", opt.config().budget},
             {"pending", opt.pending().has_value()},
             {"relaxed_dimension", opt.config().space.relaxed_dimension()},
             {"created", iso_time(s->created)},
             {"updated", iso_time(s->updated)}},
            std::nullopt};
}

Response SessionStore::history(const std::string& id) {
    auto s = find(id);
    if (!s) return not_found(id);
    std::lock_guard lock(s->mutex);
    std::ostringstream os;
    write_history_csv(os, s->optimizer.config(), s->optimizer.history());
    return {200, {}, os.str()};
}

struct HttpServer::Impl {
    SessionStore& store;
    httplib::Server server;
    explicit Impl(SessionStore& st) : store(st) {}
};

namespace {

void send(httplib::Response& res, const Response& r) {
    res.status = r.status;
    if (r.csv)
        res.set_content(*r.csv, "text/csv");
    else
        res.set_content(r.body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {
    auto& srv = impl_->server;
    auto& st = impl_->store;
    srv.Post("/v1/sessions", [&st](const httplib::Request& req, httplib::Response& res) {
        send(res, st.create_session(req.body));
    });
    srv.Get(R"(/v1/sessions/([^/]+))", [&st](const httplib::Request& req, httplib::Response& res) {
        send(res, st.status(req.matches[1]));
    });
    srv.Get(R"(/v1/sessions/([^/]+)/ask)", [&st](const httplib::Request& req, httplib::Response& res) {
        send(res, st.ask(req.matches[1]));
    });
    srv.Post(R"(/v1/sessions/([^/]+)/tell)", [&st](const httplib::Request& req, httplib::Response& res) {
        send(res, st.tell(req.matches[1], req.body));
    });
    srv.Get(R"(/v1/sessions/([^/]+)/results)", [&st](const httplib::Request& req, httplib::Response& res) {
        const bool force = req.has_param("force") && req.get_param_value("force") == "true";
        send(res, st.results(req.matches[1], force));
    });
    srv.Get(R"(/v1/sessions/([^/]+)/history)", [&st](const httplib::Request& req, httplib::Response& res) {
        send(res, st.history(req.matches[1]));
    });
    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send(res, error(500, "internal", what));
    });
    srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) send(res, error(res.status, res.status == 404 ? "not_found" : "error", "no such resource"));
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace mobo::service
