#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "mobo/driver.hpp"

namespace mobo::service {

/// Version carried by every request and response body.
inline constexpr int kWireVersion = 1;

struct Response {
    int status = 200;
    nlohmann::json body;
    /// Set for text/csv responses; `body` is ignored then.
    std::optional<std::string> csv;
};

struct Session {
    std::string id;
    Optimizer optimizer;
    nlohmann::json create_body;
    std::chrono::system_clock::time_point created;
    std::chrono::system_clock::time_point updated;
    std::string pending_token;
    std::size_t token_counter = 0;
    /// Results keyed by history length, so repeated calls return the same body.
    std::optional<std::pair<std::size_t, nlohmann::json>> results_cache;
    std::mutex mutex;

    Session(std::string id, RunConfig config, nlohmann::json create_body);
};

/// Transport-independent request handlers over a set of sessions. Every
/// mutation is appended to `<data_dir>/<id>/events.jsonl` before the response
/// is produced; constructing a store replays the logs found in `data_dir`.
///
/// Request bodies (all carry "version": 1, unknown fields are rejected):
///
///     POST /v1/sessions            {"version": 1, "space": {...}, "config": {...}}
///     POST /v1/sessions/{id}/tell  {"version": 1, "token": "...", "f": [...],
///                                   "g": [...], "status": "ok" | "failed"}
///
/// Errors come back as {"version": 1, "error": {"code": ..., "message": ...}}
/// with "issues" listing field-level problems for 400 responses.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path data_dir);

    Response create_session(const std::string& body);
    Response ask(const std::string& id);
    Response tell(const std::string& id, const std::string& body);
    Response results(const std::string& id, bool force);
    Response status(const std::string& id);
    /// History in the CSV layout of write_history_csv.
    Response history(const std::string& id);

    std::size_t size() const;
    const std::filesystem::path& data_dir() const { return data_dir_; }

private:
    std::shared_ptr<Session> find(const std::string& id) const;
    std::string fresh_id();
    void append_event(const Session& s, const nlohmann::json& event) const;
    void replay(const std::filesystem::path& log);

    std::filesystem::path data_dir_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t id_state_;
};

/// HTTP front end for a SessionStore.
class HttpServer {
public:
    explicit HttpServer(SessionStore& store);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called.
    bool listen();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mobo::service
