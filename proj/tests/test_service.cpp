#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <sstream>
#include <thread>

// Eigen before httplib: <resolv.h> defines _res, an Eigen parameter name.
#include "mobo/problems.hpp"
#include "mobo/service.hpp"

#include <httplib.h>

namespace {

using namespace mobo;
using nlohmann::json;
namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("mobo_service_" + name);
    fs::remove_all(d);
    return d;
}

json create_body(const BenchmarkProblem& p, std::size_t doe, std::size_t budget, std::uint64_t seed) {
    json maximize = json::array();
    for (bool m : p.maximize) maximize.push_back(m);
    return {{"version", 1},
            {"space", p.space.to_json()},
            {"config",
             {{"n_objectives", p.n_objectives},
              {"n_constraints", p.n_constraints},
              {"maximize", maximize},
              {"doe_size", doe},
              {"budget", budget},
              {"seed", seed},
              {"infill", {{"n_starts", 6}}},
              {"nsga2", {{"population", 20}, {"generations", 10}}}}}};
}

MixedPoint from_wire(const DesignSpace& space, const json& point) {
    std::vector<double> v;
    for (std::size_t i = 0; i < space.size(); ++i) v.push_back(space.value_from_json(i, point.at(space.variable(i).name)));
    return space.make_point(v);
}

json tell_body(const std::string& token, const PointEvaluation& e) {
    return {{"version", 1},
            {"token", token},
            {"f", std::vector<double>(e.f.data(), e.f.data() + e.f.size())},
            {"g", std::vector<double>(e.g.data(), e.g.data() + e.g.size())},
            {"status", "ok"}};
}

TEST(Store, CreateValidation) {
    service::SessionStore store(fresh_dir("create"));
    json table1 = {{"version", 1},
                   {"space",
                    {{"name", "retrofit"},
                     {"variables",
                      {{{"name", "bpr"}, {"kind", "continuous"}, {"bounds", {9, 15}}},
                       {{"name", "x"}, {"kind", "continuous"}, {"bounds", {-0.98, -0.8}}},
                       {{"name", "z"}, {"kind", "continuous"}, {"bounds", {-0.39, -0.21}}},
                       {{"name", "obs"}, {"kind", "categorical"}, {"levels", {"CONV", "MEA1", "MEA2", "AEA"}}}}}}},
                   {"config", {{"n_objectives", 4}, {"n_constraints", 4}, {"doe_size", 13}, {"budget", 81}}}};
    const auto ok = store.create_session(table1.dump());
    EXPECT_EQ(ok.status, 201);
    EXPECT_EQ(ok.body["relaxed_dimension"], 7);
    EXPECT_EQ(ok.body["version"], 1);
    EXPECT_EQ(ok.body["phase"], "doe");

    auto bad_kind = table1;
    bad_kind["space"]["variables"][0]["kind"] = "boolean";
    const auto r1 = store.create_session(bad_kind.dump());
    EXPECT_EQ(r1.status, 400);
    EXPECT_EQ(r1.body["error"]["code"], "schema_violation");
    EXPECT_NE(r1.body["error"]["issues"].dump().find("variables[0].kind"), std::string::npos) << r1.body.dump();

    auto dup = table1;
    dup["space"]["variables"][1]["name"] = "bpr";
    EXPECT_EQ(store.create_session(dup.dump()).status, 400);

    auto extra = table1;
    extra["surprise"] = true;
    EXPECT_EQ(store.create_session(extra.dump()).status, 400);
    auto noversion = table1;
    noversion.erase("version");
    EXPECT_EQ(store.create_session(noversion.dump()).status, 400);
    EXPECT_EQ(store.create_session("{not json").status, 400);
    auto badcfg = table1;
    badcfg["config"]["budget"] = 5;
    EXPECT_EQ(store.create_session(badcfg.dump()).status, 400);
    EXPECT_EQ(store.size(), 1u);
}

TEST(Store, ProtocolErrors) {
    const auto p = convex_quad();
    service::SessionStore store(fresh_dir("protocol"));
    const std::string id = store.create_session(create_body(p, 3, 4, 1).dump()).body["id"];
    EXPECT_EQ(store.ask("nope").status, 404);
    EXPECT_EQ(store.tell("nope", "{}").status, 404);
    EXPECT_EQ(store.results("nope", true).status, 404);

    const auto a = store.ask(id);
    ASSERT_EQ(a.status, 200);
    EXPECT_EQ(a.body["origin"], "doe");
    EXPECT_EQ(a.body["index"], 0);
    EXPECT_EQ(store.ask(id).status, 409);
    const auto e = p.evaluate(from_wire(p.space, a.body["point"]));
    EXPECT_EQ(store.tell(id, tell_body("wrong", e).dump()).status, 409);
    auto wrong_arity = tell_body(a.body["token"], e);
    wrong_arity["f"] = {1.0, 2.0, 3.0};
    EXPECT_EQ(store.tell(id, wrong_arity.dump()).status, 422);
    auto unknown = tell_body(a.body["token"], e);
    unknown["extra"] = 1;
    EXPECT_EQ(store.tell(id, unknown.dump()).status, 400);
    const auto t = store.tell(id, tell_body(a.body["token"], e).dump());
    ASSERT_EQ(t.status, 200);
    EXPECT_EQ(t.body["evaluations"], 1);
    EXPECT_EQ(t.body["recorded_status"], "ok");
    EXPECT_EQ(store.tell(id, tell_body(a.body["token"], e).dump()).status, 409);

    // A failed evaluation is recorded without values.
    const auto a2 = store.ask(id);
    const json failed = {{"version", 1}, {"token", a2.body["token"]}, {"status", "failed"}};
    const auto t2 = store.tell(id, failed.dump());
    EXPECT_EQ(t2.status, 200);
    EXPECT_EQ(t2.body["recorded_status"], "failed");

    EXPECT_EQ(store.results(id, false).status, 409);
    for (int k = 0; k < 2; ++k) {
        const auto ak = store.ask(id);
        const auto ek = p.evaluate(from_wire(p.space, ak.body["point"]));
        ASSERT_EQ(store.tell(id, tell_body(ak.body["token"], ek).dump()).status, 200);
    }
    const auto done = store.ask(id);
    EXPECT_EQ(done.status, 410);
    EXPECT_TRUE(done.body.contains("links"));
    const auto r1 = store.results(id, false);
    ASSERT_EQ(r1.status, 200);
    EXPECT_TRUE(r1.body.contains("pf_database"));
    EXPECT_TRUE(r1.body.contains("predicted_pf"));
    EXPECT_EQ(store.results(id, false).body, r1.body);
    EXPECT_EQ(store.status(id).body["phase"], "done");
    ASSERT_TRUE(store.history(id).csv.has_value());
}

TEST(Store, ForcedResultsMatchDriverFinalize) {
    const auto p = bnh();
    service::SessionStore store(fresh_dir("force"));
    const auto body = create_body(p, 4, 10, 3);
    const std::string id = store.create_session(body.dump()).body["id"];
    auto cfg = RunConfig::from_json(body["config"], p.space);
    Optimizer local(cfg);
    for (int k = 0; k < 5; ++k) {
        const auto a = store.ask(id);
        const auto x = local.ask();
        ASSERT_EQ(from_wire(p.space, a.body["point"]), x);
        const auto e = p.evaluate(x);
        local.tell(x, e.f, e.g);
        store.tell(id, tell_body(a.body["token"], e).dump());
    }
    const auto r = store.results(id, true);
    ASSERT_EQ(r.status, 200);
    const auto out = local.finalize(true);
    ASSERT_EQ(r.body["pf_database"].size(), out.pf_database.size());
    ASSERT_EQ(r.body["predicted_pf"].size(), out.predicted_pf.size());
    for (std::size_t i = 0; i < out.pf_database.size(); ++i) {
        EXPECT_EQ(r.body["pf_database"][i]["point_id"], out.pf_database.entries()[i].id);
        EXPECT_EQ(r.body["pf_database"][i]["f"][0].get<double>(), out.pf_database.entries()[i].f[0]);
    }
    for (std::size_t i = 0; i < out.predicted_pf.size(); ++i)
        EXPECT_EQ(r.body["predicted_pf"][i]["f"][1].get<double>(), out.predicted_pf.entries()[i].f[1]);
}

TEST(Store, ReplayRestoresSessions) {
    const auto p = convex_quad();
    const auto dir = fresh_dir("replay");
    std::string id, token;
    json pending_point;
    {
        service::SessionStore store(dir);
        id = store.create_session(create_body(p, 3, 6, 5).dump()).body["id"];
        for (int k = 0; k < 4; ++k) {
            const auto a = store.ask(id);
            store.tell(id, tell_body(a.body["token"], p.evaluate(from_wire(p.space, a.body["point"]))).dump());
        }
        const auto a = store.ask(id);
        token = a.body["token"];
        pending_point = a.body["point"];
    }
    service::SessionStore again(dir);
    ASSERT_EQ(again.size(), 1u);
    const auto st = again.status(id);
    EXPECT_EQ(st.body["evaluations"], 4);
    EXPECT_EQ(st.body["pending"], true);
    EXPECT_EQ(again.ask(id).status, 409);
    const auto t = again.tell(id, tell_body(token, p.evaluate(from_wire(p.space, pending_point))).dump());
    EXPECT_EQ(t.status, 200);
    EXPECT_EQ(t.body["evaluations"], 5);
}

TEST(Store, ConcurrentAsksOnOneSession) {
    const auto p = convex_quad();
    service::SessionStore store(fresh_dir("concurrent"));
    const std::string id = store.create_session(create_body(p, 3, 5, 1).dump()).body["id"];
    std::atomic<int> ok{0}, conflict{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t)
        threads.emplace_back([&] {
            const auto r = store.ask(id);
            (r.status == 200 ? ok : conflict)++;
        });
    for (auto& t : threads) t.join();
    EXPECT_EQ(ok.load(), 1);
    EXPECT_EQ(conflict.load(), 7);
}

TEST(Http, ScriptedClientMatchesInProcessHistory) {
    const auto p = mixed_retrofit_toy();
    service::SessionStore store(fresh_dir("http"));
    service::HttpServer server(store);
    const int port = server.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    std::thread th([&] { server.listen(); });
    server.wait_until_ready();

    httplib::Client cli("127.0.0.1", port);
    const auto body = create_body(p, 13, 16, 7);
    auto created = cli.Post("/v1/sessions", body.dump(), "application/json");
    ASSERT_TRUE(created);
    ASSERT_EQ(created->status, 201);
    const std::string id = json::parse(created->body)["id"];
    const std::string base = "/v1/sessions/" + id;
    while (true) {
        auto a = cli.Get(base + "/ask");
        ASSERT_TRUE(a);
        if (a->status == 410) break;
        ASSERT_EQ(a->status, 200) << a->body;
        const auto ab = json::parse(a->body);
        const auto e = p.evaluate(from_wire(p.space, ab["point"]));
        auto t = cli.Post(base + "/tell", tell_body(ab["token"], e).dump(), "application/json");
        ASSERT_TRUE(t);
        ASSERT_EQ(t->status, 200) << t->body;
    }
    auto hist = cli.Get(base + "/history");
    ASSERT_TRUE(hist);
    EXPECT_EQ(hist->status, 200);
    auto res = cli.Get(base + "/results");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(cli.Get("/v1/sessions/unknown/ask")->status, 404);
    EXPECT_EQ(cli.Post("/v1/sessions", "[]", "application/json")->status, 400);
    server.stop();
    th.join();

    const auto local = run(RunConfig::from_json(body["config"], p.space), p.evaluate);
    std::ostringstream os;
    write_history_csv(os, local.state.config(), local.state.history());
    EXPECT_EQ(hist->body, os.str());
}

}  // namespace
