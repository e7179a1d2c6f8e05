#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include "mobo/driver.hpp"
#include "mobo/hypervolume.hpp"
#include "mobo/problems.hpp"
#include "mobo/random.hpp"

namespace {

using namespace mobo;
using Eigen::VectorXd;

RunConfig config_for(const BenchmarkProblem& p, std::size_t doe, std::size_t budget, std::uint64_t seed = 1) {
    RunConfig c;
    c.space = p.space;
    c.n_objectives = p.n_objectives;
    c.n_constraints = p.n_constraints;
    c.maximize = p.maximize;
    c.doe_size = doe;
    c.budget = budget;
    c.seed = seed;
    c.infill.n_starts = 6;
    c.infill.n_archive_starts = 2;
    c.nsga2.population = 20;
    c.nsga2.generations = 10;
    return c;
}

template <class Fn>
ProtocolError::Kind protocol_kind(Fn&& fn) {
    try {
        fn();
    } catch (const ProtocolError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no ProtocolError thrown";
    return ProtocolError::Kind::not_done;
}

TEST(Optimizer, DoeReplayAndProtocol) {
    const auto prob = convex_quad();
    Optimizer opt(config_for(prob, 5, 7));
    EXPECT_EQ(opt.doe_points(), prob.space.lhs_sample(5, mix_seed(1, 0xD0E)));
    EXPECT_EQ(protocol_kind([&] { opt.tell(opt.doe_points()[0], VectorXd::Zero(2), VectorXd(0)); }),
              ProtocolError::Kind::no_pending);
    EXPECT_EQ(protocol_kind([&] { (void)opt.finalize(); }), ProtocolError::Kind::not_done);

    for (std::size_t i = 0; i < 5; ++i) {
        const auto p = opt.ask();
        EXPECT_EQ(p, opt.doe_points()[i]);
        EXPECT_EQ(protocol_kind([&] { opt.ask(); }), ProtocolError::Kind::pending_outstanding);
        const auto e = prob.evaluate(p);
        EXPECT_EQ(protocol_kind([&] { opt.tell(p, VectorXd::Zero(3), e.g); }), ProtocolError::Kind::arity);
        MixedPoint other = p;
        other.values[0] = p.values[0] < 0.5 ? p.values[0] + 0.25 : p.values[0] - 0.25;
        EXPECT_EQ(protocol_kind([&] { opt.tell(other, e.f, e.g); }), ProtocolError::Kind::point_mismatch);
        EXPECT_EQ(opt.history().size(), i);
        EXPECT_EQ(opt.phase(), Phase::doe);
        EXPECT_EQ(opt.tell(p, e.f, e.g), TellOutcome::recorded);
        EXPECT_EQ(opt.history().size(), i + 1);
    }
    EXPECT_EQ(opt.phase(), Phase::enrich);
    for (int k = 0; k < 2; ++k) {
        const auto p = opt.ask();
        EXPECT_TRUE(prob.space.contains(p));
        EXPECT_EQ(opt.n_asks() - opt.n_tells(), 1u);
        const auto e = prob.evaluate(p);
        opt.tell(p, e.f, e.g);
    }
    EXPECT_EQ(opt.phase(), Phase::done);
    EXPECT_EQ(opt.history().back().origin, Origin::infill);
    EXPECT_EQ(protocol_kind([&] { opt.ask(); }), ProtocolError::Kind::budget_exhausted);
}

TEST(Optimizer, FailedEvaluationsAreRecordedNotTrained) {
    const auto prob = convex_quad();
    Optimizer opt(config_for(prob, 4, 6));
    for (int i = 0; i < 4; ++i) {
        const auto p = opt.ask();
        const auto e = prob.evaluate(p);
        if (i == 1) {
            EXPECT_EQ(opt.tell(p, VectorXd::Constant(2, std::numeric_limits<double>::quiet_NaN()), e.g),
                      TellOutcome::recorded_as_failed);
        } else if (i == 2) {
            opt.tell(p, e.f, e.g, EvalStatus::failed);
        } else {
            opt.tell(p, e.f, e.g);
        }
    }
    EXPECT_EQ(opt.history()[1].status, EvalStatus::failed);
    EXPECT_EQ(opt.history()[2].status, EvalStatus::failed);
    EXPECT_EQ(opt.archive().size(), 2u);
    // Two successful points still allow a fit.
    const auto p = opt.ask();
    EXPECT_TRUE(prob.space.contains(p));
}

TEST(Run, DeterministicAndIdempotentFinalize) {
    const auto prob = bnh();
    const auto cfg = config_for(prob, 6, 10, 4);
    const auto a = run(cfg, prob.evaluate);
    const auto b = run(cfg, prob.evaluate);
    std::ostringstream ha, hb;
    write_history_csv(ha, cfg, a.state.history());
    write_history_csv(hb, cfg, b.state.history());
    EXPECT_EQ(ha.str(), hb.str());
    EXPECT_EQ(a.state.history().size(), 10u);

    const auto again = a.state.finalize();
    ASSERT_EQ(again.predicted_pf.front().size(), a.outputs.predicted_pf.front().size());
    for (std::size_t i = 0; i < again.predicted_pf.front().size(); ++i)
        EXPECT_EQ(again.predicted_pf.front()[i], a.outputs.predicted_pf.front()[i]);
}

TEST(Run, PureDoeStudyFront) {
    const auto prob = bnh();
    const auto cfg = config_for(prob, 12, 12, 2);
    const auto r = run(cfg, prob.evaluate);
    std::vector<ObjectiveVector> feasible;
    std::vector<std::size_t> ids;
    for (const auto& h : r.state.history()) {
        EXPECT_EQ(h.origin, Origin::doe);
        if (h.feasible) {
            feasible.push_back(h.f);
            ids.push_back(h.index);
        }
    }
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < feasible.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < feasible.size(); ++j)
            dominated = dominated || strictly_dominates(feasible[j], feasible[i]);
        if (!dominated) expect.push_back(ids[i]);
    }
    std::vector<std::size_t> got;
    for (auto i : r.outputs.pf_database.front_indices()) got.push_back(r.outputs.pf_database.entries()[i].id);
    EXPECT_EQ(got, expect);
}

TEST(Run, ArchiveHypervolumeNondecreasing) {
    const auto prob = convex_quad();
    const auto r = run(config_for(prob, 5, 14, 3), prob.evaluate);
    const auto& hist = r.state.history();
    std::vector<ObjectiveVector> all;
    for (const auto& h : hist) all.push_back(h.f);
    const VectorXd ref = reference_point(all);
    double prev = -1;
    std::vector<ObjectiveVector> seen;
    for (const auto& h : hist) {
        seen.push_back(h.f);
        const double hv = hypervolume(seen, ref).value;
        if (h.origin == Origin::infill) EXPECT_GE(hv, prev);
        prev = hv;
    }
    EXPECT_EQ(r.state.reference_history().size(), 9u);
}

TEST(Run, MaximizedObjectivesAreNegatedInFronts) {
    const auto prob = mixed_retrofit_toy();
    auto cfg = config_for(prob, 13, 15, 5);
    const auto r = run(cfg, prob.evaluate);
    ASSERT_TRUE(prob.maximize[3]);
    for (auto i : r.outputs.pf_database.front_indices()) {
        const auto& e = r.outputs.pf_database.entries()[i];
        EXPECT_EQ(e.f[3], -r.state.history()[e.id].f[3]);
        EXPECT_EQ(e.f[0], r.state.history()[e.id].f[0]);
    }
    EXPECT_EQ(r.state.to_minimization(VectorXd::Ones(4)), (VectorXd(4) << 1, 1, 1, -1).finished());
}

TEST(Run, EvaluatorExceptionMarksFailure) {
    const auto prob = convex_quad();
    int calls = 0;
    const auto r = run(config_for(prob, 4, 5), [&](const MixedPoint& p) {
        if (++calls == 2) throw std::runtime_error("workflow crashed");
        return prob.evaluate(p);
    });
    EXPECT_EQ(r.state.history().size(), 5u);
    EXPECT_EQ(r.state.history()[1].status, EvalStatus::failed);
}

TEST(Finalize, NoFeasiblePointsWarns) {
    const auto prob = convex_quad();
    auto cfg = config_for(prob, 3, 3);
    cfg.n_constraints = 1;
    const auto r = run(cfg, [&](const MixedPoint& p) {
        auto e = prob.evaluate(p);
        e.g = VectorXd::Constant(1, 1.0);
        return e;
    });
    EXPECT_TRUE(r.outputs.pf_database.front_indices().empty());
    EXPECT_FALSE(r.outputs.warnings.empty());
}

TEST(Finalize, ProximitySummaryFormat) {
    const auto prob = convex_quad();
    const auto r = run(config_for(prob, 6, 8), prob.evaluate);
    const auto& px = r.outputs.proximity;
    EXPECT_TRUE(std::regex_match(px.summary(), std::regex(R"(combined front: \d+ of \d+ database points \+ \d+ of \d+ predicted points)")))
        << px.summary();
    EXPECT_EQ(px.distances.size(), r.outputs.predicted_pf.front().size());
    EXPECT_EQ(px.predicted_total, r.outputs.predicted_pf.front().size());
    EXPECT_EQ(px.database_total, r.outputs.pf_database.front().size());
    EXPECT_LE(px.database_survivors, px.database_total);
}

TEST(History, CsvRoundTrip) {
    const auto prob = mixed_family_toy();
    auto cfg = config_for(prob, 8, 8, 6);
    const auto r = run(cfg, prob.evaluate);
    std::ostringstream os;
    write_history_csv(os, cfg, r.state.history());
    std::istringstream is(os.str());
    const auto back = read_history_csv(is, cfg);
    ASSERT_EQ(back.size(), r.state.history().size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].point, r.state.history()[i].point);
        EXPECT_EQ(back[i].f, r.state.history()[i].f);
        EXPECT_EQ(back[i].g, r.state.history()[i].g);
        EXPECT_EQ(back[i].feasible, r.state.history()[i].feasible);
    }
    std::ostringstream again;
    write_history_csv(again, cfg, back);
    EXPECT_EQ(again.str(), os.str());
    const std::string header = os.str().substr(0, os.str().find('\n'));
    EXPECT_EQ(header.rfind("index,share_", 0), 0u) << header;
    EXPECT_NE(header.find(",f1,f2,g1,g2,origin,status,feasible"), std::string::npos) << header;

    Optimizer rebuilt(cfg);
    rebuilt.restore_history(back);
    EXPECT_EQ(rebuilt.phase(), Phase::done);
}

TEST(Config, JsonRoundTripAndStrictness) {
    const auto prob = bnh();
    auto cfg = config_for(prob, 6, 20, 9);
    cfg.acquisition.criterion = Criterion::mpi;
    cfg.acquisition.reg = Regularization::max;
    cfg.kernel.family = KernelFamily::matern52;
    auto doc = cfg.to_json();
    const auto back = RunConfig::from_json(doc, prob.space);
    EXPECT_EQ(back.to_json(), doc);
    doc["space"] = prob.space.to_json();
    EXPECT_EQ(RunConfig::from_snapshot(doc).to_json(), cfg.to_json());

    auto bad = cfg.to_json();
    bad["surprise"] = 1;
    bad["acquisition"]["criterion"] = "ei";
    try {
        RunConfig::from_json(bad, prob.space);
        ADD_FAILURE() << "expected SchemaError";
    } catch (const SchemaError& e) {
        std::string all;
        for (const auto& s : e.issues()) all += s + "\n";
        EXPECT_NE(all.find("config.surprise"), std::string::npos) << all;
        EXPECT_NE(all.find("config.acquisition"), std::string::npos) << all;
    }
}

TEST(Config, ValidateRejectsBadValues) {
    const auto prob = bnh();
    auto c = config_for(prob, 6, 5);
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = config_for(prob, 1, 5);
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = config_for(prob, 4, 5);
    c.acquisition.gamma = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = config_for(prob, 4, 5);
    c.nsga2.population = 7;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_NO_THROW(config_for(prob, 4, 5).validate());
}

TEST(Artifacts, DirectoryContents) {
    const auto prob = convex_quad();
    const auto cfg = config_for(prob, 5, 6);
    const auto r = run(cfg, prob.evaluate);
    const auto dir = std::filesystem::temp_directory_path() / "mobo_driver_artifacts";
    std::filesystem::remove_all(dir);
    write_artifacts(dir.string(), r.state, r.outputs, {"hello"});
    for (const char* f : {"config.json", "history.csv", "pf_database.csv", "predicted_pf.csv", "predicted_pf_points.csv",
                          "proximity.csv", "run.log"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    std::ifstream h(dir / "history.csv");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(h, line)) ++rows;
    EXPECT_EQ(rows, 7u);
    std::ifstream c(dir / "config.json");
    const auto snap = nlohmann::json::parse(c);
    EXPECT_EQ(RunConfig::from_snapshot(snap).to_json(), cfg.to_json());
    std::filesystem::remove_all(dir);
}

}  // namespace
