// Command-line front end: benchmark runs, baselines, reports, plot data and
// the ask-tell HTTP service.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mobo/driver.hpp"
#include "mobo/problems.hpp"
#include "mobo/service.hpp"

namespace fs = std::filesystem;
using namespace mobo;

namespace {

struct RunArgs {
    std::string problem;
    std::size_t doe = 10;
    std::size_t budget = 40;
    std::string acq = "ehvi";
    std::string reg = "none";
    double gamma = 1.0;
    std::string kernel = "se";
    std::size_t pls = 3;
    std::uint64_t seed = 0;
    std::string out;
    std::string mode = "bo";
    std::size_t starts = 20;
    std::size_t population = 100;
    std::size_t generations = 200;
    bool quiet = false;
};

void add_run_flags(CLI::App* cmd, RunArgs& a) {
    cmd->add_option("--problem", a.problem, "benchmark problem name")->required();
    cmd->add_option("--doe", a.doe, "initial LHS size");
    cmd->add_option("--budget", a.budget, "total number of evaluations, DOE included");
    cmd->add_option("--acq", a.acq, "acquisition criterion")->check(CLI::IsMember({"ehvi", "pi", "mpi"}));
    cmd->add_option("--reg", a.reg, "regularization of the acquisition")->check(CLI::IsMember({"none", "max", "sum"}));
    cmd->add_option("--gamma", a.gamma, "weight of the acquisition term");
    cmd->add_option("--kernel", a.kernel, "correlation kernel")->check(CLI::IsMember({"se", "matern52"}));
    cmd->add_option("--pls", a.pls, "number of PLS components");
    cmd->add_option("--seed", a.seed, "run seed");
    cmd->add_option("--out", a.out, "artifact directory");
    cmd->add_option("--starts", a.starts, "infill multistart count");
    cmd->add_option("--population", a.population, "NSGA-II population");
    cmd->add_option("--generations", a.generations, "NSGA-II generations");
    cmd->add_flag("--quiet", a.quiet, "no per-evaluation output");
}

int unknown_problem(const std::string& name) {
    std::cerr << "unknown problem '" << name << "'. available problems:\n";
    for (const auto& n : problem_names()) std::cerr << "  " << n << " - " << make_problem(n).description << '\n';
    return 2;
}

std::string format_vector(const Eigen::VectorXd& v) {
    std::ostringstream os;
    os.precision(6);
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    return os.str();
}

int run_command(RunArgs a) {
    BenchmarkProblem problem;
    try {
        problem = make_problem(a.problem);
    } catch (const std::out_of_range&) {
        return unknown_problem(a.problem);
    }
    if (a.mode != "bo" && a.mode != "doe" && a.mode != "offline-sbo") {
        std::cerr << "--mode must be one of bo, doe, offline-sbo\n";
        return 2;
    }
    RunConfig config;
    config.space = problem.space;
    config.n_objectives = problem.n_objectives;
    config.n_constraints = problem.n_constraints;
    config.maximize = problem.maximize;
    config.doe_size = a.mode == "bo" ? a.doe : a.budget;
    config.budget = a.budget;
    config.seed = a.seed;
    config.acquisition.criterion = criterion_from_string(a.acq);
    config.acquisition.reg = regularization_from_string(a.reg);
    config.acquisition.gamma = a.gamma;
    config.kernel.family = kernel_family_from_string(a.kernel);
    config.kernel.n_pls = a.pls;
    config.infill.n_starts = a.starts;
    config.nsga2.population = a.population;
    config.nsga2.generations = a.generations;
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    if (a.out.empty()) a.out = "runs/" + problem.name + "-" + a.mode + "-s" + std::to_string(a.seed);

    std::vector<std::string> log;
    log.push_back("problem: " + problem.name + " (relaxed dimension " + std::to_string(problem.space.relaxed_dimension()) + ")");
    log.push_back("mode: " + a.mode);
    Optimizer opt(config);
    while (opt.phase() != Phase::done) {
        const MixedPoint p = opt.ask();
        PointEvaluation e;
        EvalStatus status = EvalStatus::ok;
        try {
            e = problem.evaluate(p);
        } catch (const std::exception& ex) {
            status = EvalStatus::failed;
            log.push_back(std::string("evaluation failed: ") + ex.what());
        }
        opt.tell(p, e.f, e.g, status);
        const auto& h = opt.history().back();
        std::ostringstream line;
        line << "eval " << h.index + 1 << '/' << config.budget << ' ' << to_string(h.origin) << " f=[" << format_vector(h.f)
             << "]" << (h.feasible ? "" : " infeasible");
        log.push_back(line.str());
        if (!a.quiet) std::cout << line.str() << '\n';
    }
    RunOutputs outputs;
    if (a.mode == "doe") {
        outputs.pf_database = ParetoArchive(config.n_objectives);
        outputs.predicted_pf = ParetoArchive(config.n_objectives);
        for (auto i : opt.archive().front_indices()) outputs.pf_database.add(opt.archive().entries()[i]);
        outputs.proximity.database_total = outputs.pf_database.size();
        outputs.warnings.emplace_back("doe mode: predicted front not computed");
    } else {
        outputs = opt.finalize();
    }
    write_artifacts(a.out, opt, outputs, log);
    std::cout << "pf_database: " << outputs.pf_database.size() << " points, predicted_pf: " << outputs.predicted_pf.size()
              << " points\n"
              << outputs.proximity.summary() << '\n'
              << "artifacts: " << a.out << '\n';
    for (const auto& w : outputs.warnings) std::cout << "warning: " << w << '\n';
    return 0;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    return RunConfig::from_snapshot(nlohmann::json::parse(is));
}

int report_command(const std::string& dir, std::string history_path, std::string config_path, std::string out) {
    if (config_path.empty()) config_path = (fs::path(dir) / "config.json").string();
    if (history_path.empty()) history_path = (fs::path(dir) / "history.csv").string();
    if (out.empty()) out = dir.empty() ? "report" : dir;
    RunConfig config = load_config(config_path);
    std::ifstream is(history_path);
    if (!is) throw std::runtime_error("cannot open " + history_path);
    const auto history = read_history_csv(is, config);
    Optimizer opt(config);
    opt.restore_history(history);
    const RunOutputs outputs = opt.finalize(true);
    write_artifacts(out, opt, outputs, {"report recomputed from " + history_path});
    std::cout << "history rows: " << history.size() << '\n'
              << "pf_database: " << outputs.pf_database.size() << " points, predicted_pf: " << outputs.predicted_pf.size()
              << " points\n"
              << outputs.proximity.summary() << '\n';
    return 0;
}

// Front files hold minimization values; convert back to the native sense.
std::vector<std::pair<std::string, Eigen::VectorXd>> read_front(const fs::path& path, const RunConfig& config) {
    std::vector<std::pair<std::string, Eigen::VectorXd>> rows;
    std::ifstream is(path);
    if (!is) return rows;
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell, id;
        std::getline(ss, id, ',');
        Eigen::VectorXd f(static_cast<Eigen::Index>(config.n_objectives));
        for (std::size_t i = 0; i < config.n_objectives; ++i) {
            std::getline(ss, cell, ',');
            f[static_cast<Eigen::Index>(i)] = std::stod(cell);
            if (i < config.maximize.size() && config.maximize[i]) f[static_cast<Eigen::Index>(i)] *= -1.0;
        }
        rows.emplace_back(id, f);
    }
    return rows;
}

int plot_data_command(const std::string& dir, std::string out) {
    if (out.empty()) out = (fs::path(dir) / "plot-data").string();
    const RunConfig config = load_config(fs::path(dir) / "config.json");
    std::ifstream is(fs::path(dir) / "history.csv");
    if (!is) throw std::runtime_error("cannot open history.csv in " + dir);
    const auto history = read_history_csv(is, config);
    const auto database = read_front(fs::path(dir) / "pf_database.csv", config);
    const auto predicted = read_front(fs::path(dir) / "predicted_pf.csv", config);
    fs::create_directories(out);
    std::size_t files = 0;
    for (std::size_t i = 0; i < config.n_objectives; ++i) {
        for (std::size_t j = i + 1; j < config.n_objectives; ++j) {
            const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
            std::ofstream os(fs::path(out) / ("pair_f" + std::to_string(i + 1) + "_f" + std::to_string(j + 1) + ".csv"));
            os.precision(17);
            os << "set,point_id,f" << i + 1 << ",f" << j + 1 << '\n';
            for (const auto& h : history)
                if (h.status == EvalStatus::ok)
                    os << to_string(h.origin) << (h.feasible ? "" : "_infeasible") << ',' << h.index << ',' << h.f[I] << ','
                       << h.f[J] << '\n';
            for (const auto& [id, f] : database) os << "pf_database," << id << ',' << f[I] << ',' << f[J] << '\n';
            for (const auto& [id, f] : predicted) os << "predicted_pf," << id << ',' << f[I] << ',' << f[J] << '\n';
            ++files;
        }
    }
    std::cout << files << " pair files written to " << out << '\n';
    return 0;
}

int serve_command(std::string host, int port, std::string data_dir) {
    service::SessionStore store(data_dir);
    service::HttpServer server(store);
    const int bound = server.bind(host, port);
    if (bound < 0) {
        std::cerr << "cannot bind " << host << ':' << port << '\n';
        return 1;
    }
    std::cout << "listening on " << host << ':' << bound << " (data dir " << data_dir << ", " << store.size()
              << " sessions restored)" << std::endl;
    return server.listen() ? 0 : 1;
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained multi-objective Bayesian optimization over mixed design spaces"};
    app.require_subcommand(1);

    RunArgs run_args, doe_args, sbo_args;
    auto* run = app.add_subcommand("run", "full optimization: LHS, then surrogate-guided enrichment");
    add_run_flags(run, run_args);
    run->add_option("--mode", run_args.mode, "bo, doe or offline-sbo");
    auto* doe = app.add_subcommand("doe", "evaluate an LHS of --budget points only");
    add_run_flags(doe, doe_args);
    auto* sbo = app.add_subcommand("offline-sbo", "baseline: LHS of --budget points, fit, NSGA-II on the surrogates");
    add_run_flags(sbo, sbo_args);

    std::string host = "127.0.0.1";
    int port = std::stoi(env_or("MOBO_PORT", "8080"));
    std::string data_dir = env_or("MOBO_DATA_DIR", "mobo-data");
    auto* serve = app.add_subcommand("serve", "ask-tell HTTP service");
    serve->add_option("--host", host, "listen address");
    serve->add_option("--port", port, "listen port (env MOBO_PORT)");
    serve->add_option("--data-dir", data_dir, "session event logs (env MOBO_DATA_DIR)");

    std::string report_dir, history_path, config_path, report_out;
    auto* report = app.add_subcommand("report", "recompute fronts and proximity from a history CSV");
    report->add_option("--dir", report_dir, "artifact directory holding config.json and history.csv");
    report->add_option("--history", history_path, "history CSV (default <dir>/history.csv)");
    report->add_option("--config", config_path, "config snapshot (default <dir>/config.json)");
    report->add_option("--out", report_out, "output directory (default <dir>)");

    std::string plot_dir, plot_out;
    auto* plot = app.add_subcommand("plot-data", "per-objective-pair CSVs of history and fronts");
    plot->add_option("--dir", plot_dir, "artifact directory")->required();
    plot->add_option("--out", plot_out, "output directory (default <dir>/plot-data)");

    auto* list = app.add_subcommand("problems", "list the benchmark problems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return run_command(run_args);
        if (*doe) {
            doe_args.mode = "doe";
            return run_command(doe_args);
        }
        if (*sbo) {
            sbo_args.mode = "offline-sbo";
            return run_command(sbo_args);
        }
        if (*serve) return serve_command(host, port, data_dir);
        if (*report) {
            if (report_dir.empty() && (history_path.empty() || config_path.empty())) {
                std::cerr << "report needs --dir or both --history and --config\n";
                return 2;
            }
            return report_command(report_dir, history_path, config_path, report_out);
        }
        if (*plot) return plot_data_command(plot_dir, plot_out);
        if (*list) {
            for (const auto& n : problem_names()) {
                const auto p = make_problem(n);
                std::cout << n << ": " << p.description << " (d'=" << p.space.relaxed_dimension() << ")\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
