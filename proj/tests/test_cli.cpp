#include <gtest/gtest.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct Outcome {
    int code = -1;
    std::string output;
};

Outcome sh(const std::string& args) {
    const std::string cmd = std::string(MOBO_CLI) + " " + args + " 2>&1";
    Outcome o;
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe.get())) > 0) o.output.append(buf.data(), n);
    const int status = pclose(pipe.release());
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("mobo_cli_" + name);
    fs::remove_all(d);
    return d;
}

TEST(Cli, UnknownProblemListsCatalog) {
    const auto o = sh("run --problem no-such-thing");
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.output.find("mixed-retrofit-toy"), std::string::npos) << o.output;
    EXPECT_NE(o.output.find("cat-supply-toy"), std::string::npos);
}

TEST(Cli, InvalidFlagsFail) {
    EXPECT_NE(sh("run --problem zdt1 --acq ei").code, 0);
    EXPECT_NE(sh("run --problem zdt1 --doe 10 --budget 5 --out " + fresh_dir("bad").string()).code, 0);
    EXPECT_NE(sh("frobnicate").code, 0);
    EXPECT_EQ(sh("problems").code, 0);
}

TEST(Cli, RunReportAndPlotData) {
    const auto dir = fresh_dir("run");
    const auto r = sh("run --problem mixed-retrofit-toy --doe 13 --budget 17 --acq ehvi --reg sum --seed 1 --starts 6 "
                      "--population 20 --generations 10 --quiet --out " + dir.string());
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(line_count(dir / "history.csv"), 18u);
    for (const char* f : {"config.json", "pf_database.csv", "predicted_pf.csv", "proximity.csv", "run.log"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;

    // Truncate the history to the DOE plus two rows and recompute.
    std::ifstream in(dir / "history.csv");
    std::ofstream trunc(dir / "short.csv");
    std::string line;
    for (int i = 0; i < 16 && std::getline(in, line); ++i) trunc << line << '\n';
    trunc.close();
    const auto out = dir / "report";
    const auto rep = sh("report --history " + (dir / "short.csv").string() + " --config " +
                        (dir / "config.json").string() + " --out " + out.string());
    EXPECT_EQ(rep.code, 0) << rep.output;
    EXPECT_TRUE(fs::exists(out / "pf_database.csv"));
    EXPECT_TRUE(fs::exists(out / "predicted_pf.csv"));

    const auto plot = sh("plot-data --dir " + dir.string());
    EXPECT_EQ(plot.code, 0) << plot.output;
    std::size_t pairs = 0;
    for (const auto& e : fs::directory_iterator(dir / "plot-data"))
        pairs += e.path().filename().string().rfind("pair_f", 0) == 0;
    EXPECT_EQ(pairs, 6u);
    std::ifstream pf(dir / "plot-data" / "pair_f1_f2.csv");
    std::getline(pf, line);
    EXPECT_EQ(line, "set,point_id,f1,f2");
}

TEST(Cli, DoeAndOfflineModes) {
    const auto d1 = fresh_dir("doe");
    ASSERT_EQ(sh("doe --problem bnh --budget 9 --seed 2 --quiet --out " + d1.string()).code, 0);
    EXPECT_EQ(line_count(d1 / "history.csv"), 10u);
    const auto d2 = fresh_dir("sbo");
    const auto o = sh("run --mode offline-sbo --problem bnh --budget 9 --seed 2 --population 20 --generations 10 --quiet --out " +
                      d2.string());
    ASSERT_EQ(o.code, 0) << o.output;
    EXPECT_EQ(line_count(d2 / "history.csv"), 10u);
    EXPECT_GT(line_count(d2 / "predicted_pf.csv"), 1u);
}

TEST(Cli, ServeHonoursEnvironment) {
    const auto data = fresh_dir("serve");
    const int port = 20000 + static_cast<int>(getpid() % 20000);
    const pid_t pid = fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
        setenv("MOBO_PORT", std::to_string(port).c_str(), 1);
        setenv("MOBO_DATA_DIR", data.c_str(), 1);
        execl(MOBO_CLI, MOBO_CLI, "serve", static_cast<char*>(nullptr));
        _exit(127);
    }
    httplib::Client cli("127.0.0.1", port);
    httplib::Result res;
    for (int i = 0; i < 100 && !res; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        res = cli.Get("/v1/sessions/none");
    }
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 404);
    EXPECT_EQ(nlohmann::json::parse(res->body)["error"]["code"], "unknown_session");
    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    EXPECT_TRUE(fs::exists(data));
}

}  // namespace
