#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "carnot/report.hpp"

using namespace carnot;
namespace fs = std::filesystem;

namespace {

Errc error_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return static_cast<Errc>(-1);
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("carnot_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(CARNOT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, SectionsAndComments) {
    const auto c = io::Config::parse("experiments = phi  # trailing\n\n[phi]\nnu = 1, 0\n[budget]\nscale=2\n");
    EXPECT_EQ(c.get("experiments"), "phi");
    EXPECT_EQ(c.numbers("phi.nu"), (std::vector<double>{1.0, 0.0}));
    EXPECT_EQ(c.number("budget.scale", 1.0), 2.0);
    EXPECT_EQ(c.entries().size(), 3u);
}

TEST(Config, Malformed) {
    EXPECT_EQ(error_of([] { io::Config::parse("a = 1\na = 2\n"); }), Errc::ConfigError);
    EXPECT_EQ(error_of([] { io::Config::parse("just words\n"); }), Errc::ConfigError);
    EXPECT_EQ(error_of([] { io::Config::parse("[open\n"); }), Errc::ConfigError);
    EXPECT_EQ(error_of([] { io::Config::parse("x = 1,zz").numbers("x"); }), Errc::ConfigError);
    EXPECT_EQ(error_of([] { Runner(io::Config::parse("seed = -3x\n")); }), Errc::ConfigError);
}

TEST(Runner, RejectsUnknownKeysAndExperiments) {
    EXPECT_EQ(error_of([] { Runner(io::Config::parse("experiments = phi\nphi.nnu = 1,0\n")); }), Errc::ConfigError);
    EXPECT_EQ(error_of([] { Runner(io::Config::parse("experiments = teleport\n")); }), Errc::ConfigError);
    EXPECT_EQ(error_of([] { Runner(io::Config::parse("experiments = phi, phi\n")); }), Errc::ConfigError);
    EXPECT_EQ(error_of([] { Runner(io::Config::parse("experiments = ledoux\nregion = cylinder:1\n")); }), Errc::ConfigError);
    EXPECT_EQ(error_of([] { Runner(io::Config::parse("experiments = phi\ngroup = heisenberg:x\n")); }), Errc::ConfigError);
    EXPECT_EQ(error_of([] { Runner(io::Config::parse("output.format = xml\n")); }), Errc::ConfigError);
    // labelled entries own their keys
    EXPECT_NO_THROW(Runner(io::Config::parse("experiments = phi.a\nphi.a.nu = 0,1\n")));
    EXPECT_EQ(error_of([] { Runner(io::Config::parse("experiments = phi.a\nphi.b.nu = 0,1\n")); }), Errc::ConfigError);
}

TEST(Runner, EmptyExperimentList) {
    Runner r(io::Config::parse("seed = 7\n"));
    const auto rep = r.run();
    EXPECT_TRUE(rep.experiments.empty());
    EXPECT_TRUE(rep.passed());
    EXPECT_EQ(io::to_json(rep)["seed"], 7u);
}

TEST(Runner, ErrorsAreCapturedPerExperiment) {
    Runner r(io::Config::parse("experiments = kernel-eval.bad, kernel-eval.good\nkernel-eval.bad.point = 1,2\n"
                               "kernel-eval.good.point = 0,0,0\n"));
    const auto rep = r.run();
    ASSERT_EQ(rep.experiments.size(), 2u);
    EXPECT_EQ(rep.experiments[0].status, "error");
    EXPECT_EQ(rep.experiments[0].error_code, "ConfigError");
    EXPECT_EQ(rep.experiments[1].status, "pass");
    EXPECT_NEAR(rep.experiments[1].quantities[0].value, 0.0625, 1e-10);
    EXPECT_FALSE(rep.passed());
}

TEST(Json, GroupRoundTrip) {
    for (const char* name : {"heisenberg:2", "h1xr", "htype:3"}) {
        const auto G = group_from_name(name);
        const auto H = io::group_from_json(io::group_to_json(G));
        ASSERT_EQ(H.k(), G.k());
        for (int l = 0; l < G.k(); ++l) EXPECT_EQ((H.J(l) - G.J(l)).norm(), 0.0) << name;
    }
    EXPECT_EQ(error_of([] { io::group_from_json(io::json::parse(R"({"m": 2, "k": 1})")); }), Errc::ConfigError);
    EXPECT_EQ(error_of([] { io::group_from_json(io::json::parse(R"({"m": 2, "k": 1, "J": [[0, 1, 1, 0]]})")); }), Errc::NotSkew);
    EXPECT_EQ(error_of([] { io::group_from_json(io::json::parse(R"({"m": 2, "k": 1, "J": [[0, 1, -1]]})")); }), Errc::ConfigError);
}

TEST(Json, RegionRoundTrip) {
    const auto G = make_heisenberg(1);
    for (const char* name : {"cylinder:1,2", "box:-1,1,-2,2,0,1", "ball:1.5", "halfspace:0.5"}) {
        const auto E = region_from_name(name, G);
        EXPECT_EQ(describe(io::region_from_json(io::region_to_json(E))), describe(E)) << name;
    }
    EXPECT_EQ(error_of([] { io::region_from_json(io::json::parse(R"({"type": "torus"})")); }), Errc::ConfigError);
}

TEST(Json, FilesResolveAgainstConfigDirectory) {
    const auto dir = scratch("files");
    write(dir / "g.json", R"({"m": 2, "k": 1, "J": [[0, 1, -1, 0]]})");
    write(dir / "bad.json", R"({"m": 2, "k": 1, "J": [[0, 1, -1, 0]] )");
    write(dir / "run.conf", "experiments = kernel-eval\ngroup = g.json\nkernel-eval.point = 0,0,0\n");
    write(dir / "bad.conf", "experiments = kernel-eval\ngroup = bad.json\nkernel-eval.point = 0,0,0\n");
    Runner r(io::Config::load(dir / "run.conf"));
    EXPECT_TRUE(r.run().passed());
    EXPECT_EQ(error_of([&] { Runner(io::Config::load(dir / "bad.conf")); }), Errc::ConfigError);
}

TEST(Emit, ByteIdenticalReports) {
    const std::string text = "experiments = phi, kernel-selftest\nseed = 99\nkernel-selftest.samples = 4\n";
    const auto a = scratch("emit_a"), b = scratch("emit_b");
    for (const auto& d : {a, b}) {
        Runner r(io::Config::parse(text));
        const auto rep = r.run();
        EXPECT_TRUE(rep.passed());
        io::emit(rep, d, "json");
        io::emit(rep, d, "csv");
    }
    for (const char* f : {"report.json", "phi.csv", "kernel-selftest.csv"}) {
        const auto x = slurp(a / f);
        EXPECT_FALSE(x.empty()) << f;
        EXPECT_EQ(x, slurp(b / f)) << f;
        EXPECT_EQ(x.back(), '\n') << f;
    }
    EXPECT_TRUE(fs::exists(a / "timing.json"));
    const auto j = io::json::parse(slurp(a / "report.json"));
    EXPECT_EQ(j["seed"], 99u);
    EXPECT_EQ(j["config"]["seed"], "99");
    EXPECT_EQ(j["experiments"][0]["checks"][0]["name"], "direct");
    EXPECT_EQ(slurp(a / "phi.csv").substr(0, 35), "param,value,error,target,deviation\n");
}

TEST(Emit, ClosedFormTag) {
    ExperimentResult e;
    e.note("exact", 1.0, std::numeric_limits<double>::quiet_NaN());
    EXPECT_EQ(io::to_json(e, 1)["quantities"][0]["error"], "closed-form");
    EXPECT_NE(io::to_csv(e).find("closed-form"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("exit");
    write(dir / "empty.conf", "# nothing to do\n");
    write(dir / "strict.conf", "experiments = phi\nphi.tolerance = 1e-12\nphi.tolerance_inversion = 1e-12\n");
    EXPECT_EQ(cli("run " + (dir / "empty.conf").string()), 0);
    EXPECT_EQ(cli("run " + (dir / "missing.conf").string()), 2);
    EXPECT_EQ(cli("run " + (dir / "strict.conf").string()), 1);
    EXPECT_EQ(cli("kernel eval --point 0,0,0"), 0);
    EXPECT_EQ(cli("kernel eval --point 0,0,0 --group nope:1"), 2);
    EXPECT_EQ(cli("kernel eval"), 2);
    EXPECT_EQ(cli("no-such-command"), 2);
    EXPECT_EQ(cli("phi --group heisenberg:1 --nu 1,1 --out-dir " + (dir / "phi").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "phi" / "report.json"));
    EXPECT_EQ(cli("phi --format xml"), 2);
}

TEST(Cli, ShippedConfigsParse) {
    for (const auto& entry : fs::directory_iterator(CARNOT_CONFIG_DIR)) {
        if (entry.path().extension() != ".conf") continue;
        EXPECT_NO_THROW(Runner(io::Config::load(entry.path()))) << entry.path();
    }
}
