// carnot: command line front end. Every subcommand builds a one-experiment
// config and goes through the same runner as `carnot run <config>`.
//
// exit codes: 0 all targets met, 1 a numeric target missed, 2 usage or config error

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "carnot/report.hpp"

using namespace carnot;

namespace {

struct Globals {
    std::string seed, out_dir, format;
    double budget_scale = 0.0;
};

int execute(io::Config cfg, const Globals& g) {
    if (!g.seed.empty()) cfg.set("seed", g.seed);
    if (g.budget_scale > 0.0) cfg.set("budget.scale", io::fmt(g.budget_scale));
    if (!g.out_dir.empty()) cfg.set("output.dir", g.out_dir);
    if (!g.format.empty()) cfg.set("output.format", g.format);
    std::optional<Runner> runner;
    try {
        runner.emplace(cfg);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    const auto report = runner->run();
    for (const auto& e : report.experiments) {
        std::cerr << e.name << ": " << e.status;
        if (e.status == "error") std::cerr << " (" << e.message << ")";
        std::cerr << " [" << io::short_fmt(e.runtime) << " s]\n";
    }
    const auto format = cfg.get("output.format", "json");
    const auto dir = cfg.get("output.dir");
    try {
        if (!dir.empty()) {
            std::filesystem::path p = dir;
            if (p.is_relative() && !cfg.base().empty() && g.out_dir.empty()) p = cfg.base() / p;
            for (const auto& f : io::emit(report, p, format)) std::cerr << "wrote " << f.string() << "\n";
        } else if (format == "csv") {
            for (const auto& e : report.experiments) std::cout << (report.experiments.size() > 1 ? "# " + e.name + "\n" : "") << io::to_csv(e);
        } else {
            std::cout << io::report_text(report);
        }
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 2;
    }
    return report.passed() ? 0 : 1;
}

io::Config single(const std::string& kind, const std::map<std::string, std::string>& keys) {
    io::Config c;
    c.set("experiments", kind);
    for (const auto& [k, v] : keys)
        if (!v.empty()) c.set(kind + "." + k, v);
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heat kernels and nonlocal perimeters on step-two Carnot groups"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--budget-scale", g.budget_scale, "multiply node and sample budgets")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "write report files here instead of stdout");
    app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    std::string group = "heisenberg:1", region = "cylinder:1,1", point, from, t, times, s_grid, tol, nu, config_path;
    std::function<int()> action;

    auto* kernel = app.add_subcommand("kernel", "heat kernel evaluation and self-tests");
    kernel->require_subcommand(1);
    auto* keval = kernel->add_subcommand("eval", "p(from, point, t) with an error estimate");
    keval->add_option("--group", group, "builtin name or JSON spec file");
    keval->add_option("--point", point, "comma separated z then sigma")->required();
    keval->add_option("--from", from, "base point (default: identity)");
    keval->add_option("--t", t, "time")->default_val("1");
    keval->callback([&] { action = [&] { return execute(single("kernel-eval", {{"group", group}, {"point", point}, {"from", from}, {"t", t}}), g); }; });
    auto* ktest = kernel->add_subcommand("selftest", "diagonal value, normalization, scaling and marginal identities");
    ktest->add_option("--group", group, "builtin name or JSON spec file");
    ktest->callback([&] { action = [&] { return execute(single("kernel-selftest", {{"group", group}}), g); }; });

    auto region_cmd = [&](const char* name, const char* help, const std::string& kind) {
        auto* sc = app.add_subcommand(name, help);
        sc->add_option("--group", group, "builtin name or JSON spec file");
        sc->add_option("--region", region, "builtin (cylinder:R,h, box:..., ball:rho) or JSON file");
        return std::pair{sc, kind};
    };
    {
        auto [sc, kind] = region_cmd("perimeter", "horizontal perimeter and variational lower bound", "perimeter");
        sc->add_option("--tolerance", tol, "relative tolerance against the closed form");
        sc->callback([&, kind] { action = [&, kind] { return execute(single(kind, {{"group", group}, {"region", region}, {"tolerance", tol}}), g); }; });
    }
    {
        auto [sc, kind] = region_cmd("ledoux", "small-time Ledoux plateau", "ledoux");
        sc->add_option("--times", times, "comma separated t values");
        sc->add_option("--tolerance", tol, "relative tolerance on the extrapolated limit");
        sc->callback([&, kind] {
            action = [&, kind] { return execute(single(kind, {{"group", group}, {"region", region}, {"times", times}, {"tolerance", tol}}), g); };
        });
    }
    {
        auto [sc, kind] = region_cmd("sperimeter", "nonlocal s-perimeter on an s grid", "sperimeter");
        sc->add_option("--s-grid", s_grid, "comma separated s values in (0, 1/2)");
        sc->callback([&, kind] { action = [&, kind] { return execute(single(kind, {{"group", group}, {"region", region}, {"s_grid", s_grid}}), g); }; });
    }
    {
        auto [sc, kind] = region_cmd("bbm-limit", "(1 - 2s) times the s-perimeter, extrapolated to s = 1/2", "bbm-limit");
        sc->add_option("--s-grid", s_grid, "comma separated s values in (0, 1/2)");
        sc->add_option("--tolerance", tol, "relative tolerance on the extrapolated limit");
        sc->callback([&, kind] {
            action = [&, kind] { return execute(single(kind, {{"group", group}, {"region", region}, {"s_grid", s_grid}, {"tolerance", tol}}), g); };
        });
    }
    auto* phi = app.add_subcommand("phi", "heat kernel integral over a vertical hyperplane, two routes");
    phi->add_option("--group", group, "builtin name or JSON spec file");
    phi->add_option("--nu", nu, "horizontal direction, comma separated (normalised)");
    phi->callback([&] { action = [&] { return execute(single("phi", {{"group", group}, {"nu", nu}}), g); }; });

    auto* euclid = app.add_subcommand("euclid-check", "Euclidean closed-form oracle suite");
    euclid->callback([&] { action = [&] { return execute(single("euclid-check", {}), g); }; });

    auto* run = app.add_subcommand("run", "run every experiment listed in a config file");
    run->add_option("config", config_path, "config file")->required();
    run->callback([&] {
        action = [&] {
            io::Config c;
            try {
                c = io::Config::load(config_path);
            } catch (const Error& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            return execute(c, g);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return action ? action() : 2;
}
