// eigtemp command-line front end: generate, analyze, ensemble, report.

#include "eigtemp/commands.hpp"
#include "eigtemp/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace eigtemp;

namespace {

struct Flags {
    int n = 0, m = 0, threads = 0;
    double v = 0.0;
    std::string spectrum, out, config;
    std::uint64_t seed = 0;
    std::vector<double> windows;
    std::size_t window_size = 0, realizations = 0, group_size = 0;
    bool single = false, full_spectrum = false, full_size = false, vary_spectrum = false;
    std::vector<std::string> inputs;
};

void shared_flags(CLI::App* app, Flags& f)
{
    app->add_option("--n", f.n, "particles N");
    app->add_option("--m", f.m, "single-particle levels M");
    app->add_option("--v", f.v, "interaction strength V");
    app->add_option("--seed", f.seed, "master seed");
    app->add_option("--spectrum", f.spectrum, "deterministic | random")
        ->check(CLI::IsMember({"deterministic", "random"}));
    app->add_option("--out", f.out, "output directory");
    app->add_option("--threads", f.threads, "worker threads (0: runtime default)");
    app->add_option("--config", f.config, "key = value config file; flags override it");
}

RunConfig resolve(const CLI::App* app, const Flags& f)
{
    RunConfig cfg;
    if (!f.config.empty())
        cfg = apply_config_file(cfg, f.config);
    auto given = [&](const char* name) {
        const auto* opt = app->get_option_no_throw(name);
        return opt && opt->count() > 0;
    };
    if (given("--n"))
        cfg.n = f.n;
    if (given("--m"))
        cfg.m = f.m;
    if (given("--v"))
        cfg.v = f.v;
    if (given("--seed"))
        cfg.seed = f.seed;
    if (given("--spectrum"))
        cfg.spectrum = parse_spectrum_mode(f.spectrum);
    if (given("--out"))
        cfg.out = f.out;
    if (given("--threads"))
        cfg.threads = f.threads;
    if (given("--window-energy"))
        cfg.window_energies = f.windows;
    if (given("--window-size"))
        cfg.window_size = f.window_size;
    if (given("--single"))
        cfg.single = f.single;
    if (given("--full-spectrum"))
        cfg.full_spectrum = f.full_spectrum;
    if (given("--realizations"))
        cfg.realizations = f.realizations;
    if (given("--full-size"))
        cfg.full_size = f.full_size;
    if (given("--vary-spectrum"))
        cfg.vary_spectrum = f.vary_spectrum;
    if (given("--group-size"))
        cfg.group_size = f.group_size;
    if (given("--input")) {
        cfg.inputs.clear();
        for (const auto& s : f.inputs)
            cfg.inputs.emplace_back(s);
    }
    validate(cfg);
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        ensure_working_blas(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "eigtemp: " << e.what() << "\n";
        return 3;
    }

    CLI::App app{"Eigenstate temperatures of interacting bosons with random two-body couplings"};
    app.require_subcommand(1);
    Flags f;

    auto* gen = app.add_subcommand("generate", "build and diagonalize one realization, cache eigendata");
    shared_flags(gen, f);

    auto* ana = app.add_subcommand("analyze", "temperatures, ONDs and energy shifts from the cache");
    shared_flags(ana, f);
    ana->add_option("--window-energy", f.windows, "window center E* (repeatable)")->allow_extra_args(false);
    ana->add_option("--window-size", f.window_size, "eigenstates per window (default 20)");
    ana->add_flag("--single", f.single, "single-eigenstate mode (window size 1)");
    ana->add_flag("--full-spectrum", f.full_spectrum, "shift overlay over the whole spectrum");

    auto* ens = app.add_subcommand("ensemble", "disorder ensemble: fluctuations, N_cr, scaling curve");
    shared_flags(ens, f);
    ens->add_option("--window-energy", f.windows, "window center E* (repeatable)")->allow_extra_args(false);
    ens->add_option("--window-size", f.window_size, "eigenstates per window (default 20)");
    ens->add_option("--realizations", f.realizations, "number of disorder realizations");
    ens->add_flag("--full-size", f.full_size, "allow ensembles of large systems such as N=6, M=11");
    ens->add_option("--group-size", f.group_size, "eigenstates per scaling group (default 20)");
    ens->add_flag("--vary-spectrum", f.vary_spectrum, "redraw single-particle energies in every realization");

    auto* rep = app.add_subcommand("report", "collate acceptance measurements into report.json");
    shared_flags(rep, f);
    rep->add_option("--input", f.inputs, "directory with prior outputs (repeatable)")->allow_extra_args(false);

    CLI11_PARSE(app, argc, argv);

    try {
        const CLI::App* sub = app.get_subcommands().front();
        const RunConfig cfg = resolve(sub, f);
        set_threads(cfg.threads);
        std::vector<std::filesystem::path> files;
        if (sub == gen)
            files = cmd_generate(cfg);
        else if (sub == ana)
            files = cmd_analyze(cfg);
        else if (sub == ens)
            files = cmd_ensemble(cfg);
        else
            files = cmd_report(cfg);
        for (const auto& p : files)
            std::cout << p.string() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "eigtemp: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
