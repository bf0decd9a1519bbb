#include "eigtemp/commands.hpp"

#include "eigtemp/cache.hpp"
#include "eigtemp/errors.hpp"
#include "eigtemp/fluct.hpp"
#include "eigtemp/io.hpp"
#include "eigtemp/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

namespace eigtemp {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

void validate(const RunConfig& cfg)
{
    if (cfg.n < 1)
        throw DomainError("config field n: must be >= 1");
    if (cfg.m < 1)
        throw DomainError("config field m: must be >= 1");
    if (!(cfg.v >= 0.0) || !std::isfinite(cfg.v))
        throw DomainError("config field v: must be finite and >= 0");
    if (cfg.threads < 0)
        throw DomainError("config field threads: must be >= 0");
    if (cfg.window_size < 1)
        throw DomainError("config field window-size: must be >= 1");
    if (cfg.realizations < 1)
        throw DomainError("config field realizations: must be >= 1");
    if (cfg.group_size < 2)
        throw DomainError("config field group-size: must be >= 2");
    for (double e : cfg.window_energies)
        if (!std::isfinite(e))
            throw DomainError("config field window-energy: must be finite");
    if (cfg.out.empty())
        throw DomainError("config field out: must not be empty");
    basis_dimension(cfg.n, cfg.m); // overflow check
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T> T parse_number(const std::string& text, const std::string& where)
{
    T v{};
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw DomainError(where + ": cannot parse '" + text + "'");
    return v;
}

bool parse_bool(const std::string& text, const std::string& where)
{
    if (text == "1" || text == "true" || text == "yes" || text == "on")
        return true;
    if (text == "0" || text == "false" || text == "no" || text == "off")
        return false;
    throw DomainError(where + ": expected a boolean, got '" + text + "'");
}

} // namespace

RunConfig apply_config_text(RunConfig cfg, std::string_view text, const std::string& source)
{
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    bool windows_reset = false;
    bool inputs_reset = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos)
            throw DomainError(where + ": expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string val = trim(std::string_view(body).substr(eq + 1));
        const std::string field = where + ": field '" + key + "'";
        if (key == "n")
            cfg.n = parse_number<int>(val, field);
        else if (key == "m")
            cfg.m = parse_number<int>(val, field);
        else if (key == "v")
            cfg.v = parse_number<double>(val, field);
        else if (key == "spectrum") {
            try {
                cfg.spectrum = parse_spectrum_mode(val);
            } catch (const std::exception& e) {
                throw DomainError(field + ": " + e.what());
            }
        } else if (key == "seed")
            cfg.seed = parse_number<std::uint64_t>(val, field);
        else if (key == "out")
            cfg.out = val;
        else if (key == "threads")
            cfg.threads = parse_number<int>(val, field);
        else if (key == "window-energy") {
            if (!windows_reset) {
                cfg.window_energies.clear();
                windows_reset = true;
            }
            std::istringstream parts(val);
            std::string item;
            while (std::getline(parts, item, ','))
                cfg.window_energies.push_back(parse_number<double>(trim(item), field));
        } else if (key == "window-size")
            cfg.window_size = parse_number<std::size_t>(val, field);
        else if (key == "single")
            cfg.single = parse_bool(val, field);
        else if (key == "full-spectrum")
            cfg.full_spectrum = parse_bool(val, field);
        else if (key == "realizations")
            cfg.realizations = parse_number<std::size_t>(val, field);
        else if (key == "full-size")
            cfg.full_size = parse_bool(val, field);
        else if (key == "vary-spectrum")
            cfg.vary_spectrum = parse_bool(val, field);
        else if (key == "group-size")
            cfg.group_size = parse_number<std::size_t>(val, field);
        else if (key == "input") {
            if (!inputs_reset) {
                cfg.inputs.clear();
                inputs_reset = true;
            }
            cfg.inputs.emplace_back(val);
        } else
            throw DomainError(where + ": unknown key '" + key + "'");
    }
    return cfg;
}

RunConfig apply_config_file(RunConfig cfg, const fs::path& path)
{
    return apply_config_text(std::move(cfg), read_text(path), path.string());
}

namespace {

ordered_json config_json(const RunConfig& cfg)
{
    ordered_json j;
    j["n"] = cfg.n;
    j["m"] = cfg.m;
    j["v"] = cfg.v;
    j["spectrum"] = to_string(cfg.spectrum);
    j["seed"] = cfg.seed;
    j["out"] = cfg.out.string();
    j["threads"] = cfg.threads;
    j["window_energies"] = cfg.window_energies;
    j["window_size"] = cfg.window_size;
    j["single"] = cfg.single;
    j["full_spectrum"] = cfg.full_spectrum;
    j["realizations"] = cfg.realizations;
    j["full_size"] = cfg.full_size;
    j["group_size"] = cfg.group_size;
    j["vary_spectrum"] = cfg.vary_spectrum;
    std::vector<std::string> in;
    for (const auto& p : cfg.inputs)
        in.push_back(p.string());
    j["inputs"] = in;
    return j;
}

std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Non-finite values are not representable in JSON; they become null.
ordered_json num(double x)
{
    if (!std::isfinite(x))
        return nullptr;
    return x;
}

class Outputs {
public:
    Outputs(const RunConfig& cfg, std::string command)
        : cfg_(cfg), command_(std::move(command)), started_(utc_now())
    {
        fs::create_directories(cfg.out);
    }

    fs::path path(const std::string& name)
    {
        files_.push_back(cfg_.out / name);
        return files_.back();
    }

    void write_json(const std::string& name, const ordered_json& j) { write_text_atomic(path(name), j.dump(2) + "\n"); }

    void seeds(ordered_json s) { seeds_ = std::move(s); }

    std::vector<fs::path> finish()
    {
        ordered_json m;
        m["tool"] = "eigtemp";
        m["version"] = std::string(kToolVersion);
        m["command"] = command_;
        m["config"] = config_json(cfg_);
        m["started_utc"] = started_;
        m["finished_utc"] = utc_now();
        m["seeds"] = seeds_;
        ordered_json files = ordered_json::array();
        for (const auto& f : files_)
            files.push_back({{"path", f.filename().string()},
                             {"bytes", fs::file_size(f)},
                             {"sha256", sha256_file(f)}});
        m["files"] = files;
        const auto mp = cfg_.out / ("manifest-" + command_ + ".json");
        write_text_atomic(mp, m.dump(2) + "\n");
        auto out = files_;
        out.push_back(mp);
        return out;
    }

private:
    const RunConfig& cfg_;
    std::string command_;
    std::string started_;
    ordered_json seeds_ = ordered_json::object();
    std::vector<fs::path> files_;
};

ordered_json seed_json(const RealizationSeeds& s) { return {{"spectrum", s.spectrum}, {"couplings", s.couplings}}; }

const char* kCacheName = "eigendata.bin";

} // namespace

std::vector<fs::path> cmd_generate(const RunConfig& cfg)
{
    validate(cfg);
    Outputs out(cfg, "generate");
    const auto seeds = realization_seeds(cfg.seed, 0);
    out.seeds(seed_json(seeds));
    const BasisTable basis(cfg.n, cfg.m);
    const auto bundle = build_realization(basis, cfg.v, cfg.spectrum, seeds);
    const auto d = diagonalize(bundle);

    write_cache(out.path(kCacheName), bundle, d);
    {
        CsvWriter w(out.path("spectrum.csv"), {"s", "eps"});
        for (int s = 0; s < cfg.m; ++s) {
            w << s << bundle.spectrum.energies[s];
            w.end_row();
        }
        w.close();
    }
    {
        CsvWriter w(out.path("couplings.csv"), {"s1", "s2", "s3", "s4", "value"});
        std::vector<std::pair<int, int>> pairs;
        for (int a = 0; a < cfg.m; ++a)
            for (int b = a; b < cfg.m; ++b)
                pairs.emplace_back(a, b);
        const auto entries = bundle.couplings.canonical_entries();
        std::size_t idx = 0;
        for (std::size_t p = 0; p < pairs.size(); ++p)
            for (std::size_t q = p; q < pairs.size(); ++q) {
                w << pairs[p].first << pairs[p].second << pairs[q].first << pairs[q].second << entries[idx++];
                w.end_row();
            }
        w.close();
    }
    {
        CsvWriter w(out.path("eigenvalues.csv"), {"alpha", "energy"});
        for (std::size_t a = 0; a < d.dimension(); ++a) {
            w << a << d.values[static_cast<Eigen::Index>(a)];
            w.end_row();
        }
        w.close();
    }
    return out.finish();
}

namespace {

CachedRun load_matching_cache(const RunConfig& cfg)
{
    const auto path = cfg.out / kCacheName;
    if (!fs::exists(path))
        throw DomainError("analyze: no cache at " + path.string() + "; run generate first");
    auto c = read_cache(path);
    const auto seeds = realization_seeds(cfg.seed, 0);
    if (c.particles != cfg.n || c.levels != cfg.m || c.strength != cfg.v || c.spectrum.mode != cfg.spectrum ||
        c.spectrum.seed != seeds.spectrum || c.coupling_seed != seeds.couplings)
        throw DomainError("analyze: cache " + path.string() + " was generated with a different config");
    return c;
}

std::string side_status(const BedSide& s) { return s.feasible ? "ok" : (s.note.rfind("infeasible", 0) == 0 ? "infeasible" : "failed"); }

double side_beta(const BedSide& s) { return s.feasible ? s.solution.beta : std::nan(""); }
double side_z(const BedSide& s) { return s.feasible ? s.solution.z : std::nan(""); }
double side_t(const BedSide& s) { return s.feasible ? s.solution.temperature() : std::nan(""); }

} // namespace

std::vector<fs::path> cmd_analyze(const RunConfig& cfg)
{
    validate(cfg);
    const auto cache = load_matching_cache(cfg);
    Outputs out(cfg, "analyze");
    out.seeds(seed_json(realization_seeds(cfg.seed, 0)));
    const auto bundle = cache.rebuild();
    const auto& d = cache.eigen;
    const auto& sp = bundle.spectrum;
    const auto records = build_records(d, bundle);
    const auto inputs = scaling_inputs(bundle);
    const auto thermal = thermal_records(records, sp, cfg.n, inputs, cfg.v);

    // beta(E), z(E) over the open feasibility interval
    {
        const auto dom = energy_domain(cfg.n, sp);
        constexpr int points = 201;
        std::vector<double> grid;
        for (int i = 1; i <= points; ++i)
            grid.push_back(dom.e_min + (dom.e_max - dom.e_min) * i / (points + 1.0));
        const auto curve = bed_curve(cfg.n, sp, grid);
        CsvWriter w(out.path("bed_curve.csv"), {"E", "beta", "z"});
        for (const auto& p : curve) {
            w << p.energy << p.beta << p.z;
            w.end_row();
        }
        w.close();
    }

    {
        CsvWriter w(out.path("thermal.csv"),
                    {"alpha", "E_alpha", "E_dres", "beta_bare", "z_bare", "T_bare", "beta_dres", "z_dres", "T_dres",
                     "dt_over_t", "dt_over_t_analytic", "delta_alpha", "delta_alpha_analytic", "npc", "dloc",
                     "chaotic", "bare_status", "dres_status"});
        for (const auto& t : thermal) {
            w << t.record.alpha << t.record.energy << t.record.e_dres << side_beta(t.bare) << side_z(t.bare)
              << side_t(t.bare) << side_beta(t.dressed) << side_z(t.dressed) << side_t(t.dressed) << t.dt_over_t
              << t.dt_over_t_analytic << t.record.delta_alpha << t.delta_alpha_analytic << t.record.npc
              << t.record.dloc << t.chaotic << side_status(t.bare) << side_status(t.dressed);
            w.end_row();
        }
        w.close();
    }

    {
        CsvWriter w(out.path("delta_alpha.csv"), {"alpha", "E_alpha", "delta_alpha", "delta_alpha_analytic"});
        for (const auto& t : thermal) {
            if (!cfg.full_spectrum && !(t.record.energy < inputs.e_center))
                continue;
            w << t.record.alpha << t.record.energy << t.record.delta_alpha << t.delta_alpha_analytic;
            w.end_row();
        }
        w.close();
    }

    const auto ident = check_moment_identities(bundle, d);
    {
        ordered_json j;
        j["trace_rel"] = ident.trace_rel;
        j["variance_rel"] = ident.variance_rel;
        j["sf_first_moment_rel"] = ident.first_moment_rel;
        j["sf_second_moment_rel"] = ident.second_moment_rel;
        j["completeness_abs"] = ident.completeness_abs;
        j["orthonormality_abs"] = ident.orthonormality_abs;
        j["sigma0_sq_energy2"] = ident.sigma0_sq;
        j["sigma_e_sq_energy2"] = ident.sigma_e_sq;
        j["mean_sf_var_energy2"] = ident.mean_sf_var;
        j["e_center_energy"] = ident.e_center;
        out.write_json("identities.json", j);
    }

    std::vector<double> targets = cfg.window_energies;
    if (targets.empty())
        targets.push_back(inputs.e_center);
    const std::size_t width = cfg.effective_window();
    ordered_json windows = ordered_json::array();
    for (std::size_t wi = 0; wi < targets.size(); ++wi) {
        const auto win = window_average_ond(records, targets[wi], width);
        const auto bare = bed_side(cfg.n, win.mean_energy, sp);
        const auto dres = bed_side(cfg.n, win.mean_e_dres, sp);
        const auto nb = bare.feasible ? occupations(bare.solution, sp) : std::vector<double>(cfg.m, std::nan(""));
        const auto nd = dres.feasible ? occupations(dres.solution, sp) : std::vector<double>(cfg.m, std::nan(""));
        CsvWriter w(out.path("ond_window_" + std::to_string(wi) + ".csv"),
                    {"s", "eps_s", "mean_n", "std_n", "bed_bare", "bed_dressed"});
        for (int s = 0; s < cfg.m; ++s) {
            w << s << sp.energies[s] << win.mean[s] << win.stddev[s] << nb[s] << nd[s];
            w.end_row();
        }
        w.close();

        std::vector<double> dl;
        std::size_t chaotic = 0;
        for (std::size_t i : win.members) {
            dl.push_back(records[i].dloc);
            chaotic += classify(records[i], cfg.v) ? 1 : 0;
        }
        std::sort(dl.begin(), dl.end());
        const double med = dl.size() % 2 ? dl[dl.size() / 2] : 0.5 * (dl[dl.size() / 2 - 1] + dl[dl.size() / 2]);
        const double tb = side_t(bare);
        const double td = side_t(dres);
        ordered_json jw;
        jw["index"] = wi;
        jw["target_energy"] = targets[wi];
        jw["states"] = win.members.size();
        jw["short_window"] = win.short_window;
        jw["mean_energy"] = win.mean_energy;
        jw["mean_e_dres"] = win.mean_e_dres;
        jw["median_dloc_energy"] = med;
        jw["chaotic_fraction"] = static_cast<double>(chaotic) / static_cast<double>(win.members.size());
        jw["bare_status"] = side_status(bare);
        jw["dressed_status"] = side_status(dres);
        jw["beta_bare"] = num(side_beta(bare));
        jw["beta_dressed"] = num(side_beta(dres));
        jw["T_bare"] = num(tb);
        jw["T_dressed"] = num(td);
        jw["dt_over_t"] = num(bare.feasible && dres.feasible ? td / tb - 1.0 : std::nan(""));
        jw["ond_deviation_bare"] = num(bare.feasible ? ond_deviation(win.mean, nb) : std::nan(""));
        jw["ond_deviation_dressed"] = num(dres.feasible ? ond_deviation(win.mean, nd) : std::nan(""));
        windows.push_back(jw);
    }

    {
        std::size_t chaotic = 0, bare_bad = 0, dres_bad = 0;
        for (const auto& t : thermal) {
            chaotic += t.chaotic;
            bare_bad += !t.bare.feasible;
            dres_bad += !t.dressed.feasible;
        }
        ordered_json j;
        j["n"] = cfg.n;
        j["m"] = cfg.m;
        j["v_energy"] = cfg.v;
        j["dimension"] = d.dimension();
        j["sigma0_sq_energy2"] = inputs.sigma0_sq;
        j["mean_sf_var_energy2"] = inputs.mean_sf_var;
        j["e_center_energy"] = inputs.e_center;
        j["dt_over_t_analytic"] = temperature_shift_analytic(inputs);
        j["chaotic_fraction"] = static_cast<double>(chaotic) / static_cast<double>(thermal.size());
        j["bare_unassigned"] = bare_bad;
        j["dressed_unassigned"] = dres_bad;
        j["windows"] = windows;
        out.write_json("analysis_summary.json", j);
    }
    return out.finish();
}

std::vector<fs::path> cmd_ensemble(const RunConfig& cfg)
{
    validate(cfg);
    const std::size_t dim = basis_dimension(cfg.n, cfg.m);
    if (dim > kEnsembleDimensionGate && !cfg.full_size)
        throw DomainError("ensemble: " + std::to_string(dim) + " basis states exceeds " +
                          std::to_string(kEnsembleDimensionGate) + "; pass --full-size to run it anyway");
    Outputs out(cfg, "ensemble");

    EnsembleSpec spec;
    spec.particles = cfg.n;
    spec.levels = cfg.m;
    spec.strength = cfg.v;
    spec.realizations = cfg.realizations;
    spec.master_seed = cfg.seed;
    spec.mode = cfg.spectrum;
    spec.retain_all = true;
    spec.vary_spectrum = cfg.vary_spectrum;
    std::vector<double> targets = cfg.window_energies;
    if (targets.empty()) {
        const auto sp = sample_spectrum(cfg.m, cfg.spectrum, realization_seeds(cfg.seed, 0).spectrum);
        double mean = 0.0;
        for (double e : sp.energies)
            mean += e / cfg.m;
        targets.push_back(cfg.n * mean); // center of the unperturbed DOS
    }
    for (double e : targets)
        spec.windows.push_back({e, cfg.effective_window()});

    const auto res = run_ensemble(spec);
    {
        ordered_json s = ordered_json::array();
        for (std::size_t r = 0; r < cfg.realizations; ++r)
            s.push_back(seed_json(realization_seeds(cfg.seed, r, cfg.vary_spectrum)));
        out.seeds(s);
    }

    ordered_json fits = ordered_json::array();
    ordered_json ks = ordered_json::array();
    for (std::size_t wi = 0; wi < spec.windows.size(); ++wi) {
        const auto samples = pooled_window_fluctuations(res, wi);
        {
            CsvWriter w(out.path("fluct_samples_w" + std::to_string(wi) + ".csv"),
                        {"s", "value", "realization", "alpha"});
            for (const auto& x : samples.samples) {
                w << x.level << x.value << x.realization << x.alpha;
                w.end_row();
            }
            w.close();
        }
        CsvWriter hist(out.path("histograms_w" + std::to_string(wi) + ".csv"), {"s", "bin_lo", "bin_hi", "count"});
        ordered_json jw;
        jw["window"] = wi;
        jw["target_energy"] = spec.windows[wi].energy;
        jw["excluded_levels"] = samples.excluded_levels;
        ordered_json levels = ordered_json::array();
        for (int s = 0; s < cfg.m; ++s) {
            const auto v = samples.level_values(s);
            if (v.empty())
                continue;
            const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            const int k = static_cast<int>(std::ceil(std::log2(static_cast<double>(v.size())))) + 1;
            std::vector<std::size_t> counts(k, 0);
            const double width = *hi > *lo ? (*hi - *lo) / k : 1.0;
            for (double x : v)
                ++counts[std::min(k - 1, static_cast<int>((x - *lo) / width))];
            for (int b = 0; b < k; ++b) {
                hist << s << *lo + b * width << *lo + (b + 1) * width << counts[b];
                hist.end_row();
            }
            ordered_json jl;
            jl["s"] = s;
            jl["samples"] = v.size();
            if (v.size() >= 30) {
                const auto f = gaussian_fit(v);
                jl["mean"] = f.mean;
                jl["sigma"] = f.sigma;
                jl["chi2_per_dof"] = num(f.goodness);
                jl["dof"] = f.dof;
                jl["fitted"] = f.fitted;
                jl["degenerate"] = f.degenerate;
            } else {
                jl["fitted"] = false;
                jl["note"] = "fewer than 30 samples";
            }
            levels.push_back(jl);
        }
        hist.close();
        jw["levels"] = levels;
        fits.push_back(jw);

        if (res.realizations.size() >= 2) {
            const auto dis = disorder_fluctuations(res, wi);
            const auto r = ks_two_sample(samples.values(), dis.values());
            ks.push_back({{"window", wi}, {"statistic", r.statistic}, {"critical_1pct", r.critical}, {"same", r.same}});
        }
    }
    out.write_json("gaussian_fit.json", fits);

    ordered_json summary;
    summary["n"] = cfg.n;
    summary["m"] = cfg.m;
    summary["v_energy"] = cfg.v;
    summary["realizations"] = cfg.realizations;
    summary["failed_realizations"] = res.failures.size();
    summary["ks"] = ks;
    std::vector<double> npc, dloc;
    for (const auto& r : res.realizations)
        for (const auto& rec : r.records) {
            npc.push_back(rec.npc);
            dloc.push_back(rec.dloc);
        }
    try {
        const auto crit = critical_npc(npc, dloc, cfg.v);
        summary["n_cr"] = crit.n_cr;
        const auto groups = fluctuation_groups(res, cfg.group_size);
        const auto rep = scaling_curve(groups, crit.n_cr);
        CsvWriter w(out.path("scaling.csv"), {"npc_over_ncr", "mean_fluct", "count"});
        for (const auto& b : rep.bins) {
            w << b.npc_over_ncr << b.mean_fluct << b.count;
            w.end_row();
        }
        w.close();
        summary["exponent"] = rep.fitted ? ordered_json(rep.exponent) : ordered_json(nullptr);
        summary["exponent_error"] = rep.fitted ? ordered_json(rep.exponent_error) : ordered_json(nullptr);
        summary["amplitude"] = rep.fitted ? ordered_json(rep.amplitude) : ordered_json(nullptr);
        summary["supercritical_bins"] = rep.supercritical_bins;
        summary["plateau_ratio"] = rep.plateau_ratio;
    } catch (const ConvergenceError& e) {
        summary["n_cr"] = nullptr;
        summary["scaling_error"] = e.what();
    }
    out.write_json("ensemble_summary.json", summary);
    return out.finish();
}

std::vector<fs::path> cmd_report(const RunConfig& cfg)
{
    validate(cfg);
    std::vector<fs::path> dirs = cfg.inputs;
    if (dirs.empty())
        dirs.push_back(cfg.out);
    const char* needed[] = {"identities.json", "analysis_summary.json", "ensemble_summary.json"};
    ordered_json found;
    std::vector<std::string> missing;
    for (const char* name : needed) {
        bool ok = false;
        for (const auto& d : dirs)
            if (fs::exists(d / name)) {
                found[name] = nlohmann::ordered_json::parse(read_text(d / name));
                ok = true;
                break;
            }
        if (!ok)
            missing.push_back(name);
    }
    if (!missing.empty()) {
        std::string msg = "report: missing inputs:";
        for (const auto& m : missing)
            msg += " " + m;
        throw DomainError(msg);
    }
    Outputs out(cfg, "report");
    const auto& id = found["identities.json"];
    const auto& an = found["analysis_summary.json"];
    const auto& en = found["ensemble_summary.json"];
    ordered_json r;
    r["identities"] = {{"trace_rel", id["trace_rel"]},
                       {"variance_rel", id["variance_rel"]},
                       {"sf_first_moment_rel", id["sf_first_moment_rel"]},
                       {"sf_second_moment_rel", id["sf_second_moment_rel"]}};
    double worst = 0.0;
    for (const char* k : {"trace_rel", "variance_rel", "sf_first_moment_rel", "sf_second_moment_rel"})
        worst = std::max(worst, id[k].get<double>());
    r["identities_max_residual"] = worst;
    r["identities_pass_1e-8"] = worst <= 1e-8;
    r["dt_over_t_analytic"] = an["dt_over_t_analytic"];
    ordered_json w = ordered_json::array();
    for (const auto& x : an["windows"])
        w.push_back({{"target_energy", x["target_energy"]},
                     {"dt_over_t", x["dt_over_t"]},
                     {"T_bare", x["T_bare"]},
                     {"T_dressed", x["T_dressed"]},
                     {"median_dloc_energy", x["median_dloc_energy"]}});
    r["windows"] = w;
    r["n_cr"] = en["n_cr"];
    r["exponent"] = en.contains("exponent") ? en["exponent"] : ordered_json(nullptr);
    r["exponent_error"] = en.contains("exponent_error") ? en["exponent_error"] : ordered_json(nullptr);
    r["plateau_ratio"] = en.contains("plateau_ratio") ? en["plateau_ratio"] : ordered_json(nullptr);
    r["ks"] = en["ks"];
    out.write_json("report.json", r);
    return out.finish();
}

} // namespace eigtemp
