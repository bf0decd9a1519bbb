#include <doctest.h>

#include "eigtemp/cache.hpp"
#include "eigtemp/commands.hpp"
#include "eigtemp/errors.hpp"
#include "eigtemp/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <random>

using namespace eigtemp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("eigtemp-test-" + std::to_string(::getpid()) + "-" + name);
    fs::remove_all(p);
    return p;
}

std::vector<std::string> lines(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

nlohmann::json manifest_files(const fs::path& dir, const std::string& cmd)
{
    auto j = nlohmann::json::parse(read_text(dir / ("manifest-" + cmd + ".json")));
    return j["files"];
}

RunConfig small_config(const fs::path& out)
{
    RunConfig c;
    c.n = 4;
    c.m = 7;
    c.v = 0.4;
    c.seed = 3;
    c.out = out;
    c.window_energies = {8.0, 14.0};
    c.realizations = 3;
    return c;
}

} // namespace

TEST_CASE("round-trip number formatting")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        const auto s = format_double(x);
        double y = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), y);
        CHECK(y == x);
    }
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("sha256 known answer")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("csv writer enforces the column count")
{
    const auto dir = scratch("csv");
    fs::create_directories(dir);
    CsvWriter w(dir / "a.csv", {"x", "y"});
    w << 1 << 0.5;
    w.end_row();
    CHECK_THROWS_AS((w << 1 << 2 << 3), IntegrityError);
    fs::remove_all(dir);
}

TEST_CASE("eigendata cache round trip")
{
    const auto dir = scratch("cache");
    fs::create_directories(dir);
    const BasisTable t(3, 5);
    const auto b = assemble(t, sample_spectrum(5, SpectrumMode::random, 1), sample_couplings(5, 0.3, 2));
    const auto d = diagonalize(b);
    write_cache(dir / "c.bin", b, d);
    const auto c = read_cache(dir / "c.bin");
    CHECK(c.particles == 3);
    CHECK(c.levels == 5);
    CHECK(c.strength == 0.3);
    CHECK(c.spectrum.energies == b.spectrum.energies);
    CHECK((c.eigen.values.array() == d.values.array()).all());
    CHECK((c.eigen.vectors.array() == d.vectors.array()).all());
    const auto rb = c.rebuild();
    CHECK((rb.matrix.array() == b.matrix.array()).all());

    auto bytes = read_text(dir / "c.bin");
    write_text_atomic(dir / "short.bin", bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(read_cache(dir / "short.bin"), IntegrityError);
    bytes[0] = 'X';
    write_text_atomic(dir / "bad.bin", bytes);
    CHECK_THROWS_AS(read_cache(dir / "bad.bin"), IntegrityError);
    fs::remove_all(dir);
}

TEST_CASE("config text")
{
    RunConfig c;
    c = apply_config_text(c, "# comment\nn = 5\nm=9 # trailing\nv = 0.25\nspectrum = deterministic\n"
                             "window-energy = 3, 4.5\nwindow-energy = 7\nsingle = true\n",
                          "test.cfg");
    CHECK(c.n == 5);
    CHECK(c.m == 9);
    CHECK(c.v == 0.25);
    CHECK(c.spectrum == SpectrumMode::deterministic);
    CHECK(c.window_energies == std::vector<double>{3, 4.5, 7});
    CHECK(c.effective_window() == 1);
    try {
        apply_config_text(c, "n = 5\n\nbogus = 1\n", "x.cfg");
        FAIL("no error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("x.cfg:3") != std::string::npos);
    }
    CHECK_THROWS_AS(apply_config_text(c, "n = five\n", "x.cfg"), DomainError);
    CHECK_THROWS_AS(apply_config_text(c, "just words\n", "x.cfg"), DomainError);
    RunConfig bad;
    bad.v = -1.0;
    CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("generate and analyze outputs")
{
    const auto dir = scratch("pipeline");
    const auto cfg = small_config(dir);
    CHECK_THROWS_AS(cmd_analyze(cfg), DomainError);
    cmd_generate(cfg);
    const auto files = cmd_analyze(cfg);
    CHECK(files.back().filename() == "manifest-analyze.json");

    CHECK(lines(dir / "eigenvalues.csv").size() == 211);
    const auto ond = lines(dir / "ond_window_0.csv");
    REQUIRE(ond.size() == 8);
    CHECK(ond[0] == "s,eps_s,mean_n,std_n,bed_bare,bed_dressed");
    CHECK(lines(dir / "thermal.csv")[0].rfind("alpha,E_alpha,E_dres,beta_bare,z_bare,T_bare,beta_dres", 0) == 0);
    CHECK(lines(dir / "thermal.csv").size() == 211);
    CHECK(lines(dir / "bed_curve.csv")[0] == "E,beta,z");

    // shift overlay defaults to the lower half of the spectrum
    const auto summary = nlohmann::json::parse(read_text(dir / "analysis_summary.json"));
    const double ec = summary["e_center_energy"];
    const auto da = lines(dir / "delta_alpha.csv");
    for (std::size_t i = 1; i < da.size(); ++i) {
        const auto c1 = da[i].find(',');
        CHECK(std::stod(da[i].substr(c1 + 1)) < ec);
    }

    // every emitted file is declared with its digest
    for (const auto& f : manifest_files(dir, "analyze"))
        CHECK(f["sha256"] == sha256_file(dir / f["path"].get<std::string>()));

    auto other = cfg;
    other.v = 0.1;
    CHECK_THROWS_AS(cmd_analyze(other), DomainError);
    fs::remove_all(dir);
}

TEST_CASE("reruns reproduce digests")
{
    const auto a = scratch("rerun-a");
    const auto b = scratch("rerun-b");
    for (const auto& dir : {a, b}) {
        const auto cfg = small_config(dir);
        cmd_generate(cfg);
        cmd_analyze(cfg);
        cmd_ensemble(cfg);
    }
    for (const char* cmd : {"generate", "analyze", "ensemble"}) {
        const auto fa = manifest_files(a, cmd);
        const auto fb = manifest_files(b, cmd);
        CHECK(fa == fb);
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("ensemble and report outputs")
{
    const auto dir = scratch("ensemble");
    auto cfg = small_config(dir);
    cfg.realizations = 2;
    CHECK_THROWS_AS(cmd_report(cfg), DomainError);
    cmd_ensemble(cfg);
    for (const char* f : {"fluct_samples_w0.csv", "fluct_samples_w1.csv", "histograms_w0.csv", "gaussian_fit.json",
                          "ensemble_summary.json", "manifest-ensemble.json"})
        CHECK(fs::exists(dir / f));

    // histogram counts = retained states x levels - excluded levels
    const auto fits = nlohmann::json::parse(read_text(dir / "gaussian_fit.json"));
    for (int w = 0; w < 2; ++w) {
        long total = 0;
        const auto h = lines(dir / ("histograms_w" + std::to_string(w) + ".csv"));
        for (std::size_t i = 1; i < h.size(); ++i)
            total += std::stol(h[i].substr(h[i].rfind(',') + 1));
        const long excluded = static_cast<long>(fits[w]["excluded_levels"].size());
        CHECK(total == 2 * 20 * (7 - excluded));
        CHECK(lines(dir / ("fluct_samples_w" + std::to_string(w) + ".csv")).size() == static_cast<std::size_t>(total + 1));
    }

    if (fs::exists(dir / "scaling.csv")) {
        const auto s = lines(dir / "scaling.csv");
        for (std::size_t i = 2; i < s.size(); ++i)
            CHECK(std::stod(s[i]) > std::stod(s[i - 1]));
    }

    try {
        cmd_report(cfg);
        FAIL("no error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("identities.json") != std::string::npos);
        CHECK(std::string(e.what()).find("analysis_summary.json") != std::string::npos);
    }
    cmd_generate(cfg);
    cmd_analyze(cfg);
    cmd_report(cfg);
    const auto first = read_text(dir / "report.json");
    cmd_report(cfg);
    CHECK(read_text(dir / "report.json") == first);
    const auto r = nlohmann::json::parse(first);
    CHECK(r["identities_max_residual"].get<double>() <= 1e-8);
    fs::remove_all(dir);
}

TEST_CASE("large ensembles need the explicit flag")
{
    RunConfig c;
    c.n = 6;
    c.m = 11;
    c.out = scratch("gate");
    CHECK_THROWS_AS(cmd_ensemble(c), DomainError);
    fs::remove_all(c.out);
}
