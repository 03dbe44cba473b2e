#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fac/io.hpp"

#include <fstream>

using namespace fac;
namespace fs = std::filesystem;

namespace {

SchedulerConfig base_config(int steps) {
    SchedulerConfig cfg;
    cfg.r = 1;
    cfg.steps = steps;
    cfg.precision_bits = 256;
    cfg.max_q_digits = Integer(5000000);
    cfg.verify_grid = 64;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path temp_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("fac-io-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("manifest round trip is byte identical") {
    RunManifest m;
    m.construction = Construction::GBeta;
    m.config = base_config(3);
    m.config.beta = Rational(1, 2);
    m.output_dir = "out";
    std::string first = m.to_json().dump(2);
    RunManifest parsed = RunManifest::from_json(json::parse(first));
    std::string second = parsed.to_json().dump(2);
    CHECK(first == second);
    CHECK(parsed.config.steps == 3);
    CHECK(parsed.config.beta == Rational(1, 2));
}

TEST_CASE("malformed manifests are rejected") {
    fs::path dir = temp_dir("bad");
    {
        std::ofstream out(dir / "broken.json");
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_manifest(dir / "broken.json"), InvalidParam);
    CHECK_THROWS_AS(load_manifest(dir / "missing.json"), InvalidParam);
    CHECK_THROWS_AS(RunManifest::from_json(json{{"construction", "nope"}, {"r", 1}, {"steps", 1},
                                                {"alpha", json{{"kind", "factorial"}}}}),
                    InvalidParam);
}

TEST_CASE("archive save, load, rebuild") {
    SchedulerConfig cfg = base_config(1);
    RunManifest m;
    m.construction = Construction::G1Sing;
    m.config = cfg;
    fs::path dir = temp_dir("arch");
    m.output_dir = (dir / "run").string();

    RunResult run = scheduler_run(m.construction, m.config, m.make_alpha());
    save_archive(run, m);
    RunArchive a = load_archive(m.output_dir);
    CHECK(a.format_version == kArchiveFormatVersion);
    CHECK(a.steps.size() == 1);
    CHECK(a.manifest.construction == Construction::G1Sing);
    CHECK(a.result.at("alphas").size() == 2);

    ConstructionState st = archive_state(a);
    CHECK(st.n == run.state.n);
    CHECK(st.alphas.back().value == run.state.alphas.back().value);
    for (int j = 1; j < 8; ++j) {
        Scalar x = Scalar(j) / 8;
        CHECK(boost::multiprecision::abs(st.f_cur.eval(x) - run.state.f_cur.eval(x)) <
              pow2(-200));
    }
}

TEST_CASE("archive version gate") {
    fs::path dir = temp_dir("ver");
    SchedulerConfig cfg = base_config(1);
    RunManifest m;
    m.construction = Construction::G1Sing;
    m.config = cfg;
    m.output_dir = (dir / "run").string();
    RunResult run = scheduler_run(m.construction, m.config, m.make_alpha());
    save_archive(run, m);
    // bump the stored version beyond what this build understands
    json res = json::parse(slurp(fs::path(m.output_dir) / "result.json"));
    res["format_version"] = kArchiveFormatVersion + 1;
    write_file_atomic(fs::path(m.output_dir) / "result.json", res.dump(2) + "\n");
    CHECK_THROWS_AS(load_archive(m.output_dir), ArchiveVersionMismatch);
}

TEST_CASE("exports: step bounds and conjugacy cdf") {
    fs::path dir = temp_dir("csv");
    SchedulerConfig cfg = base_config(1);
    RunManifest m;
    m.construction = Construction::G0Ac;
    m.config = cfg;
    m.output_dir = (dir / "run").string();
    RunResult run = scheduler_run(m.construction, m.config, m.make_alpha());
    save_archive(run, m);
    RunArchive a = load_archive(m.output_dir);

    export_step_bounds(a, dir / "bounds.csv");
    std::string csv = slurp(dir / "bounds.csv");
    CHECK(csv.rfind("n,q_n,verified_bound,threshold\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one step

    // byte-identical on re-export
    export_step_bounds(a, dir / "bounds2.csv");
    CHECK(slurp(dir / "bounds2.csv") == csv);

    ConstructionState st = archive_state(a);
    export_conjugacy_cdf(st, dir / "cdf.csv", 1024);
    std::string cdf = slurp(dir / "cdf.csv");
    CHECK(std::count(cdf.begin(), cdf.end(), '\n') == 1026);  // header + 2^10 + 1 rows

    // an archive with no steps has nothing to export
    RunManifest m0;
    m0.construction = Construction::G1Sing;
    m0.config = base_config(0);
    m0.output_dir = (dir / "empty").string();
    RunResult run0 = scheduler_run(m0.construction, m0.config, m0.make_alpha());
    save_archive(run0, m0);
    RunArchive a0 = load_archive(m0.output_dir);
    CHECK_THROWS_AS(export_step_bounds(a0, dir / "never.csv"), UnknownExport);
}

TEST_CASE("diagnostic dispatch rejects mismatched constructions") {
    SchedulerConfig cfg = base_config(1);
    RunResult run = scheduler_run(Construction::G1Ac, cfg, LiouvilleNumber::factorial());
    CHECK_THROWS_AS(singularity_diagnostic(run.state), UnknownDiagnostic);
}
