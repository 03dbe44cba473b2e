#include "fac/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

using namespace fac;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const PrecisionExhausted*>(&e)) return 10;
    if (dynamic_cast<const ScheduleExhausted*>(&e)) return 11;
    if (dynamic_cast<const CandidateLimit*>(&e)) return 12;
    if (dynamic_cast<const InvalidParam*>(&e)) return 2;
    if (dynamic_cast<const InvalidSchedule*>(&e)) return 2;
    if (dynamic_cast<const ArchiveVersionMismatch*>(&e)) return 2;
    return 1;
}

unsigned env_precision_bits() {
    if (const char* s = std::getenv("FAC_PRECISION_BITS")) {
        long v = std::atol(s);
        if (v >= 64) return static_cast<unsigned>(v);
    }
    return 256;
}

int cmd_construct(const std::string& manifest_path) {
    RunManifest m = load_manifest(manifest_path);
    RunResult run = scheduler_run(m.construction, m.config, m.make_alpha());
    save_archive(run, m);
    std::cout << "archive written to " << m.output_dir << " ("
              << run.state.n << " steps, " << run.backtracks << " backtracks)\n";
    return 0;
}

int cmd_analyze(const std::string& archive_dir, bool rotation, bool holder, bool singularity,
                bool ac, bool ck, long iterations, int scale_lo, int scale_hi) {
    RunArchive a = load_archive(archive_dir);
    ConstructionState st = archive_state(a);
    json report;
    report["construction"] = construction_name(st.construction);
    report["steps"] = st.n;

    if (rotation) {
        RotationEstimate est = rotation_number(st.f_cur, iterations);
        const Rational target = st.alphas.back().value;
        json r;
        r["iterations"] = est.iterations;
        r["estimate"] = render_decimal(est.estimate);
        r["error_bound"] = render_decimal(est.error_bound);
        r["archived_alpha"] = target.str();
        r["abs_difference"] =
            render_decimal(boost::multiprecision::abs(est.estimate - to_scalar(target)));
        report["rotation"] = r;
    }
    if (holder) {
        HolderFit fwd = holder_exponent(st.H, false, scale_lo, scale_hi);
        HolderFit inv = holder_exponent(st.H, true, scale_lo, scale_hi);
        auto fit_json = [](const HolderFit& f) {
            json j;
            j["exponent"] = render_decimal(f.exponent);
            j["residual"] = render_decimal(f.residual);
            j["scale_lo"] = f.scale_lo;
            j["scale_hi"] = f.scale_hi;
            return j;
        };
        report["holder_forward"] = fit_json(fwd);
        report["holder_inverse"] = fit_json(inv);
        export_holder_table(inv, std::filesystem::path(archive_dir) / "holder-table.csv");
    }
    if (singularity) {
        SingularityDiagnostic d = singularity_diagnostic(st);
        json j;
        j["n"] = d.n;
        j["m_C"] = d.m_C.str();
        j["m_HC"] = d.m_HC.str();
        j["exact"] = d.exact;
        report["singularity"] = j;
    }
    if (ac) {
        AcDiagnostic d = ac_diagnostic(st);
        json j;
        j["n"] = d.n;
        j["fixed_mass"] = d.fixed_mass.str();
        j["mass_exact"] = d.mass_exact;
        j["identity_sup"] = render_decimal(d.identity_sup);
        j["identity_verified"] = d.identity_verified;
        j["points_checked"] = d.points_checked;
        if (!d.ratio_rows.empty()) {
            json rows = json::array();
            for (const auto& [ratio, level] : d.ratio_rows) {
                json row;
                row["level"] = render_decimal(level, 3);
                row["ratio"] = render_decimal(ratio);
                rows.push_back(row);
            }
            j["ratios"] = rows;
        }
        report["ac"] = j;
    }
    if (ck) {
        CkDiagnostic d = ck_diagnostic(st);
        json j;
        j["quantity"] = d.quantity;
        json rows = json::array();
        for (const auto& row : d.rows) {
            json rj;
            rj["n"] = row.n;
            rj["value"] = render_decimal(row.value);
            rj["reference"] = render_decimal(row.reference);
            rows.push_back(rj);
        }
        j["rows"] = rows;
        report["ck"] = j;
    }

    std::string text = report.dump(2) + "\n";
    write_file_atomic(std::filesystem::path(archive_dir) / "report.json", text);
    std::cout << text;
    return 0;
}

int cmd_export(const std::string& archive_dir, const std::string& what,
               const std::string& out) {
    RunArchive a = load_archive(archive_dir);
    std::filesystem::path path =
        out.empty() ? std::filesystem::path(archive_dir) / (what + ".csv")
                    : std::filesystem::path(out);
    if (what == "step-bounds") {
        export_step_bounds(a, path);
    } else if (what == "conjugacy-cdf") {
        ConstructionState st = archive_state(a);
        export_conjugacy_cdf(st, path);
    } else if (what == "holder-table") {
        ConstructionState st = archive_state(a);
        HolderFit inv = holder_exponent(st.H, true, 4, 12);
        export_holder_table(inv, path);
    } else {
        throw UnknownExport("unknown export '" + what + "'");
    }
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"circle diffeomorphisms with a prescribed Liouville rotation number"};
    app.require_subcommand(1);

    std::string manifest_path;
    auto* construct = app.add_subcommand("construct", "run a construction from a manifest");
    construct->add_option("manifest", manifest_path, "manifest JSON path")->required();

    std::string archive_dir;
    bool rotation = false, holder = false, singularity = false, ac = false, ck = false;
    long iterations = 100000;
    int scale_lo = 4, scale_hi = 14;
    auto* analyze = app.add_subcommand("analyze", "diagnostics for a finished run");
    analyze->add_option("archive", archive_dir, "archive directory")->required();
    analyze->add_flag("--rotation", rotation, "rotation number estimate");
    analyze->add_flag("--holder", holder, "Holder exponent fits for H and H^-1");
    analyze->add_flag("--singularity", singularity, "measure identities (g1sing)");
    analyze->add_flag("--ac", ac, "fixed-set mass (g1ac / g0ac)");
    analyze->add_flag("--ck", ck, "derivative growth (g1ac / gk)");
    analyze->add_option("--iterations", iterations, "rotation orbit length");
    analyze->add_option("--scale-lo", scale_lo, "coarsest dyadic scale 2^-j");
    analyze->add_option("--scale-hi", scale_hi, "finest dyadic scale 2^-j");

    std::string export_archive, what, out;
    auto* exp = app.add_subcommand("export", "CSV exports from an archive");
    exp->add_option("archive", export_archive, "archive directory")->required();
    exp->add_option("what", what, "step-bounds | conjugacy-cdf | holder-table")->required();
    exp->add_option("--out", out, "output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        fac::set_precision_bits(env_precision_bits());
        if (construct->parsed()) return cmd_construct(manifest_path);
        if (analyze->parsed())
            return cmd_analyze(archive_dir, rotation, holder, singularity, ac, ck,
                               iterations, scale_lo, scale_hi);
        if (exp->parsed()) return cmd_export(export_archive, what, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 1;
}
