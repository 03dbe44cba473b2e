#include "fac/io.hpp"

#include <fstream>
#include <sstream>

namespace fac {

namespace fs = std::filesystem;

namespace {

Rational rational_from_string(const std::string& s) {
    return Rational(s);
}

std::string rational_str(const Rational& r) { return r.str(); }

}  // namespace

json RunManifest::to_json() const {
    json j;
    j["format_version"] = kArchiveFormatVersion;
    j["construction"] = construction_name(construction);
    j["r"] = config.r;
    j["steps"] = config.steps;
    j["precision_bits"] = config.precision_bits;
    json alpha;
    alpha["kind"] = alpha_kind;
    if (alpha_kind == "custom") {
        json arr = json::array();
        for (const auto& a : alpha_custom) arr.push_back(a.str());
        alpha["a"] = arr;
    }
    j["alpha"] = alpha;
    json budgets;
    budgets["max_q_digits"] = config.max_q_digits.str();
    budgets["candidate_cap"] = config.candidate_cap;
    budgets["backtrack_cap"] = config.backtrack_cap;
    j["budgets"] = budgets;
    j["verify_grid"] = config.verify_grid;
    j["holder_test_d"] = rational_str(config.holder_test_d);
    switch (construction) {
        case Construction::GBeta: {
            j["beta"] = rational_str(config.beta);
            json arr = json::array();
            for (const auto& b : config.beta_seq) arr.push_back(rational_str(b));
            j["beta_seq"] = arr;
            break;
        }
        case Construction::G1Sing: {
            json arr = json::array();
            for (const auto& k : config.k_schedule) arr.push_back(k.str());
            j["k_schedule"] = arr;
            break;
        }
        case Construction::Gk:
            j["k"] = config.k;
            break;
        default:
            break;
    }
    j["output_dir"] = output_dir;
    return j;
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    try {
        if (j.contains("format_version") && j.at("format_version").get<int>() > kArchiveFormatVersion)
            throw ArchiveVersionMismatch("manifest format_version too new");
        m.construction = construction_from_name(j.at("construction").get<std::string>());
        m.config.r = j.at("r").get<int>();
        m.config.steps = j.at("steps").get<int>();
        if (j.contains("precision_bits"))
            m.config.precision_bits = j.at("precision_bits").get<unsigned>();
        const json& alpha = j.at("alpha");
        m.alpha_kind = alpha.at("kind").get<std::string>();
        if (m.alpha_kind == "custom")
            for (const auto& a : alpha.at("a")) m.alpha_custom.emplace_back(a.get<std::string>());
        if (j.contains("budgets")) {
            const json& b = j.at("budgets");
            if (b.contains("max_q_digits"))
                m.config.max_q_digits = Integer(b.at("max_q_digits").get<std::string>());
            if (b.contains("candidate_cap")) m.config.candidate_cap = b.at("candidate_cap").get<int>();
            if (b.contains("backtrack_cap")) m.config.backtrack_cap = b.at("backtrack_cap").get<int>();
        }
        if (j.contains("verify_grid")) m.config.verify_grid = j.at("verify_grid").get<long>();
        if (j.contains("holder_test_d"))
            m.config.holder_test_d = rational_from_string(j.at("holder_test_d").get<std::string>());
        if (j.contains("beta")) m.config.beta = rational_from_string(j.at("beta").get<std::string>());
        if (j.contains("beta_seq"))
            for (const auto& b : j.at("beta_seq"))
                m.config.beta_seq.push_back(rational_from_string(b.get<std::string>()));
        if (j.contains("k_schedule"))
            for (const auto& k : j.at("k_schedule"))
                m.config.k_schedule.emplace_back(k.get<std::string>());
        if (j.contains("k")) m.config.k = j.at("k").get<int>();
        if (j.contains("output_dir")) m.output_dir = j.at("output_dir").get<std::string>();
    } catch (const json::exception& e) {
        throw InvalidParam(std::string("manifest parse: ") + e.what());
    }
    if (m.config.steps < 0) throw InvalidParam("steps must be >= 0");
    return m;
}

LiouvilleNumber RunManifest::make_alpha() const {
    if (alpha_kind == "factorial") return LiouvilleNumber::factorial();
    if (alpha_kind == "tower") return LiouvilleNumber::tower();
    if (alpha_kind == "custom") return LiouvilleNumber::custom(alpha_custom);
    throw InvalidParam("unknown alpha kind '" + alpha_kind + "'");
}

RunManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParam("cannot open manifest " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidParam(std::string("manifest JSON: ") + e.what());
    }
    return RunManifest::from_json(j);
}

json step_record_json(const StepRecord& rec) {
    json j;
    j["n"] = rec.n;
    j["q_n"] = rec.q_n.str();
    j["Q_n"] = rec.Q_n.str();
    j["family"] = rec.family_params;
    j["alpha_n"] = rational_str(rec.alpha_n);
    j["alpha_next"] = rational_str(rec.alpha_next);
    j["alpha_index"] = rec.alpha_index;
    j["alpha_next_index"] = rec.alpha_next_index;
    j["verified_bound"] = render_decimal(rec.verified_bound);
    j["threshold"] = rational_str(rec.threshold);
    j["M_n"] = render_decimal(rec.M_n);
    j["cauchy_value"] = render_decimal(rec.cauchy_value);
    j["cauchy_bound"] = rational_str(rec.cauchy_bound);
    json checks = json::array();
    for (const auto& c : rec.checks) {
        json cj;
        cj["name"] = c.name;
        cj["lhs"] = render_decimal(c.lhs);
        cj["rhs"] = render_decimal(c.rhs);
        cj["passed"] = c.passed;
        checks.push_back(cj);
    }
    j["checks"] = checks;
    return j;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

void save_archive(const RunResult& run, const RunManifest& manifest) {
    const ConstructionState& st = run.state;
    fs::path dir(manifest.output_dir);
    fs::create_directories(dir);

    write_file_atomic(dir / "manifest.json", manifest.to_json().dump(2) + "\n");

    std::ostringstream steps;
    for (const auto& rec : st.log) steps << step_record_json(rec).dump() << "\n";
    write_file_atomic(dir / "steps.jsonl", steps.str());

    json result;
    result["format_version"] = kArchiveFormatVersion;
    result["construction"] = construction_name(st.construction);
    result["completed_steps"] = st.n;
    result["backtracks"] = run.backtracks;
    json alphas = json::array();
    for (const auto& w : st.alphas) {
        json a;
        a["index"] = w.schedule_index;
        a["value"] = rational_str(w.value);
        alphas.push_back(a);
    }
    result["alphas"] = alphas;
    write_file_atomic(dir / "result.json", result.dump(2) + "\n");
}

RunArchive load_archive(const fs::path& dir) {
    RunArchive a;
    a.manifest = load_manifest(dir / "manifest.json");
    std::ifstream res(dir / "result.json");
    if (!res) throw InvalidParam("cannot open archive result " + dir.string());
    try {
        res >> a.result;
    } catch (const json::exception& e) {
        throw InvalidParam(std::string("archive JSON: ") + e.what());
    }
    if (!a.result.contains("format_version"))
        throw ArchiveVersionMismatch("archive missing format_version");
    a.format_version = a.result.at("format_version").get<int>();
    if (a.format_version > kArchiveFormatVersion)
        throw ArchiveVersionMismatch("archive format_version too new");
    std::ifstream st(dir / "steps.jsonl");
    std::string line;
    while (st && std::getline(st, line)) {
        if (line.empty()) continue;
        a.steps.push_back(json::parse(line));
    }
    return a;
}

ConstructionState archive_state(const RunArchive& a) {
    std::vector<size_t> idx;
    for (const auto& e : a.result.at("alphas")) idx.push_back(e.at("index").get<size_t>());
    return replay_state(a.manifest.construction, a.manifest.config, a.manifest.make_alpha(), idx);
}

void export_step_bounds(const RunArchive& a, const fs::path& path) {
    if (a.steps.empty()) throw UnknownExport("archive has no step records");
    std::ostringstream csv;
    csv << "n,q_n,verified_bound,threshold\n";
    for (const auto& s : a.steps) {
        csv << s.at("n").get<int>() << "," << s.at("q_n").get<std::string>() << ","
            << s.at("verified_bound").get<std::string>() << ","
            << s.at("threshold").get<std::string>() << "\n";
    }
    write_file_atomic(path, csv.str());
}

void export_conjugacy_cdf(const ConstructionState& st, const fs::path& path, long grid) {
    std::ostringstream csv;
    csv << "x,H_inv\n";
    CircleMap hinv = st.H.inverse();
    for (long j = 0; j <= grid; ++j) {
        Rational x(j, grid);
        Scalar v = (j == grid) ? Scalar(1) : point_to_scalar(hinv.eval(CirclePoint(x)));
        csv << render_decimal(to_scalar(x)) << "," << render_decimal(v) << "\n";
    }
    write_file_atomic(path, csv.str());
}

void export_holder_table(const HolderFit& fit, const fs::path& path) {
    std::ostringstream csv;
    csv << "scale,sup_modulus\n";
    for (const auto& [scale, sup] : fit.table)
        csv << render_decimal(scale) << "," << render_decimal(sup) << "\n";
    write_file_atomic(path, csv.str());
}

}  // namespace fac
