#pragma once

#include "fac/analytics.hpp"

#include <filesystem>

namespace fac {

inline constexpr int kArchiveFormatVersion = 1;

/** Everything needed to reproduce a run. Serialization is canonical:
    parse -> serialize of a canonical document is byte-identical. */
struct RunManifest {
    Construction construction = Construction::GBeta;
    SchedulerConfig config;
    std::string alpha_kind = "factorial";
    std::vector<Integer> alpha_custom;
    std::string output_dir = "run-archive";

    static RunManifest from_json(const json& j);
    json to_json() const;
    LiouvilleNumber make_alpha() const;
};

RunManifest load_manifest(const std::filesystem::path& path);

struct RunArchive {
    RunManifest manifest;
    int format_version = kArchiveFormatVersion;
    std::vector<json> steps;
    json result;
};

json step_record_json(const StepRecord& rec);

/** Writes manifest.json, steps.jsonl and result.json under
    manifest.output_dir (atomically, one file at a time). */
void save_archive(const RunResult& run, const RunManifest& manifest);

RunArchive load_archive(const std::filesystem::path& dir);

/** Rebuilds the final construction state of an archived run. */
ConstructionState archive_state(const RunArchive& a);

// CSV exports: header row, fixed column order, deterministic rendering
// (Scalars at 30 significant digits, exact rationals as p/q strings).
void export_step_bounds(const RunArchive& a, const std::filesystem::path& path);
void export_conjugacy_cdf(const ConstructionState& st, const std::filesystem::path& path,
                          long grid = 1024);
void export_holder_table(const HolderFit& fit, const std::filesystem::path& path);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace fac
