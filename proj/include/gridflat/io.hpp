#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gridflat/core.hpp"
#include "gridflat/scenarios.hpp"

namespace gridflat {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Feeder line CSV, header `from,to,r_pu,x_pu,p_share_pct,q_pu`.
std::vector<FeederLine> read_feeder_lines_csv(const std::filesystem::path& path);
void write_feeder_lines_csv(const std::filesystem::path& path,
                            const std::vector<FeederLine>& lines);

/// Load series CSV, header `t,kw`.
TimeSeries read_load_csv(const std::filesystem::path& path,
                         double step_hours = 1.0);
void write_load_csv(const std::filesystem::path& path, const TimeSeries& load);

/// Problem JSON mirroring ProblemConfig field names. The load may be inline
/// (`load`) or referenced (`load_csv`); the feeder's lines may be inline
/// (`lines`) or referenced (`lines_csv`), paths relative to the problem file.
/// Missing BES power limits default to 10 x the load maximum; a missing
/// initial energy defaults to soc_min x capacity.
ProblemConfig load_problem_json(const std::filesystem::path& path);

/// Files read while loading (problem file plus any referenced CSVs).
std::vector<std::string> problem_input_files(const std::filesystem::path& path);

/// Canonical JSON text of a config; basis for the manifest hash.
std::string config_canonical_json(const ProblemConfig& config);
std::string config_hash(const ProblemConfig& config);

/// Schedule CSV: t, charge per unit, discharge per unit, energy per unit, pcc.
void write_schedule_csv(const std::filesystem::path& path,
                        const SolveReport& report);

struct LoadedSchedule {
    BessSchedule schedule;  // modes inferred from the power columns
    TimeSeries pcc_kw;
};
LoadedSchedule read_schedule_csv(const std::filesystem::path& path,
                                 double step_hours = 1.0);

void write_summary_json(const std::filesystem::path& path,
                        const SolveReport& report);

struct SummaryInfo {
    bool found = false;
    double k_kw = 0.0;
    double theta_kw = 0.0;
};
SummaryInfo read_summary_json(const std::filesystem::path& path);

void write_manifest_json(const std::filesystem::path& path,
                         const std::string& command,
                         const std::vector<std::string>& inputs,
                         const std::map<std::string, std::string>& overrides,
                         const std::string& out_dir,
                         const ProblemConfig& config);

void write_sweep_outputs(const std::filesystem::path& out_dir,
                         const SweepResult& sweep,
                         const std::string& axis_name);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace gridflat
