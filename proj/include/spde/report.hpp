#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "spde/estimation.hpp"
#include "spde/experiments.hpp"

namespace spde {

/// Shortest decimal string that parses back to exactly `x`; "nan", "inf"
/// and "-inf" for non-finite values.
std::string format_double(double x);

nlohmann::json record_to_json(const EstimateRecord& r);

/// Everything in the report, with `run_config` (the effective configuration
/// and seed) embedded under "config".
nlohmann::json report_to_json(const StudyReport& report, const nlohmann::json& run_config);

/// CSV renderings. Column headers:
///   records.csv    rep_id, seed, regime, sigma0_sq, eta, sigma_sq, lambda1,
///                  theta2, theta1, theta0, contrast_objective, eta_at_bound,
///                  sigma0_clamped, qmle_fallback
///   summary.csv    statistic, value
///   <stat>_ecdf    ecdf_x, ecdf_y
///   <stat>_qq      q_theoretical, q_empirical
///   <stat>_hist    bin_left, bin_right, count, density, normal_density
std::string records_csv(const std::vector<EstimateRecord>& records);
std::string summary_csv(const StudyReport& report);
std::string ecdf_csv(const StatisticSummary& s);
std::string qq_csv(const StatisticSummary& s);
std::string hist_csv(const StatisticSummary& s);

/// Sidecar document naming the file it describes, the effective
/// configuration, the seed and the normal sampler.
nlohmann::json sidecar_json(const std::string& file_name, const nlohmann::json& run_config, std::uint64_t seed);

/// Writes `path` plus `path.json`.
void write_with_sidecar(const std::filesystem::path& path, const std::string& content,
                        const nlohmann::json& run_config, std::uint64_t seed);

/// Writes report.json, records.csv, summary.csv and the three per-statistic
/// CSVs into `dir` (created if needed). Output is a pure function of the
/// arguments. Returns the files written.
std::vector<std::filesystem::path> write_study_outputs(const std::filesystem::path& dir, const StudyReport& report,
                                                       const nlohmann::json& run_config);

}  // namespace spde
