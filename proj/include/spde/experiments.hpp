#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spde/estimation.hpp"
#include "spde/simulator.hpp"
#include "spde/stats.hpp"

namespace spde {

struct StudyConfig {
    SpdeParams params_true{0.0, 0.5, 0.1, 1.0};
    GridSpec grid{};
    EstimationConfig est{};
    std::size_t replications = 200;
    std::uint64_t base_seed = 1;

    void validate() const;
    bool operator==(const StudyConfig&) const = default;
};

/// Desk-scale defaults for each regime.
StudyConfig default_study_config(Regime regime);

/// Simulates the field of replication `rep_id` (seed derived from
/// base_seed and rep_id) and runs the regime's estimation pipeline on it
/// in one streaming pass.
EstimateRecord run_replication(const StudyConfig& config, std::size_t rep_id);

/// One estimator after centring at the truth and scaling by its rate.
struct StatisticSummary {
    std::string name;
    double truth = 0.0;
    double rate = 0.0;             ///< sqrt(mN), sqrt(N_2) or sqrt(T)
    double limit_variance = 0.0;   ///< from the limit theorems at the truth
    std::vector<double> standardized;  ///< rate * (estimate - truth), rep order
    std::vector<double> studentized;   ///< standardized / limit sd at the estimate
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;
    double ks = 0.0;               ///< vs N(0, limit_variance)
    double ks_critical_1pct = 0.0;
    double studentized_mean = 0.0;
    double studentized_variance = 0.0;
    std::vector<XY> ecdf;
    std::vector<XY> qq;
    std::vector<HistogramBin> hist;
};

/// Moments, KS distance and plotting tables of one standardized sample.
StatisticSummary summarize_statistic(std::string name, std::vector<double> standardized, double limit_variance);

struct ReplicationFailure {
    std::size_t rep_id;
    std::string message;
};

struct StudyReport {
    StudyConfig config;
    std::vector<EstimateRecord> records;  ///< sorted by rep_id
    std::vector<ReplicationFailure> failures;
    double gamma = 0.0;
    Eigen::Matrix2d contrast_cov;         ///< sqrt(mN) rate, integral form
    Eigen::Matrix2d contrast_cov_fixed_m; ///< sqrt(N) rate, finite-sum form
    Eigen::MatrixXd adaptive_cov;
    std::vector<StatisticSummary> statistics;
    std::vector<std::pair<std::string, double>> rate_diagnostics;

    const StatisticSummary& statistic(const std::string& name) const;
};

/// Builds every summary from the records; a pure function of its inputs.
StudyReport summarize_study(const StudyConfig& config, std::vector<EstimateRecord> records,
                            std::vector<ReplicationFailure> failures = {});

struct StudyOptions {
    /// Execution order of replication ids (a permutation of 0..R-1). Only
    /// affects scheduling, never the report.
    std::optional<std::vector<std::size_t>> execution_order;
    /// Called after each finished replication with (done, total).
    std::function<void(std::size_t, std::size_t)> progress;
};

/// Runs all replications (in parallel when OpenMP is available). Aborts with
/// NumericError if more than 5% of them throw.
StudyReport run_study(const StudyConfig& config, const StudyOptions& options = {});

}  // namespace spde
