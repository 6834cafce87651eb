#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spde/model.hpp"
#include "spde/simulator.hpp"

namespace spde {

enum class Regime {
    FixedT,  ///< T = 1; sigma^2 by quadratic variation of the coordinate
    LargeT,  ///< large T; (lambda_1, sigma^2) by OU quasi-likelihood
};

const char* to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct Interval {
    double lo;
    double hi;

    bool contains(double v) const { return v >= lo && v <= hi; }
    double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
    bool operator==(const Interval&) const = default;
};

struct EstimationConfig {
    double delta_margin = 0.05;            ///< spatial cutoff delta in (0, 1/2)
    std::size_t m_spatial = 20;            ///< thinned column count m
    std::size_t n2_temporal = 100;         ///< thinned time count N_2
    Interval eta_bounds{0.0, 20.0};        ///< search range for eta
    Interval sigma0sq_bounds{1e-8, 1e8};   ///< admissible sigma_0^2
    Interval lambda_bounds{1e-4, 1e3};     ///< QMLE fallback search range
    std::size_t eta_grid_points = 256;     ///< coarse scan before golden section
    Regime regime = Regime::FixedT;

    void validate() const;
    /// Also checks m <= floor((1 - 2 delta) M), N_2 <= N and T = 1 for FixedT.
    void validate_against(const GridSpec& grid) const;

    bool operator==(const EstimationConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Realized volatility and minimum contrast

struct VolPoint {
    double y;  ///< position of the grid column actually used
    double z;  ///< rescaled realized volatility
};

struct VolProfile {
    std::vector<VolPoint> points;
    std::vector<std::size_t> columns;  ///< 1-based grid column of each point
    std::size_t n_time = 0;
    double dt = 0.0;
};

/// 1-based columns nearest to delta + floor(Mbar / m) (j - 1) / M, ties
/// rounding down.
std::vector<std::size_t> thinned_columns(const GridSpec& grid, const EstimationConfig& config);

/// Single-pass accumulator of squared temporal increments at the thinned
/// columns. Slices must arrive in order 0..N.
class RealizedVolAccumulator {
public:
    RealizedVolAccumulator(const GridSpec& grid, const EstimationConfig& config);

    void add_slice(std::size_t index, std::span<const double> slice);
    VolProfile profile() const;

private:
    GridSpec grid_;
    std::vector<std::size_t> columns_;
    std::vector<double> previous_;
    std::vector<double> sums_;
    std::size_t next_ = 0;
};

VolProfile realized_vol_profile(const FieldDataset& field, const EstimationConfig& config);

/// Mean squared distance between Z_j and sigma0_sq e^{-eta y_j} / sqrt(pi).
double contrast(double sigma0_sq, double eta, const VolProfile& profile);

struct ProfiledSigma0 {
    double value;
    bool clamped;
};

/// Closed-form minimizer of contrast(., eta, profile), clamped to `bounds`.
ProfiledSigma0 profiled_sigma0(double eta, const VolProfile& profile,
                               Interval bounds = EstimationConfig{}.sigma0sq_bounds);

struct ContrastDiagnostics {
    std::size_t grid_points = 0;
    std::size_t golden_iterations = 0;
    bool eta_at_lower = false;
    bool eta_at_upper = false;
    bool sigma0_clamped = false;

    bool eta_at_bound() const { return eta_at_lower || eta_at_upper; }
};

struct ContrastEstimate {
    double sigma0_sq_hat;
    double eta_hat;
    double objective;
    ContrastDiagnostics diagnostics;
};

/// Minimizes eta -> contrast(profiled_sigma0(eta), eta) by a grid scan and
/// golden-section refinement to an interval below 1e-9.
ContrastEstimate fit_min_contrast(const VolProfile& profile, const EstimationConfig& config);

// ---------------------------------------------------------------------------
// Approximate coordinate process

struct CoordPath {
    std::vector<double> values;  ///< x_k(s_i), i = 0..N_2
    double dt = 0.0;             ///< floor(N / N_2) T / N
    double eta_used = 0.0;
    std::size_t k = 1;
};

/// Keeps the N_2 + 1 slices at the thinned times s_i = i floor(N / N_2) T / N
/// so the coordinate can be projected once eta has been estimated.
class ThinnedSliceBuffer {
public:
    ThinnedSliceBuffer(const GridSpec& grid, const EstimationConfig& config);

    void add_slice(std::size_t index, std::span<const double> slice);
    bool complete() const { return slices_.size() == n2_ + 1; }

    /// Riemann-sum projection onto sqrt(2) sin(pi k y) e^{eta_hat y / 2} over
    /// the full spatial grid.
    CoordPath project(std::size_t k, double eta_hat) const;

private:
    GridSpec grid_;
    std::size_t n2_;
    std::size_t stride_;
    std::vector<std::vector<double>> slices_;
};

CoordPath project_coordinate(const FieldDataset& field, std::size_t k, double eta_hat,
                             const EstimationConfig& config);

/// Sum of squared increments over the elapsed time N_2 dt (no division when
/// dt is 0). FixedT only.
double qv_sigma2(const CoordPath& path, const EstimationConfig& config);

/// Exact Gaussian OU transition log-likelihood of the path (up to the
/// 2 pi constant).
double ou_quasi_loglik(double lambda, double sigma_sq, const CoordPath& path);

struct QmleEstimate {
    double lambda_hat;
    double sigma_sq_hat;
    double a_hat;          ///< least-squares AR(1) coefficient
    bool fallback_used;    ///< a_hat outside (0, 1), bounded search used
    double loglik;
};

QmleEstimate fit_ou_qmle(const CoordPath& path, Interval lambda_bounds = EstimationConfig{}.lambda_bounds);

struct ThetaPlugIn {
    double theta2;
    double theta1;
};

/// theta2 = (sigma^2 / sigma_0^2)^2, theta1 = eta theta2.
ThetaPlugIn plug_in_theta(double sigma_sq_hat, double sigma0_sq_hat, double eta_hat);

/// theta0 = -lambda + theta1^2 / (4 theta2) + pi^2 theta2.
double theta0_hat(double lambda_hat, double theta1_hat, double theta2_hat);

// ---------------------------------------------------------------------------
// Full pipeline

struct EstimateRecord {
    std::size_t rep_id = 0;
    std::uint64_t seed = 0;
    Regime regime = Regime::FixedT;
    double sigma0_sq = 0.0;
    double eta = 0.0;
    double sigma_sq = 0.0;
    double lambda1 = 0.0;  ///< NaN for FixedT
    double theta2 = 0.0;
    double theta1 = 0.0;
    double theta0 = 0.0;   ///< NaN for FixedT
    double contrast_objective = 0.0;
    bool eta_at_bound = false;
    bool sigma0_clamped = false;
    bool qmle_fallback = false;
};

/// Both estimation stages fused into one streaming pass over the field.
class FieldEstimator {
public:
    FieldEstimator(const GridSpec& grid, const EstimationConfig& config);

    void add_slice(std::size_t index, std::span<const double> slice);
    SliceSink sink();

    /// Runs the contrast fit, the coordinate projection and the regime's
    /// second stage. All slices must have been added.
    EstimateRecord finish() const;

    VolProfile profile() const { return vol_.profile(); }

private:
    GridSpec grid_;
    EstimationConfig config_;
    RealizedVolAccumulator vol_;
    ThinnedSliceBuffer thinned_;
};

EstimateRecord estimate_field(const FieldDataset& field, const EstimationConfig& config);

/// Ratios from the rate conditions of the adaptive CLTs; reported, not
/// enforced.
std::vector<std::pair<std::string, double>> rate_diagnostics(const GridSpec& grid, const EstimationConfig& config,
                                                              double rho1 = 0.01);

}  // namespace spde
