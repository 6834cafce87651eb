#include "spde/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spde/errors.hpp"

namespace spde {

namespace {

constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;
constexpr double kGolden = 0.6180339887498949;  // (sqrt(5) - 1) / 2

struct GoldenResult {
    double x;
    double fx;
    std::size_t iterations;
};

// Minimizes a unimodal f on [lo, hi] until hi - lo < tol.
template <typename F>
GoldenResult golden_minimize(F&& f, double lo, double hi, double tol) {
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    std::size_t it = 0;
    while (hi - lo >= tol && it < 500) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kGolden * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kGolden * (hi - lo);
            f2 = f(x2);
        }
        ++it;
    }
    return f1 <= f2 ? GoldenResult{x1, f1, it} : GoldenResult{x2, f2, it};
}

std::size_t spatial_usable(const GridSpec& grid, double delta) {
    return static_cast<std::size_t>(
        std::floor((1.0 - 2.0 * delta) * static_cast<double>(grid.n_space) + 1e-9));
}

}  // namespace

const char* to_string(Regime r) { return r == Regime::FixedT ? "fixed_t" : "large_t"; }

Regime regime_from_string(const std::string& s) {
    if (s == "fixed_t" || s == "FixedT" || s == "fixed") {
        return Regime::FixedT;
    }
    if (s == "large_t" || s == "LargeT" || s == "large") {
        return Regime::LargeT;
    }
    throw ValidationError("regime: must be one of fixed_t, large_t (got '" + s + "')");
}

void EstimationConfig::validate() const {
    if (!(delta_margin > 0.0 && delta_margin < 0.5)) {
        throw ValidationError("delta: must be in (0, 1/2)");
    }
    if (m_spatial < 2) {
        throw ValidationError("m_spatial: must be >= 2");
    }
    if (n2_temporal < 1) {
        throw ValidationError("n2_temporal: must be >= 1");
    }
    if (!(eta_bounds.lo >= 0.0 && eta_bounds.hi > eta_bounds.lo && std::isfinite(eta_bounds.hi))) {
        throw ValidationError("eta_bounds: must satisfy 0 <= lo < hi < inf");
    }
    if (!(sigma0sq_bounds.lo > 0.0 && sigma0sq_bounds.hi > sigma0sq_bounds.lo &&
          std::isfinite(sigma0sq_bounds.hi))) {
        throw ValidationError("sigma0sq_bounds: must satisfy 0 < lo < hi < inf");
    }
    if (!(lambda_bounds.lo > 0.0 && lambda_bounds.hi > lambda_bounds.lo && std::isfinite(lambda_bounds.hi))) {
        throw ValidationError("lambda_bounds: must satisfy 0 < lo < hi < inf");
    }
    if (eta_grid_points < 3) {
        throw ValidationError("eta_grid_points: must be >= 3");
    }
}

void EstimationConfig::validate_against(const GridSpec& grid) const {
    validate();
    const std::size_t usable = spatial_usable(grid, delta_margin);
    if (m_spatial > usable) {
        throw ValidationError("m_spatial: must be <= floor((1 - 2 delta) M) = " + std::to_string(usable));
    }
    if (grid.n_time < 2) {
        throw ValidationError("n_time: estimation needs N >= 2");
    }
    if (n2_temporal > grid.n_time) {
        throw ValidationError("n2_temporal: must be <= n_time = " + std::to_string(grid.n_time));
    }
    if (regime == Regime::FixedT && std::abs(grid.horizon - 1.0) > 1e-12) {
        throw ValidationError("horizon: fixed_t regime requires T = 1");
    }
    if (regime == Regime::LargeT && n2_temporal < 2) {
        throw ValidationError("n2_temporal: large_t regime needs N_2 >= 2");
    }
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> thinned_columns(const GridSpec& grid, const EstimationConfig& config) {
    const double delta = config.delta_margin;
    const std::size_t usable = spatial_usable(grid, delta);
    if (config.m_spatial > usable || config.m_spatial == 0) {
        throw ValidationError("m_spatial: must be in [1, " + std::to_string(usable) + "]");
    }
    const std::size_t stride = usable / config.m_spatial;
    const double M = static_cast<double>(grid.n_space);
    std::vector<std::size_t> cols;
    cols.reserve(config.m_spatial);
    for (std::size_t j = 0; j < config.m_spatial; ++j) {
        const double target = delta * M + static_cast<double>(stride * j);
        // nearest column, exact halves go down; may sit up to half a step
        // outside [delta, 1 - delta] but never on the boundary itself
        const double c = std::max(std::ceil(target - 0.5 - 1e-9), 1.0);
        if (c > M - 1.0) {
            throw ValidationError("thinned column " + std::to_string(j + 1) + " at y = " + std::to_string(c / M) +
                                  " lies on the boundary");
        }
        cols.push_back(static_cast<std::size_t>(c));
    }
    return cols;
}

RealizedVolAccumulator::RealizedVolAccumulator(const GridSpec& grid, const EstimationConfig& config)
    : grid_(grid), columns_(thinned_columns(grid, config)) {
    if (grid.n_time < 2) {
        throw ValidationError("n_time: realized volatility needs N >= 2");
    }
    previous_.assign(columns_.size(), 0.0);
    sums_.assign(columns_.size(), 0.0);
}

void RealizedVolAccumulator::add_slice(std::size_t index, std::span<const double> slice) {
    if (index != next_ || slice.size() != grid_.n_space) {
        throw ValidationError("realized volatility: expected slice " + std::to_string(next_) + " of size " +
                              std::to_string(grid_.n_space));
    }
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        const double v = slice[columns_[j] - 1];
        if (index > 0) {
            const double d = v - previous_[j];
            sums_[j] += d * d;
        }
        previous_[j] = v;
    }
    ++next_;
}

VolProfile RealizedVolAccumulator::profile() const {
    if (next_ != grid_.n_time + 1) {
        throw ValidationError("realized volatility: saw " + std::to_string(next_) + " of " +
                              std::to_string(grid_.n_time + 1) + " slices");
    }
    VolProfile out;
    out.n_time = grid_.n_time;
    out.dt = grid_.dt();
    out.columns = columns_;
    const double scale = 1.0 / (static_cast<double>(grid_.n_time) * std::sqrt(out.dt));
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        out.points.push_back({grid_.space(columns_[j]), sums_[j] * scale});
    }
    return out;
}

VolProfile realized_vol_profile(const FieldDataset& field, const EstimationConfig& config) {
    RealizedVolAccumulator acc(field.grid, config);
    for (std::size_t i = 0; i < field.slices.size(); ++i) {
        acc.add_slice(i, field.slices[i]);
    }
    return acc.profile();
}

double contrast(double sigma0_sq, double eta, const VolProfile& profile) {
    if (profile.points.empty()) {
        throw ValidationError("contrast: empty profile");
    }
    double sum = 0.0;
    for (const auto& p : profile.points) {
        const double r = p.z - kInvSqrtPi * sigma0_sq * std::exp(-eta * p.y);
        sum += r * r;
    }
    return sum / static_cast<double>(profile.points.size());
}

ProfiledSigma0 profiled_sigma0(double eta, const VolProfile& profile, Interval bounds) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : profile.points) {
        const double e = std::exp(-eta * p.y);
        num += p.z * e;
        den += e * e;
    }
    if (!(den > 0.0)) {
        throw NumericError("profiled_sigma0: sum of e^{-2 eta y} vanished");
    }
    const double raw = num / (kInvSqrtPi * den);
    const double v = bounds.clamp(raw);
    return {v, v != raw};
}

ContrastEstimate fit_min_contrast(const VolProfile& profile, const EstimationConfig& config) {
    if (profile.points.size() < 2) {
        throw ValidationError("fit_min_contrast: profile needs at least 2 points");
    }
    const Interval b = config.eta_bounds;
    auto objective = [&](double eta) {
        return contrast(profiled_sigma0(eta, profile, config.sigma0sq_bounds).value, eta, profile);
    };

    const std::size_t G = config.eta_grid_points;
    const double step = (b.hi - b.lo) / static_cast<double>(G - 1);
    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < G; ++i) {
        const double v = objective(b.lo + step * static_cast<double>(i));
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double lo = b.lo + step * static_cast<double>(best == 0 ? 0 : best - 1);
    const double hi = std::min(b.hi, b.lo + step * static_cast<double>(std::min(best + 1, G - 1)));
    GoldenResult g = golden_minimize(objective, lo, hi, 1e-9);

    double eta_hat = g.x;
    double obj = g.fx;
    // golden section never evaluates the bracket ends
    for (double edge : {lo, hi}) {
        const double v = objective(edge);
        if (v < obj) {
            obj = v;
            eta_hat = edge;
        }
    }

    ContrastEstimate out{};
    const ProfiledSigma0 s0 = profiled_sigma0(eta_hat, profile, config.sigma0sq_bounds);
    out.sigma0_sq_hat = s0.value;
    out.eta_hat = eta_hat;
    out.objective = contrast(s0.value, eta_hat, profile);
    out.diagnostics.grid_points = G;
    out.diagnostics.golden_iterations = g.iterations;
    const double tol = 1e-6 * (b.hi - b.lo);
    out.diagnostics.eta_at_lower = eta_hat - b.lo < tol;
    out.diagnostics.eta_at_upper = b.hi - eta_hat < tol;
    out.diagnostics.sigma0_clamped = s0.clamped;
    return out;
}

// ---------------------------------------------------------------------------

ThinnedSliceBuffer::ThinnedSliceBuffer(const GridSpec& grid, const EstimationConfig& config)
    : grid_(grid), n2_(config.n2_temporal) {
    if (n2_ == 0 || n2_ > grid.n_time) {
        throw ValidationError("n2_temporal: must be in [1, n_time = " + std::to_string(grid.n_time) + "]");
    }
    stride_ = grid.n_time / n2_;
    slices_.reserve(n2_ + 1);
}

void ThinnedSliceBuffer::add_slice(std::size_t index, std::span<const double> slice) {
    if (index % stride_ != 0 || index / stride_ > n2_) {
        return;
    }
    if (index / stride_ != slices_.size() || slice.size() != grid_.n_space) {
        throw ValidationError("thinned slices: expected time index " + std::to_string(slices_.size() * stride_));
    }
    slices_.emplace_back(slice.begin(), slice.end());
}

CoordPath ThinnedSliceBuffer::project(std::size_t k, double eta_hat) const {
    if (!complete()) {
        throw ValidationError("project_coordinate: thinned slices incomplete");
    }
    if (k == 0) {
        throw ValidationError("k: must be >= 1");
    }
    const std::size_t M = grid_.n_space;
    std::vector<double> weight(M);
    for (std::size_t j = 1; j <= M; ++j) {
        const double y = grid_.space(j);
        const double s = (j == M) ? 0.0 : std::sin(kPi * static_cast<double>(k) * y);
        weight[j - 1] = std::numbers::sqrt2 * s * std::exp(0.5 * eta_hat * y) / static_cast<double>(M);
    }
    CoordPath out;
    out.k = k;
    out.eta_used = eta_hat;
    out.dt = static_cast<double>(stride_) * grid_.dt();
    out.values.reserve(slices_.size());
    for (const auto& s : slices_) {
        out.values.push_back(std::inner_product(s.begin(), s.end(), weight.begin(), 0.0));
    }
    return out;
}

CoordPath project_coordinate(const FieldDataset& field, std::size_t k, double eta_hat,
                             const EstimationConfig& config) {
    ThinnedSliceBuffer buf(field.grid, config);
    for (std::size_t i = 0; i < field.slices.size(); ++i) {
        buf.add_slice(i, field.slices[i]);
    }
    return buf.project(k, eta_hat);
}

double qv_sigma2(const CoordPath& path, const EstimationConfig& config) {
    if (config.regime != Regime::FixedT) {
        throw ValidationError("qv_sigma2: only valid in the fixed_t regime; use fit_ou_qmle");
    }
    if (path.values.size() < 2) {
        throw ValidationError("qv_sigma2: path needs at least 2 points");
    }
    double sum = 0.0;
    for (std::size_t i = 1; i < path.values.size(); ++i) {
        const double d = path.values[i] - path.values[i - 1];
        sum += d * d;
    }
    // divide by the elapsed time, which is T whenever N_2 divides N
    if (path.dt > 0.0) {
        sum /= static_cast<double>(path.values.size() - 1) * path.dt;
    }
    return sum;
}

double ou_quasi_loglik(double lambda, double sigma_sq, const CoordPath& path) {
    if (!(lambda > 0.0) || !(sigma_sq > 0.0)) {
        throw ValidationError("ou_quasi_loglik: lambda and sigma_sq must be > 0");
    }
    const OuTransition tr = ou_transition(lambda, std::sqrt(sigma_sq), path.dt);
    const double half_log_v = 0.5 * std::log(tr.s_sq);
    double sum = 0.0;
    for (std::size_t i = 1; i < path.values.size(); ++i) {
        const double r = path.values[i] - tr.a * path.values[i - 1];
        sum += half_log_v + r * r / (2.0 * tr.s_sq);
    }
    return -sum;
}

QmleEstimate fit_ou_qmle(const CoordPath& path, Interval lambda_bounds) {
    const auto& x = path.values;
    if (x.size() < 3) {
        throw ValidationError("fit_ou_qmle: path needs at least 3 points");
    }
    if (!(path.dt > 0.0)) {
        throw ValidationError("fit_ou_qmle: path dt must be > 0");
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        sxy += x[i] * x[i - 1];
        sxx += x[i - 1] * x[i - 1];
    }
    if (!(sxx > 0.0)) {
        throw NumericError("fit_ou_qmle: degenerate path (all lagged values zero)");
    }
    const double n = static_cast<double>(x.size() - 1);
    auto mean_sq_residual = [&](double a) {
        double s = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i) {
            const double r = x[i] - a * x[i - 1];
            s += r * r;
        }
        return s / n;
    };

    QmleEstimate out{};
    out.a_hat = sxy / sxx;
    double lambda;
    if (out.a_hat > 0.0 && out.a_hat < 1.0) {
        lambda = -std::log(out.a_hat) / path.dt;
    } else {
        // the profiled likelihood -n/2 log v(lambda) is unimodal in lambda;
        // search on log scale to cover several decades evenly
        out.fallback_used = true;
        auto neg_profile = [&](double log_lambda) {
            return mean_sq_residual(std::exp(-std::exp(log_lambda) * path.dt));
        };
        const GoldenResult g =
            golden_minimize(neg_profile, std::log(lambda_bounds.lo), std::log(lambda_bounds.hi), 1e-12);
        lambda = std::exp(g.x);
        // the profile is monotone here and goes flat in double precision
        // well before the bound, so ties go to the bracket end
        for (double edge : {lambda_bounds.lo, lambda_bounds.hi}) {
            if (neg_profile(std::log(edge)) <= neg_profile(std::log(lambda))) {
                lambda = edge;
            }
        }
    }
    const double v = mean_sq_residual(std::exp(-lambda * path.dt));
    if (!(v > 0.0)) {
        throw NumericError("fit_ou_qmle: zero residual variance");
    }
    out.lambda_hat = lambda;
    out.sigma_sq_hat = v / ou_transition(lambda, 1.0, path.dt).s_sq;
    out.loglik = ou_quasi_loglik(out.lambda_hat, out.sigma_sq_hat, path);
    return out;
}

ThetaPlugIn plug_in_theta(double sigma_sq_hat, double sigma0_sq_hat, double eta_hat) {
    const double r = sigma_sq_hat / sigma0_sq_hat;
    const double theta2 = r * r;
    return {theta2, eta_hat * theta2};
}

double theta0_hat(double lambda_hat, double theta1_hat, double theta2_hat) {
    return -lambda_hat + theta1_hat * theta1_hat / (4.0 * theta2_hat) + kPiSq * theta2_hat;
}

// ---------------------------------------------------------------------------

namespace {

const EstimationConfig& checked(const EstimationConfig& config, const GridSpec& grid) {
    config.validate_against(grid);
    return config;
}

}  // namespace

FieldEstimator::FieldEstimator(const GridSpec& grid, const EstimationConfig& config)
    : grid_(grid), config_(checked(config, grid)), vol_(grid, config), thinned_(grid, config) {}

void FieldEstimator::add_slice(std::size_t index, std::span<const double> slice) {
    vol_.add_slice(index, slice);
    thinned_.add_slice(index, slice);
}

SliceSink FieldEstimator::sink() {
    return [this](std::size_t i, std::span<const double> s) { add_slice(i, s); };
}

EstimateRecord FieldEstimator::finish() const {
    const ContrastEstimate ce = fit_min_contrast(vol_.profile(), config_);
    const CoordPath path = thinned_.project(1, ce.eta_hat);

    EstimateRecord rec;
    rec.regime = config_.regime;
    rec.sigma0_sq = ce.sigma0_sq_hat;
    rec.eta = ce.eta_hat;
    rec.contrast_objective = ce.objective;
    rec.eta_at_bound = ce.diagnostics.eta_at_bound();
    rec.sigma0_clamped = ce.diagnostics.sigma0_clamped;

    if (config_.regime == Regime::FixedT) {
        rec.sigma_sq = qv_sigma2(path, config_);
        rec.lambda1 = std::numeric_limits<double>::quiet_NaN();
    } else {
        const QmleEstimate q = fit_ou_qmle(path, config_.lambda_bounds);
        rec.sigma_sq = q.sigma_sq_hat;
        rec.lambda1 = q.lambda_hat;
        rec.qmle_fallback = q.fallback_used;
    }
    if (!(rec.sigma_sq > 0.0)) {
        throw NumericError("estimate: sigma^2 estimate is not positive");
    }
    const ThetaPlugIn th = plug_in_theta(rec.sigma_sq, rec.sigma0_sq, rec.eta);
    rec.theta2 = th.theta2;
    rec.theta1 = th.theta1;
    rec.theta0 = config_.regime == Regime::LargeT ? theta0_hat(rec.lambda1, rec.theta1, rec.theta2)
                                                  : std::numeric_limits<double>::quiet_NaN();
    return rec;
}

EstimateRecord estimate_field(const FieldDataset& field, const EstimationConfig& config) {
    FieldEstimator est(field.grid, config);
    for (std::size_t i = 0; i < field.slices.size(); ++i) {
        est.add_slice(i, field.slices[i]);
    }
    EstimateRecord rec = est.finish();
    rec.seed = field.seed;
    return rec;
}

std::vector<std::pair<std::string, double>> rate_diagnostics(const GridSpec& grid, const EstimationConfig& config,
                                                              double rho1) {
    const double N = static_cast<double>(grid.n_time);
    const double M = static_cast<double>(grid.n_space);
    const double m = static_cast<double>(config.m_spatial);
    const double n2 = static_cast<double>(config.n2_temporal);
    const double T = grid.horizon;
    if (config.regime == Regime::FixedT) {
        return {
            {"n2^1.5/(m*N)", std::pow(n2, 1.5) / (m * N)},
            {"n2^1.5/M^(1-rho1)", std::pow(n2, 1.5) / std::pow(M, 1.0 - rho1)},
            {"m/N^0.5", m / std::sqrt(N)},
        };
    }
    const double h = grid.dt();
    return {
        {"n2^2.5/(T^1.5*N*m)", std::pow(n2, 2.5) / (std::pow(T, 1.5) * N * m)},
        {"n2^3/(T^2*M^(1-rho1))", std::pow(n2, 3.0) / (T * T * std::pow(M, 1.0 - rho1))},
        {"N*h^2", N * h * h},
    };
}

}  // namespace spde
