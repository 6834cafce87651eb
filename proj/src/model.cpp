#include "spde/model.hpp"

#include <cmath>
#include <string>

#include "spde/errors.hpp"

namespace spde {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw ValidationError(std::string(name) + ": must be finite");
    }
}

}  // namespace

void SpdeParams::validate(bool allow_zero_sigma) const {
    require_finite(theta0, "theta0");
    require_finite(theta1, "theta1");
    require_finite(theta2, "theta2");
    require_finite(sigma, "sigma");
    if (!(theta2 > 0.0)) {
        throw ValidationError("theta2: must be > 0");
    }
    if (allow_zero_sigma ? !(sigma >= 0.0) : !(sigma > 0.0)) {
        throw ValidationError(allow_zero_sigma ? "sigma: must be >= 0" : "sigma: must be > 0");
    }
}

double eigenvalue(std::size_t k, const SpdeParams& p) {
    const double kk = static_cast<double>(k);
    return -p.theta0 + p.theta1 * p.theta1 / (4.0 * p.theta2) + kPiSq * kk * kk * p.theta2;
}

double eigenfunction_eval(std::size_t k, const SpdeParams& p, double y) {
    // sin(pi k y) is not exactly zero in floating point at y = 1
    if (y <= 0.0 || y >= 1.0) {
        return 0.0;
    }
    const double eta = p.theta1 / p.theta2;
    return std::numbers::sqrt2 * std::sin(kPi * static_cast<double>(k) * y) * std::exp(-0.5 * eta * y);
}

DerivedParams derived_params(const SpdeParams& p) {
    return {p.sigma * p.sigma / std::sqrt(p.theta2), p.theta1 / p.theta2, eigenvalue(1, p)};
}

OuTransition ou_transition(double lambda, double sigma, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("dt: must be > 0");
    }
    if (!(sigma >= 0.0)) {
        throw ValidationError("sigma: must be >= 0");
    }
    const double x = lambda * dt;
    // (1 - e^{-2x}) / (2x), the variance factor relative to sigma^2 dt
    double ratio;
    if (std::abs(x) < 1e-8) {
        ratio = 1.0 - x + (2.0 / 3.0) * x * x;
    } else {
        ratio = -std::expm1(-2.0 * x) / (2.0 * x);
    }
    return {std::exp(-x), sigma * sigma * dt * ratio, dt};
}

}  // namespace spde
