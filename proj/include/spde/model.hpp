#pragma once

#include <cstddef>
#include <numbers>

namespace spde {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kPiSq = kPi * kPi;

/// Coefficients of dX = (theta2 X'' + theta1 X' + theta0 X) dt + sigma dB on
/// [0, T] x [0, 1] with Dirichlet boundary and zero initial condition.
struct SpdeParams {
    double theta0 = 0.0;
    double theta1 = 0.0;
    double theta2 = 1.0;
    double sigma = 1.0;

    /// Throws ValidationError unless every field is finite, theta2 > 0 and
    /// sigma > 0. With allow_zero_sigma the noise may vanish (simulator test
    /// and gallery use only).
    void validate(bool allow_zero_sigma = false) const;

    bool operator==(const SpdeParams&) const = default;
};

/// Quantities identified by the first estimation stage.
struct DerivedParams {
    double sigma0_sq;  ///< sigma^2 / sqrt(theta2)
    double eta;        ///< theta1 / theta2
    double lambda1;    ///< first eigenvalue
};

/// -A_theta e_k = lambda_k e_k.
double eigenvalue(std::size_t k, const SpdeParams& params);

/// sqrt(2) sin(pi k y) exp(-eta y / 2).
double eigenfunction_eval(std::size_t k, const SpdeParams& params, double y);

DerivedParams derived_params(const SpdeParams& params);

/// Exact one-step law of dx = -lambda x dt + sigma dw:
/// x(t + dt) = a x(t) + sqrt(s_sq) Z.
struct OuTransition {
    double a;
    double s_sq;
    double dt;
};

/// Valid for any real lambda, including zero and negative (explosive) rates.
/// Throws ValidationError for dt <= 0 or sigma < 0.
OuTransition ou_transition(double lambda, double sigma, double dt);

}  // namespace spde
