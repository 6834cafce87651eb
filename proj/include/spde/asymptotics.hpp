#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>

#include "spde/estimation.hpp"
#include "spde/model.hpp"

namespace spde {

/// I(r) = 2 sqrt(r + 1) - sqrt(r + 2) - sqrt(r), evaluated without
/// cancellation.
double gamma_series_term(std::size_t r);

struct GammaSeries {
    double partial_sum;  ///< sum of I(r)^2 for r < terms
    double tail_bound;   ///< upper bound on the omitted sum
    std::size_t terms;

    /// Gamma from the partial sum alone; the true value lies within
    /// tail_bound / pi above it.
    double value() const;
};

/// Truncates after `terms` (>= 2) terms. I(r)^2 <= r^-3 / 16, so the tail
/// past R is at most 1 / (32 (R - 1)^2).
GammaSeries gamma_series(std::size_t terms);

/// Gamma = (1/pi) sum_r I(r)^2 + 2/pi with truncation error below `tol`.
double gamma_constant(double tol = 1e-12);

struct UvMatrices {
    Eigen::Matrix2d u;
    Eigen::Matrix2d v;
};

/// integral_a^b y^p e^{-c y} dy for p in {0, 1, 2}.
double exp_moment(int p, double c, double a, double b);

/// The integral matrices U (exponent 4 eta) and V (exponent 2 eta) over
/// [delta, 1 - delta], in closed form.
UvMatrices uv_matrices(double sigma0_sq, double eta, double delta);

/// Finite-sum analogues over the actual thinned points. Throws NumericError
/// when V is singular.
UvMatrices uv_matrices_fixed_m(double sigma0_sq, double eta, std::span<const double> points);

/// sigma0^4 Gamma pi V^{-1} U V^{-1}: limit covariance of
/// sqrt(m N) (sigma0_sq_hat - sigma0_sq, eta_hat - eta).
Eigen::Matrix2d contrast_cov(double sigma0_sq, double eta, double delta, double gamma);

/// Same sandwich built from uv_matrices_fixed_m: limit covariance at rate
/// sqrt(N) for a fixed number of columns.
Eigen::Matrix2d contrast_cov_fixed_m(double sigma0_sq, double eta, std::span<const double> points, double gamma);

/// 3x3 limit covariance of sqrt(N_2)(sigma^2, theta2, theta1) errors; for
/// LargeT a fourth row/column for sqrt(T)(theta0_hat - theta0) carrying
/// 2 lambda_1.
Eigen::MatrixXd adaptive_cov(const SpdeParams& theta_star, Regime regime);

}  // namespace spde
