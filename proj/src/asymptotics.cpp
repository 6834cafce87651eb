#include "spde/asymptotics.hpp"

#include <cmath>
#include <string>

#include "spde/errors.hpp"

namespace spde {

namespace {

Eigen::Matrix2d moment_matrix(double sigma0_sq, double m0, double m1, double m2) {
    Eigen::Matrix2d out;
    out << m0, -sigma0_sq * m1, -sigma0_sq * m1, sigma0_sq * sigma0_sq * m2;
    return out;
}

// V^{-1} U V^{-1} through two solves against a Cholesky factor of V.
Eigen::Matrix2d sandwich(const UvMatrices& uv) {
    Eigen::LLT<Eigen::Matrix2d> llt(uv.v);
    if (llt.info() != Eigen::Success) {
        throw NumericError("contrast covariance: V is not positive definite");
    }
    const Eigen::Matrix2d left = llt.solve(uv.u);
    const Eigen::Matrix2d both = llt.solve(left.transpose()).transpose();
    const double asym = (both - both.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(1.0, both.cwiseAbs().maxCoeff())) {
        throw NumericError("contrast covariance: sandwich asymmetric by " + std::to_string(asym));
    }
    return 0.5 * (both + both.transpose());
}

}  // namespace

double gamma_series_term(std::size_t r) {
    // (sqrt(r+1) - sqrt(r)) - (sqrt(r+2) - sqrt(r+1)), each difference
    // rationalized, then combined over a common denominator
    const double a = std::sqrt(static_cast<double>(r));
    const double b = std::sqrt(static_cast<double>(r) + 1.0);
    const double c = std::sqrt(static_cast<double>(r) + 2.0);
    return 2.0 / ((c + a) * (b + a) * (c + b));
}

double GammaSeries::value() const { return (partial_sum + 2.0) / kPi; }

GammaSeries gamma_series(std::size_t terms) {
    if (terms < 2) {
        throw ValidationError("gamma_series: needs at least 2 terms");
    }
    // smallest terms first
    double sum = 0.0;
    for (std::size_t r = terms; r-- > 0;) {
        const double t = gamma_series_term(r);
        sum += t * t;
    }
    const double rm1 = static_cast<double>(terms - 1);
    return {sum, 1.0 / (32.0 * rm1 * rm1), terms};
}

double gamma_constant(double tol) {
    if (!(tol > 0.0)) {
        throw ValidationError("tol: must be > 0");
    }
    // tail / pi < tol  <=>  R - 1 > 1 / sqrt(32 pi tol)
    const auto terms = static_cast<std::size_t>(std::ceil(1.0 / std::sqrt(32.0 * kPi * tol))) + 2;
    return gamma_series(terms).value();
}

double exp_moment(int p, double c, double a, double b) {
    if (p < 0 || p > 2) {
        throw ValidationError("exp_moment: p must be 0, 1 or 2");
    }
    const double reach = std::abs(c) * std::max(std::abs(a), std::abs(b));
    if (reach <= 0.5) {
        // sum_n (-c)^n / n! (b^{p+n+1} - a^{p+n+1}) / (p+n+1), converges fast here
        double sum = 0.0;
        double coef = 1.0;
        double pa = std::pow(a, p + 1);
        double pb = std::pow(b, p + 1);
        for (int n = 0; n < 60; ++n) {
            const double term = coef * (pb - pa) / static_cast<double>(p + n + 1);
            sum += term;
            if (std::abs(term) <= 1e-18 * std::abs(sum) && n > 2) {
                break;
            }
            coef *= -c / static_cast<double>(n + 1);
            pa *= a;
            pb *= b;
        }
        return sum;
    }
    auto antiderivative = [&](double y) {
        // -F(y) with F' = y^p e^{-cy}
        const double e = std::exp(-c * y);
        switch (p) {
            case 0:
                return e / c;
            case 1:
                return e * (y / c + 1.0 / (c * c));
            default:
                return e * (y * y / c + 2.0 * y / (c * c) + 2.0 / (c * c * c));
        }
    };
    return antiderivative(a) - antiderivative(b);
}

UvMatrices uv_matrices(double sigma0_sq, double eta, double delta) {
    if (!(delta >= 0.0 && delta < 0.5)) {
        throw ValidationError("delta: must be in [0, 1/2)");
    }
    const double a = delta;
    const double b = 1.0 - delta;
    const double c4 = 4.0 * eta;
    const double c2 = 2.0 * eta;
    return {moment_matrix(sigma0_sq, exp_moment(0, c4, a, b), exp_moment(1, c4, a, b), exp_moment(2, c4, a, b)),
            moment_matrix(sigma0_sq, exp_moment(0, c2, a, b), exp_moment(1, c2, a, b), exp_moment(2, c2, a, b))};
}

UvMatrices uv_matrices_fixed_m(double sigma0_sq, double eta, std::span<const double> points) {
    if (points.size() < 2) {
        throw ValidationError("uv_matrices_fixed_m: needs at least 2 points");
    }
    double u0 = 0.0, u1 = 0.0, u2 = 0.0;
    double v0 = 0.0, v1 = 0.0, v2 = 0.0;
    for (double y : points) {
        const double e4 = std::exp(-4.0 * eta * y);
        const double e2 = std::exp(-2.0 * eta * y);
        u0 += e4;
        u1 += y * e4;
        u2 += y * y * e4;
        v0 += e2;
        v1 += y * e2;
        v2 += y * y * e2;
    }
    UvMatrices out{moment_matrix(sigma0_sq, u0, u1, u2), moment_matrix(sigma0_sq, v0, v1, v2)};
    // Cauchy-Schwarz: det >= 0 with equality iff all points coincide
    const double det = out.v.determinant();
    if (!(det > 1e-12 * out.v(0, 0) * out.v(1, 1))) {
        throw NumericError("uv_matrices_fixed_m: V is singular (points do not separate)");
    }
    return out;
}

Eigen::Matrix2d contrast_cov(double sigma0_sq, double eta, double delta, double gamma) {
    return sigma0_sq * sigma0_sq * gamma * kPi * sandwich(uv_matrices(sigma0_sq, eta, delta));
}

Eigen::Matrix2d contrast_cov_fixed_m(double sigma0_sq, double eta, std::span<const double> points, double gamma) {
    return sigma0_sq * sigma0_sq * gamma * kPi * sandwich(uv_matrices_fixed_m(sigma0_sq, eta, points));
}

Eigen::MatrixXd adaptive_cov(const SpdeParams& p, Regime regime) {
    p.validate();
    const double s2 = p.sigma * p.sigma;
    const double t1 = p.theta1;
    const double t2 = p.theta2;
    const int n = regime == Regime::FixedT ? 3 : 4;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    c(0, 0) = 2.0 * s2 * s2;
    c(0, 1) = c(1, 0) = 4.0 * t2 * s2;
    c(0, 2) = c(2, 0) = 4.0 * t1 * s2;
    c(1, 1) = 8.0 * t2 * t2;
    c(1, 2) = c(2, 1) = 8.0 * t1 * t2;
    c(2, 2) = 8.0 * t1 * t1;
    if (regime == Regime::LargeT) {
        c(3, 3) = 2.0 * eigenvalue(1, p);
    }
    return c;
}

}  // namespace spde
