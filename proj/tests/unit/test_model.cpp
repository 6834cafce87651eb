#include <doctest.h>

#include <cmath>

#include "spde/errors.hpp"
#include "spde/model.hpp"

using namespace spde;

TEST_SUITE("model") {

TEST_CASE("eigenvalue examples") {
    CHECK(eigenvalue(1, {0, 0, 0.1, 1}) == doctest::Approx(0.986960440108936).epsilon(1e-14));
    CHECK(eigenvalue(1, {0, 0.5, 0.1, 1}) == doctest::Approx(1.611960440108936).epsilon(1e-14));
    CHECK(eigenvalue(1, {0, 0.2, 0.2, 1}) == doctest::Approx(2.023920880217872).epsilon(1e-14));
}

TEST_CASE("eigenvalue spacing") {
    const SpdeParams p{-0.3, 0.7, 0.25, 2.0};
    for (std::size_t k = 2; k < 200; ++k) {
        const double diff = eigenvalue(k, p) - eigenvalue(k - 1, p);
        CHECK(diff == doctest::Approx(kPiSq * static_cast<double>(2 * k - 1) * p.theta2).epsilon(1e-12));
    }
}

TEST_CASE("eigenfunction values") {
    const SpdeParams p0{0, 0, 1, 1};
    CHECK(eigenfunction_eval(1, p0, 0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    const SpdeParams p{0, 0.5, 0.1, 1};
    // sqrt(2) e^{-1.25}
    CHECK(eigenfunction_eval(1, p, 0.5) == doctest::Approx(0.405178969404629).epsilon(1e-13));
    for (std::size_t k : {1u, 2u, 7u, 1000u}) {
        CHECK(eigenfunction_eval(k, p, 0.0) == 0.0);
        CHECK(eigenfunction_eval(k, p, 1.0) == 0.0);
    }
}

TEST_CASE("eigenfunctions are orthonormal in the weighted inner product") {
    const SpdeParams p{0, 0.5, 0.1, 1};
    const int n = 20000;
    for (std::size_t k = 1; k <= 3; ++k) {
        for (std::size_t l = 1; l <= 3; ++l) {
            double s = 0.0;
            for (int i = 1; i < n; ++i) {
                const double y = static_cast<double>(i) / n;
                s += eigenfunction_eval(k, p, y) * eigenfunction_eval(l, p, y) * std::exp(5.0 * y);
            }
            s /= n;
            CHECK(s == doctest::Approx(k == l ? 1.0 : 0.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("derived params") {
    const DerivedParams a = derived_params({0, 0, 1, 1});
    CHECK(a.sigma0_sq == 1.0);
    CHECK(a.eta == 0.0);
    CHECK(a.lambda1 == doctest::Approx(kPiSq));
    const DerivedParams b = derived_params({0, 0.5, 0.1, 1});
    CHECK(b.sigma0_sq == doctest::Approx(3.16227766016838).epsilon(1e-14));
    CHECK(b.eta == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(b.lambda1 == doctest::Approx(1.611960440108936).epsilon(1e-14));
    const DerivedParams c = derived_params({0, 0.2, 0.2, 1});
    CHECK(c.sigma0_sq == doctest::Approx(2.23606797749979).epsilon(1e-14));
    CHECK(c.eta == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.lambda1 == doctest::Approx(2.023920880217872).epsilon(1e-14));
}

TEST_CASE("derived params invert") {
    for (const SpdeParams& p : {SpdeParams{0, 0.5, 0.1, 1}, SpdeParams{1, -0.3, 2.5, 0.7}, SpdeParams{0, 0.2, 0.2, 3}}) {
        const DerivedParams d = derived_params(p);
        const double theta2 = std::pow(p.sigma * p.sigma / d.sigma0_sq, 2);
        CHECK(std::abs(theta2 - p.theta2) <= 1e-12 * p.theta2);
        CHECK(std::abs(d.eta * theta2 - p.theta1) <= 1e-12 * std::abs(p.theta1));
    }
}

TEST_CASE("params validation") {
    CHECK_THROWS_AS(SpdeParams({0, 0, -1, 1}).validate(), ValidationError);
    CHECK_THROWS_AS(SpdeParams({0, 0, 1, 0}).validate(), ValidationError);
    CHECK_NOTHROW(SpdeParams({0, 0, 1, 0}).validate(true));
    CHECK_THROWS_AS(SpdeParams({NAN, 0, 1, 1}).validate(), ValidationError);
    try {
        SpdeParams{0, 0, -1, 1}.validate();
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("theta2") != std::string::npos);
        CHECK(msg.find("> 0") != std::string::npos);
    }
}

TEST_CASE("ou transition examples") {
    const OuTransition small = ou_transition(1.0, 1.0, 1e-14);
    CHECK(small.a == doctest::Approx(1.0));
    CHECK(small.s_sq < 1e-13);
    const OuTransition zero = ou_transition(0.0, 2.0, 0.5);
    CHECK(zero.a == 1.0);
    CHECK(zero.s_sq == doctest::Approx(2.0).epsilon(1e-15));
    const OuTransition t = ou_transition(1.611960440108936, 1.0, 1e-4);
    CHECK(t.a == doctest::Approx(0.999838816947373).epsilon(1e-14));
    CHECK(t.s_sq == doctest::Approx(9.99838821277369e-5).epsilon(1e-12));
    CHECK_THROWS_AS(ou_transition(1.0, 1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(ou_transition(1.0, -1.0, 0.1), ValidationError);
}

TEST_CASE("ou transition series branch is continuous") {
    for (double lam : {1e-7, -1e-7, 1e-9, 0.0}) {
        const OuTransition t = ou_transition(lam, 1.5, 0.1);
        const double x = lam * 0.1;
        const double exact = x == 0.0 ? 2.25 * 0.1 : 2.25 * 0.1 * (-std::expm1(-2 * x)) / (2 * x);
        CHECK(t.s_sq == doctest::Approx(exact).epsilon(1e-14));
    }
    // explosive modes are still exact
    const OuTransition neg = ou_transition(-2.0, 1.0, 0.3);
    CHECK(neg.a == doctest::Approx(std::exp(0.6)).epsilon(1e-15));
    CHECK(neg.s_sq == doctest::Approx(std::expm1(1.2) / 4.0).epsilon(1e-14));
}

TEST_CASE("ou transition composition and stationary variance") {
    for (double lam : {0.3, 1.611960440108936, 25.0, 4000.0}) {
        for (double d1 : {1e-4, 0.01, 0.5}) {
            const double d2 = 0.37 * d1 + 1e-5;
            const OuTransition t1 = ou_transition(lam, 1.3, d1);
            const OuTransition t2 = ou_transition(lam, 1.3, d2);
            const OuTransition t12 = ou_transition(lam, 1.3, d1 + d2);
            CHECK(std::abs(t1.a * t2.a - t12.a) <= 1e-12 * t12.a + 1e-300);
            const double comp = t2.s_sq + t2.a * t2.a * t1.s_sq;
            CHECK(std::abs(comp - t12.s_sq) <= 1e-12 * t12.s_sq);
            const double stat = t1.s_sq / (-std::expm1(-2 * lam * d1));
            CHECK(std::abs(stat - 1.69 / (2 * lam)) <= 1e-12 * 1.69 / (2 * lam));
        }
    }
}

}  // TEST_SUITE
