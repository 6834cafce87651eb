#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spde/errors.hpp"
#include "spde/simulator.hpp"

using namespace spde;

namespace {

// X(y_j) by direct summation in long double
std::vector<double> direct_slice(const std::vector<double>& coords, const SpdeParams& p, std::size_t M) {
    std::vector<double> out(M);
    const long double eta = static_cast<long double>(p.theta1) / p.theta2;
    for (std::size_t j = 1; j <= M; ++j) {
        const long double y = static_cast<long double>(j) / M;
        long double s = 0;
        for (std::size_t k = 1; k <= coords.size(); ++k) {
            s += coords[k - 1] * std::sqrt(2.0L) * std::sin(3.14159265358979323846264338327950288L * k * y);
        }
        out[j - 1] = static_cast<double>(s * std::exp(-eta * y / 2));
    }
    out[M - 1] = 0.0;
    return out;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("grid validation") {
    CHECK_NOTHROW(GridSpec({0, 10, 1.0, 10}).validate());
    CHECK_THROWS_AS(GridSpec({10, 0, 1.0, 10}).validate(), ValidationError);
    CHECK_THROWS_AS(GridSpec({10, 10, 0.0, 10}).validate(), ValidationError);
    CHECK_THROWS_AS(GridSpec({10, 10, 1.0, 0}).validate(), ValidationError);
    CHECK(default_mode_count(100, 200) == 10000);
    CHECK(default_mode_count(2000, 8000) == 16000);
}

TEST_CASE("zero noise gives zero paths") {
    const CoordMatrix c = simulate_coordinates({0, 0.5, 0.1, 0.0}, {50, 10, 1.0, 30}, 3);
    for (std::size_t k = 1; k <= 30; ++k) {
        for (std::size_t i = 0; i <= 50; ++i) {
            CHECK(c.at(k, i) == 0.0);
        }
    }
}

TEST_CASE("coordinates are deterministic and start at zero") {
    const SpdeParams p{0, 0.5, 0.1, 1};
    const GridSpec g{40, 10, 1.0, 64};
    const CoordMatrix a = simulate_coordinates(p, g, 99);
    const CoordMatrix b = simulate_coordinates(p, g, 99);
    CHECK(a == b);
    CHECK_FALSE(a == simulate_coordinates(p, g, 100));
    for (std::size_t k = 1; k <= 64; ++k) {
        CHECK(a.at(k, 0) == 0.0);
    }
}

TEST_CASE("a mode's path does not depend on K") {
    const SpdeParams p{0, 0.5, 0.1, 1};
    const CoordMatrix a = simulate_coordinates(p, {30, 10, 1.0, 5}, 7);
    const CoordMatrix b = simulate_coordinates(p, {30, 10, 1.0, 50}, 7);
    for (std::size_t k = 1; k <= 5; ++k) {
        for (std::size_t i = 0; i <= 30; ++i) {
            CHECK(a.at(k, i) == b.at(k, i));
        }
    }
}

TEST_CASE("non-decaying modes are rejected") {
    CHECK_THROWS_AS(simulate_coordinates({5, 0.1, 0.1, 1}, {10, 10, 1.0, 10}, 1), NumericError);
    CHECK_THROWS_AS(simulate_coordinates({0, 0.1, 0.1, 1}, {0, 10, 1.0, 10}, 1), ValidationError);
}

TEST_CASE("synthesis of zero and unit coordinates") {
    const SpdeParams p{0, 0.5, 0.1, 1};
    const GridSpec g{1, 16, 1.0, 40};
    std::vector<double> c(40, 0.0);
    for (double v : synthesize_slice(c, p, g)) {
        CHECK(v == 0.0);
    }
    for (std::size_t k0 : {1u, 5u, 15u, 16u, 17u, 33u, 40u}) {
        std::fill(c.begin(), c.end(), 0.0);
        c[k0 - 1] = 1.0;
        const auto s = synthesize_slice(c, p, g);
        for (std::size_t j = 1; j <= 16; ++j) {
            CHECK(s[j - 1] == doctest::Approx(eigenfunction_eval(k0, p, g.space(j))).epsilon(1e-13).scale(1));
        }
    }
}

TEST_CASE("three-mode slice against a brute-force sum") {
    const SpdeParams p{0, 0, 1, 1};
    const GridSpec g{1, 4, 1.0, 3};
    const std::vector<double> c = {1.0, -0.5, 0.25};
    const auto s = synthesize_slice(c, p, g);
    const double r2 = std::sqrt(2.0);
    // y = 1/4, 1/2, 3/4, 1
    const double expect[4] = {r2 * (std::sin(kPi / 4) - 0.5 * std::sin(kPi / 2) + 0.25 * std::sin(3 * kPi / 4)),
                              r2 * (1.0 - 0.5 * 0.0 + 0.25 * -1.0),
                              r2 * (std::sin(3 * kPi / 4) - 0.5 * std::sin(3 * kPi / 2) + 0.25 * std::sin(9 * kPi / 4)),
                              0.0};
    for (int j = 0; j < 4; ++j) {
        CHECK(s[j] == doctest::Approx(expect[j]).epsilon(1e-14).scale(1));
    }
}

TEST_CASE("synthesis matches direct summation") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    for (const auto& [K, M, theta1] : {std::tuple{500u, 64u, 0.5}, std::tuple{3000u, 257u, -1.0}, std::tuple{37u, 2u, 0.0},
                                       std::tuple{1000u, 1000u, 0.2}}) {
        const SpdeParams p{0, theta1, 0.1, 1};
        std::vector<double> c(K);
        double scale = 0;
        for (auto& v : c) {
            v = nd(gen) / std::sqrt(1.0 + (&v - c.data()));
            scale += std::abs(v);
        }
        const auto fast = synthesize_slice(c, p, {1, M, 1.0, K});
        const auto slow = direct_slice(c, p, M);
        for (std::size_t j = 0; j < M; ++j) {
            CHECK(std::abs(fast[j] - slow[j]) <= 1e-12 * scale);
        }
        CHECK(fast[M - 1] == 0.0);
    }
}

TEST_CASE("N = 0 emits the initial slice only") {
    std::size_t calls = 0;
    const FieldSummary s = simulate_field({0, 0.5, 0.1, 1}, {0, 8, 1.0, 20}, 1, [&](std::size_t i, std::span<const double> x) {
        CHECK(i == 0);
        for (double v : x) {
            CHECK(v == 0.0);
        }
        ++calls;
    });
    CHECK(calls == 1);
    CHECK(s.slices_emitted == 1);
}

TEST_CASE("streamed field equals the two-phase computation bit for bit") {
    const SpdeParams p{0, 0.5, 0.1, 1};
    const GridSpec g{25, 33, 1.0, 300};
    const FieldDataset f = collect_field(p, g, 4);
    const CoordMatrix c = simulate_coordinates(p, g, 4);
    REQUIRE(f.slices.size() == 26);
    for (std::size_t i = 0; i <= 25; ++i) {
        CHECK(f.slices[i] == synthesize_slice(c.column(i), p, g));
        CHECK(f.slices[i][32] == 0.0);
    }
    CHECK(collect_field(p, g, 4) == f);
}

TEST_CASE("sink I/O errors carry the slice index") {
    try {
        simulate_field({0, 0.5, 0.1, 1}, {10, 8, 1.0, 20}, 1, [](std::size_t i, std::span<const double>) {
            if (i == 3) {
                throw IoError("disk full");
            }
        });
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("slice 3") != std::string::npos);
    }
}

}  // TEST_SUITE
