#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "spde/model.hpp"
#include "spde/rng.hpp"

namespace spde {

/// Space-time observation grid plus spectral truncation.
/// t_i = i T / N for i = 0..N, y_j = j / M for j = 1..M.
struct GridSpec {
    std::size_t n_time = 2000;    ///< N
    std::size_t n_space = 2000;   ///< M
    double horizon = 1.0;         ///< T
    std::size_t n_modes = 20000;  ///< K

    double dt() const { return n_time == 0 ? 0.0 : horizon / static_cast<double>(n_time); }
    double time(std::size_t i) const { return static_cast<double>(i) * dt(); }
    double space(std::size_t j) const { return static_cast<double>(j) / static_cast<double>(n_space); }

    /// N = 0 is accepted (empty evolution); M, K and T must be positive.
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

/// K used when the configuration asks for automatic truncation.
std::size_t default_mode_count(std::size_t n_time, std::size_t n_space);

/// Per-mode time series x_k(t_i), stored mode-major.
class CoordMatrix {
public:
    CoordMatrix(std::size_t n_modes, std::size_t n_time)
        : n_modes_(n_modes), n_points_(n_time + 1), values_(n_modes * (n_time + 1), 0.0) {}

    std::size_t n_modes() const { return n_modes_; }
    std::size_t n_points() const { return n_points_; }

    /// k is 1-based, i in [0, N].
    double at(std::size_t k, std::size_t i) const { return values_[(k - 1) * n_points_ + i]; }
    double& at(std::size_t k, std::size_t i) { return values_[(k - 1) * n_points_ + i]; }

    std::span<const double> mode(std::size_t k) const {
        return {values_.data() + (k - 1) * n_points_, n_points_};
    }

    /// All K coordinates at time index i.
    std::vector<double> column(std::size_t i) const;

    bool operator==(const CoordMatrix&) const = default;

private:
    std::size_t n_modes_;
    std::size_t n_points_;
    std::vector<double> values_;
};

/// Advances all K spectral coordinates by exact OU transitions, one time
/// step at a time. Normal draws are keyed by (seed, mode, step), so the path
/// of each mode does not depend on K or on evaluation order.
class CoordinateStepper {
public:
    CoordinateStepper(const SpdeParams& params, const GridSpec& grid, std::uint64_t seed);

    /// Moves from t_i to t_{i+1}.
    void step();

    std::size_t index() const { return index_; }
    std::span<const double> coords() const { return x_; }

private:
    rng::Key key_;
    std::size_t index_ = 0;
    std::vector<double> a_;
    std::vector<double> sd_;
    std::vector<double> x_;
    std::vector<double> pending_;  // second normal of each mode's current pair
};

/// Evaluates X(y_j) = sum_k x_k e_k(y_j) for j = 1..M.
///
/// Since sin(pi k j / M) depends on k only through k mod 2M, the K
/// coordinates are first folded onto M - 1 sine frequencies and the sum is
/// then a type-I discrete sine transform, done by FFTW. Cost per slice is
/// O(K + M log M) and memory O(M).
class SliceSynthesizer {
public:
    SliceSynthesizer(const SpdeParams& params, const GridSpec& grid);
    ~SliceSynthesizer();
    SliceSynthesizer(SliceSynthesizer&&) noexcept;
    SliceSynthesizer& operator=(SliceSynthesizer&&) noexcept;

    /// coords.size() must equal K and out.size() must equal M.
    void synthesize(std::span<const double> coords, std::span<double> out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Every mode path sampled on the full time grid. Rejects N = 0.
CoordMatrix simulate_coordinates(const SpdeParams& params, const GridSpec& grid, std::uint64_t seed);

/// One-shot convenience around SliceSynthesizer.
std::vector<double> synthesize_slice(std::span<const double> coords, const SpdeParams& params,
                                     const GridSpec& grid);

/// Receives slices in time order; the span is only valid during the call.
using SliceSink = std::function<void(std::size_t index, std::span<const double> slice)>;

struct FieldSummary {
    GridSpec grid;
    SpdeParams params;
    std::uint64_t seed = 0;
    std::size_t slices_emitted = 0;
};

/// Streams slices i = 0..N to `sink` with O(K + M) working memory.
/// An IoError thrown by the sink is rethrown tagged with the slice index.
FieldSummary simulate_field(const SpdeParams& params, const GridSpec& grid, std::uint64_t seed,
                            const SliceSink& sink);

/// A fully materialized field; only sensible for small grids.
struct FieldDataset {
    GridSpec grid;
    SpdeParams params;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> slices;  ///< N + 1 slices of M values

    bool operator==(const FieldDataset&) const = default;
};

FieldDataset collect_field(const SpdeParams& params, const GridSpec& grid, std::uint64_t seed);

}  // namespace spde
