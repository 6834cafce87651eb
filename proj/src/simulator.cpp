#include "spde/simulator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include "spde/errors.hpp"

namespace spde {

namespace {

// FFTW's planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void check_decaying(const SpdeParams& params) {
    // lambda_k increases with k, so the first mode decides
    const double l1 = eigenvalue(1, params);
    if (!(l1 > 0.0)) {
        throw NumericError("simulator: lambda_1 = " + std::to_string(l1) +
                           " <= 0; every spectral mode must decay");
    }
}

}  // namespace

void GridSpec::validate() const {
    if (n_space == 0) {
        throw ValidationError("n_space: must be >= 1");
    }
    if (n_modes == 0) {
        throw ValidationError("n_modes: must be >= 1");
    }
    if (n_modes > std::numeric_limits<std::uint32_t>::max()) {
        throw ValidationError("n_modes: must fit in 32 bits");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ValidationError("horizon: must be > 0");
    }
}

std::size_t default_mode_count(std::size_t n_time, std::size_t n_space) {
    return std::max<std::size_t>(10000, 2 * std::max(n_time, n_space));
}

std::vector<double> CoordMatrix::column(std::size_t i) const {
    std::vector<double> out(n_modes_);
    for (std::size_t k = 0; k < n_modes_; ++k) {
        out[k] = values_[k * n_points_ + i];
    }
    return out;
}

// ---------------------------------------------------------------------------

CoordinateStepper::CoordinateStepper(const SpdeParams& params, const GridSpec& grid, std::uint64_t seed)
    : key_(rng::key_from_seed(seed)) {
    params.validate(/*allow_zero_sigma=*/true);
    grid.validate();
    check_decaying(params);
    const std::size_t K = grid.n_modes;
    a_.resize(K);
    sd_.resize(K);
    x_.assign(K, 0.0);
    pending_.assign(K, 0.0);
    if (grid.n_time == 0) {
        return;
    }
    for (std::size_t k = 1; k <= K; ++k) {
        const OuTransition tr = ou_transition(eigenvalue(k, params), params.sigma, grid.dt());
        a_[k - 1] = tr.a;
        sd_[k - 1] = std::sqrt(tr.s_sq);
    }
}

void CoordinateStepper::step() {
    // step number i + 1 uses pair (i / 2): first member on even i, second on odd
    const std::size_t i = index_;
    const bool fresh = (i % 2 == 0);
    const std::uint64_t pair = i / 2;
    const auto K = static_cast<std::ptrdiff_t>(x_.size());
#pragma omp parallel for schedule(static) if (K > 4096)
    for (std::ptrdiff_t k = 0; k < K; ++k) {
        double z;
        if (fresh) {
            const auto [z0, z1] = rng::normal_pair(key_, static_cast<std::uint32_t>(k + 1), pair);
            z = z0;
            pending_[k] = z1;
        } else {
            z = pending_[k];
        }
        x_[k] = a_[k] * x_[k] + sd_[k] * z;
    }
    ++index_;
}

// ---------------------------------------------------------------------------

struct SliceSynthesizer::Impl {
    std::size_t n_modes = 0;
    std::size_t n_space = 0;
    std::size_t n_freq = 0;  // M - 1
    double* folded = nullptr;
    double* transformed = nullptr;
    fftw_plan plan = nullptr;
    std::vector<double> envelope;  // sqrt(2) e^{-eta y_j / 2} / 2, j = 1..M-1

    ~Impl() {
        if (plan != nullptr) {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(plan);
        }
        fftw_free(folded);
        fftw_free(transformed);
    }
};

SliceSynthesizer::SliceSynthesizer(const SpdeParams& params, const GridSpec& grid)
    : impl_(std::make_unique<Impl>()) {
    grid.validate();
    Impl& s = *impl_;
    s.n_modes = grid.n_modes;
    s.n_space = grid.n_space;
    s.n_freq = grid.n_space - 1;
    if (s.n_freq == 0) {
        return;
    }
    s.folded = fftw_alloc_real(s.n_freq);
    s.transformed = fftw_alloc_real(s.n_freq);
    if (s.folded == nullptr || s.transformed == nullptr) {
        throw NumericError("SliceSynthesizer: allocation failed");
    }
    {
        std::lock_guard lock(planner_mutex());
        s.plan = fftw_plan_r2r_1d(static_cast<int>(s.n_freq), s.folded, s.transformed, FFTW_RODFT00,
                                  FFTW_ESTIMATE);
    }
    if (s.plan == nullptr) {
        throw NumericError("SliceSynthesizer: FFTW planning failed");
    }
    const double eta = params.theta1 / params.theta2;
    s.envelope.resize(s.n_freq);
    for (std::size_t j = 1; j <= s.n_freq; ++j) {
        s.envelope[j - 1] = 0.5 * std::numbers::sqrt2 * std::exp(-0.5 * eta * grid.space(j));
    }
}

SliceSynthesizer::~SliceSynthesizer() = default;
SliceSynthesizer::SliceSynthesizer(SliceSynthesizer&&) noexcept = default;
SliceSynthesizer& SliceSynthesizer::operator=(SliceSynthesizer&&) noexcept = default;

void SliceSynthesizer::synthesize(std::span<const double> coords, std::span<double> out) {
    Impl& s = *impl_;
    if (coords.size() != s.n_modes || out.size() != s.n_space) {
        throw ValidationError("synthesize_slice: expected " + std::to_string(s.n_modes) +
                              " coordinates and " + std::to_string(s.n_space) + " outputs");
    }
    out[s.n_space - 1] = 0.0;  // y_M = 1
    if (s.n_freq == 0) {
        return;
    }
    const std::size_t period = 2 * s.n_space;
    std::fill(s.folded, s.folded + s.n_freq, 0.0);
    // k = 1..K, residue r = k mod 2M: r in (0, M) adds, r in (M, 2M) subtracts
    // at 2M - r, r = 0 or M vanish on the grid
    std::size_t r = 0;
    for (std::size_t k = 0; k < s.n_modes; ++k) {
        r = (r + 1 == period) ? 0 : r + 1;
        if (r == 0 || r == s.n_space) {
            continue;
        }
        if (r < s.n_space) {
            s.folded[r - 1] += coords[k];
        } else {
            s.folded[period - r - 1] -= coords[k];
        }
    }
    fftw_execute(s.plan);
    for (std::size_t j = 0; j < s.n_freq; ++j) {
        out[j] = s.envelope[j] * s.transformed[j];
    }
}

// ---------------------------------------------------------------------------

CoordMatrix simulate_coordinates(const SpdeParams& params, const GridSpec& grid, std::uint64_t seed) {
    if (grid.n_time == 0) {
        throw ValidationError("n_time: must be >= 1");
    }
    CoordinateStepper stepper(params, grid, seed);
    CoordMatrix out(grid.n_modes, grid.n_time);
    for (std::size_t i = 1; i <= grid.n_time; ++i) {
        stepper.step();
        const auto x = stepper.coords();
        for (std::size_t k = 1; k <= grid.n_modes; ++k) {
            out.at(k, i) = x[k - 1];
        }
    }
    return out;
}

std::vector<double> synthesize_slice(std::span<const double> coords, const SpdeParams& params,
                                     const GridSpec& grid) {
    SliceSynthesizer synth(params, grid);
    std::vector<double> out(grid.n_space);
    synth.synthesize(coords, out);
    return out;
}

FieldSummary simulate_field(const SpdeParams& params, const GridSpec& grid, std::uint64_t seed,
                            const SliceSink& sink) {
    CoordinateStepper stepper(params, grid, seed);
    SliceSynthesizer synth(params, grid);
    std::vector<double> slice(grid.n_space, 0.0);

    auto emit = [&](std::size_t i) {
        try {
            sink(i, slice);
        } catch (const IoError& e) {
            throw IoError("slice " + std::to_string(i) + ": " + e.what());
        }
    };

    emit(0);
    for (std::size_t i = 1; i <= grid.n_time; ++i) {
        stepper.step();
        synth.synthesize(stepper.coords(), slice);
        emit(i);
    }
    return {grid, params, seed, grid.n_time + 1};
}

FieldDataset collect_field(const SpdeParams& params, const GridSpec& grid, std::uint64_t seed) {
    FieldDataset out{grid, params, seed, {}};
    out.slices.reserve(grid.n_time + 1);
    simulate_field(params, grid, seed, [&](std::size_t, std::span<const double> s) {
        out.slices.emplace_back(s.begin(), s.end());
    });
    return out;
}

}  // namespace spde
