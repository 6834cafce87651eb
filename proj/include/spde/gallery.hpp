#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spde/config.hpp"
#include "spde/simulator.hpp"
#include "spde/stats.hpp"

namespace spde {

/// Cross-sections of one simulated field, collected while streaming.
struct CrossSections {
    std::size_t t_index = 0;  ///< slice used for the fixed-t section (N/2)
    std::size_t y_index = 0;  ///< column used for the fixed-y section (M/2)
    std::vector<XY> fixed_t;  ///< (y_j, X(t, y_j)), j = 1..M
    std::vector<XY> fixed_y;  ///< (t_i, X(t_i, y)), i = 0..N
    std::vector<std::size_t> grid_times;   ///< downsampled time indices
    std::vector<std::size_t> grid_cols;    ///< downsampled column indices
    std::vector<double> grid_values;       ///< row-major, grid_times x grid_cols
};

/// At most `max_points` indices spread evenly over [first, last].
std::vector<std::size_t> downsample_indices(std::size_t first, std::size_t last, std::size_t max_points);

/// Sink that fills a CrossSections for `grid`.
class CrossSectionCollector {
public:
    explicit CrossSectionCollector(const GridSpec& grid, std::size_t max_grid_points = 101);
    void add_slice(std::size_t index, std::span<const double> slice);
    const CrossSections& result() const { return cs_; }

private:
    GridSpec grid_;
    CrossSections cs_;
    std::size_t next_row_ = 0;
};

CrossSections simulate_cross_sections(const SpdeParams& params, const GridSpec& grid, std::uint64_t seed);

struct GalleryResult {
    std::string name;
    SpdeParams params;
    std::vector<std::filesystem::path> files;
    CrossSections sections;
};

/// For every gallery entry: `<name>.field` plus `<name>_fixed_t.csv`
/// (y, x), `<name>_fixed_y.csv` (t, x) and `<name>_grid.csv` (t, y, x),
/// each with a JSON sidecar. All entries share `config.seed`.
std::vector<GalleryResult> run_gallery(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace spde
