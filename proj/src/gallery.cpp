#include "spde/gallery.hpp"

#include <algorithm>
#include <sstream>

#include "spde/errors.hpp"
#include "spde/field_io.hpp"
#include "spde/report.hpp"

namespace spde {

std::vector<std::size_t> downsample_indices(std::size_t first, std::size_t last, std::size_t max_points) {
    if (last < first || max_points == 0) {
        return {};
    }
    const std::size_t span = last - first;
    const std::size_t n = std::min(span + 1, max_points);
    std::vector<std::size_t> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(n == 1 ? first : first + (i * span + (n - 1) / 2) / (n - 1));
    }
    return out;
}

CrossSectionCollector::CrossSectionCollector(const GridSpec& grid, std::size_t max_grid_points) : grid_(grid) {
    cs_.t_index = grid.n_time / 2;
    cs_.y_index = std::max<std::size_t>(grid.n_space / 2, 1);
    cs_.grid_times = downsample_indices(0, grid.n_time, max_grid_points);
    cs_.grid_cols = downsample_indices(1, grid.n_space, max_grid_points);
    cs_.grid_values.reserve(cs_.grid_times.size() * cs_.grid_cols.size());
    cs_.fixed_y.reserve(grid.n_time + 1);
}

void CrossSectionCollector::add_slice(std::size_t index, std::span<const double> slice) {
    if (index == cs_.t_index) {
        cs_.fixed_t.clear();
        for (std::size_t j = 1; j <= slice.size(); ++j) {
            cs_.fixed_t.push_back({grid_.space(j), slice[j - 1]});
        }
    }
    cs_.fixed_y.push_back({grid_.time(index), slice[cs_.y_index - 1]});
    if (next_row_ < cs_.grid_times.size() && cs_.grid_times[next_row_] == index) {
        for (std::size_t c : cs_.grid_cols) {
            cs_.grid_values.push_back(slice[c - 1]);
        }
        ++next_row_;
    }
}

CrossSections simulate_cross_sections(const SpdeParams& params, const GridSpec& grid, std::uint64_t seed) {
    CrossSectionCollector c(grid);
    simulate_field(params, grid, seed, [&](std::size_t i, std::span<const double> s) { c.add_slice(i, s); });
    return c.result();
}

namespace {

std::string xy_csv(const char* xname, const std::vector<XY>& v) {
    std::ostringstream os;
    os << xname << ",x\n";
    for (const XY& p : v) {
        os << format_double(p.x) << ',' << format_double(p.y) << '\n';
    }
    return os.str();
}

std::string grid_csv(const CrossSections& cs, const GridSpec& grid) {
    std::ostringstream os;
    os << "t,y,x\n";
    std::size_t k = 0;
    for (std::size_t i : cs.grid_times) {
        for (std::size_t j : cs.grid_cols) {
            os << format_double(grid.time(i)) << ',' << format_double(grid.space(j)) << ','
               << format_double(cs.grid_values[k++]) << '\n';
        }
    }
    return os.str();
}

}  // namespace

std::vector<GalleryResult> run_gallery(const RunConfig& config, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    }
    const GridSpec& grid = config.study.grid;
    std::vector<GalleryResult> results;
    for (const GalleryEntry& entry : config.gallery) {
        if (!(eigenvalue(1, entry.params) > 0.0)) {
            throw ValidationError("gallery." + entry.name + ": lambda_1 must be > 0");
        }
        RunConfig own = config;
        own.study.params_true = entry.params;
        own.gallery = {entry};
        const nlohmann::json cfg = own.to_json();

        GalleryResult r;
        r.name = entry.name;
        r.params = entry.params;
        const std::filesystem::path field = out_dir / (entry.name + ".field");
        FieldWriter writer(field, {grid, entry.params, config.seed});
        CrossSectionCollector collector(grid);
        simulate_field(entry.params, grid, config.seed, [&](std::size_t i, std::span<const double> s) {
            writer.write_slice(i, s);
            collector.add_slice(i, s);
        });
        writer.close();
        write_text_file(field.string() + ".json", sidecar_json(field.filename().string(), cfg, config.seed).dump(2) + "\n");
        r.files.push_back(field);
        r.sections = collector.result();

        const std::filesystem::path ft = out_dir / (entry.name + "_fixed_t.csv");
        const std::filesystem::path fy = out_dir / (entry.name + "_fixed_y.csv");
        const std::filesystem::path fg = out_dir / (entry.name + "_grid.csv");
        write_with_sidecar(ft, xy_csv("y", r.sections.fixed_t), cfg, config.seed);
        write_with_sidecar(fy, xy_csv("t", r.sections.fixed_y), cfg, config.seed);
        write_with_sidecar(fg, grid_csv(r.sections, grid), cfg, config.seed);
        r.files.insert(r.files.end(), {ft, fy, fg});
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace spde
