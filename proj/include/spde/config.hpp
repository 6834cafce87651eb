#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spde/experiments.hpp"

namespace spde {

struct GalleryEntry {
    std::string name;
    SpdeParams params;
};

/// Parameter variations for the sample-path gallery that the simulator can
/// run (every lambda_k > 0).
std::vector<GalleryEntry> default_gallery();

/// Fully populated configuration of one CLI run.
struct RunConfig {
    StudyConfig study;          ///< model, grid, estimation and study settings
    std::uint64_t seed = 1;     ///< seed of simulate / estimate / gallery
    std::vector<GalleryEntry> gallery;

    /// The effective configuration as a document that parse_config maps back
    /// to the same RunConfig.
    nlohmann::json to_json() const;
};

/// Parses a JSON configuration document and applies `key=value` overrides
/// (dotted paths such as grid.n_time, or the short aliases N, M, T, K, m,
/// N2, theta0..sigma). Defaults come from the preset named by "preset"
/// (fixed_t or large_t), falling back to estimation.regime. Unknown keys and
/// constraint violations throw ValidationError naming the key.
RunConfig parse_config(std::string_view document, const std::vector<std::string>& overrides = {});

/// Reads `path` (an empty path means an empty document) and parses it.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace spde
