#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "spde/simulator.hpp"

namespace spde {

// Binary field file, all numbers little-endian:
//
//   offset  size  content
//        0     6  magic "SPDEF1"
//        6     2  format version (u16) = 1
//        8     8  N (u64)
//       16     8  M (u64)
//       24     8  T (f64)
//       32    32  theta0, theta1, theta2, sigma (f64)
//       64     8  K (u64)
//       72     8  seed (u64)
//       80        (N + 1) slices of M f64 values, in time order

inline constexpr char kFieldMagic[6] = {'S', 'P', 'D', 'E', 'F', '1'};
inline constexpr std::uint16_t kFieldVersion = 1;
inline constexpr std::size_t kFieldHeaderBytes = 80;

struct FieldHeader {
    GridSpec grid;
    SpdeParams params;
    std::uint64_t seed = 0;

    bool operator==(const FieldHeader&) const = default;
};

/// Streams slices to a field file. Slices must arrive in order 0..N.
class FieldWriter {
public:
    FieldWriter(const std::filesystem::path& path, const FieldHeader& header);

    void write_slice(std::size_t index, std::span<const double> slice);
    SliceSink sink();

    /// Flushes and checks that all N + 1 slices were written.
    void close();

private:
    std::filesystem::path path_;
    FieldHeader header_;
    std::ofstream out_;
    std::size_t next_ = 0;
    std::vector<char> buf_;
};

/// Opens a field file and validates the header and body size before any
/// slice is handed out.
class FieldReader {
public:
    explicit FieldReader(const std::filesystem::path& path);

    const FieldHeader& header() const { return header_; }

    /// Feeds every slice to `sink` in time order.
    void read_all(const SliceSink& sink);

private:
    std::filesystem::path path_;
    FieldHeader header_;
    std::ifstream in_;
};

void write_field(const std::filesystem::path& path, const FieldDataset& field);
FieldDataset read_field(const std::filesystem::path& path);

/// Simulates straight into a field file.
FieldSummary simulate_to_file(const std::filesystem::path& path, const SpdeParams& params, const GridSpec& grid,
                              std::uint64_t seed);

/// Writes `text` to `path`, replacing any existing file. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace spde
