#include "spde/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <type_traits>

#include "spde/errors.hpp"

namespace spde {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(char* dst, T value) {
    std::uint64_t bits = 0;
    if constexpr (std::is_same_v<T, double>) {
        bits = std::bit_cast<std::uint64_t>(value);
    } else {
        bits = static_cast<std::uint64_t>(value);
    }
    for (std::size_t b = 0; b < sizeof(T); ++b) {
        dst[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
}

template <typename T>
T get_le(const char* src) {
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(src[b])) << (8 * b);
    }
    if constexpr (std::is_same_v<T, double>) {
        return std::bit_cast<double>(bits);
    } else {
        return static_cast<T>(bits);
    }
}

void encode_doubles(std::span<const double> values, std::vector<char>& out) {
    out.resize(values.size() * 8);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(out.data(), values.data(), out.size());
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            put_le(out.data() + 8 * i, values[i]);
        }
    }
}

void decode_doubles(const std::vector<char>& in, std::vector<double>& values) {
    values.resize(in.size() / 8);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(values.data(), in.data(), in.size());
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] = get_le<double>(in.data() + 8 * i);
        }
    }
}

std::array<char, kFieldHeaderBytes> encode_header(const FieldHeader& h) {
    std::array<char, kFieldHeaderBytes> b{};
    std::memcpy(b.data(), kFieldMagic, 6);
    put_le<std::uint16_t>(b.data() + 6, kFieldVersion);
    put_le<std::uint64_t>(b.data() + 8, h.grid.n_time);
    put_le<std::uint64_t>(b.data() + 16, h.grid.n_space);
    put_le<double>(b.data() + 24, h.grid.horizon);
    put_le<double>(b.data() + 32, h.params.theta0);
    put_le<double>(b.data() + 40, h.params.theta1);
    put_le<double>(b.data() + 48, h.params.theta2);
    put_le<double>(b.data() + 56, h.params.sigma);
    put_le<std::uint64_t>(b.data() + 64, h.grid.n_modes);
    put_le<std::uint64_t>(b.data() + 72, h.seed);
    return b;
}

}  // namespace

FieldWriter::FieldWriter(const std::filesystem::path& path, const FieldHeader& header)
    : path_(path), header_(header) {
    header_.grid.validate();
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    const auto h = encode_header(header_);
    out_.write(h.data(), static_cast<std::streamsize>(h.size()));
    if (!out_) {
        throw IoError("write failed: " + path.string());
    }
}

void FieldWriter::write_slice(std::size_t index, std::span<const double> slice) {
    if (index != next_ || index > header_.grid.n_time) {
        throw IoError("field writer: expected slice " + std::to_string(next_) + ", got " + std::to_string(index));
    }
    if (slice.size() != header_.grid.n_space) {
        throw IoError("field writer: slice has " + std::to_string(slice.size()) + " values, expected " +
                      std::to_string(header_.grid.n_space));
    }
    encode_doubles(slice, buf_);
    out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out_) {
        throw IoError("write failed: " + path_.string());
    }
    ++next_;
}

SliceSink FieldWriter::sink() {
    return [this](std::size_t i, std::span<const double> s) { write_slice(i, s); };
}

void FieldWriter::close() {
    if (!out_.is_open()) {
        return;
    }
    out_.flush();
    const bool ok = static_cast<bool>(out_);
    out_.close();
    if (!ok) {
        throw IoError("write failed: " + path_.string());
    }
    if (next_ != header_.grid.n_time + 1) {
        throw SliceCountMismatchError("field writer: wrote " + std::to_string(next_) + " slices, header says " +
                                      std::to_string(header_.grid.n_time + 1));
    }
}

FieldReader::FieldReader(const std::filesystem::path& path) : path_(path) {
    in_.open(path, std::ios::binary);
    if (!in_) {
        throw IoError("cannot open " + path.string());
    }
    std::error_code ec;
    const std::uintmax_t size = std::filesystem::file_size(path, ec);
    if (ec) {
        throw IoError("cannot stat " + path.string() + ": " + ec.message());
    }
    std::array<char, kFieldHeaderBytes> b{};
    const std::size_t head = static_cast<std::size_t>(std::min<std::uintmax_t>(size, kFieldHeaderBytes));
    in_.read(b.data(), static_cast<std::streamsize>(head));
    if (head < 6 || std::memcmp(b.data(), kFieldMagic, 6) != 0) {
        throw BadMagicError(path.string() + ": not a field file (bad magic)");
    }
    if (head < 8) {
        throw TruncatedBodyError(path.string() + ": header truncated", 0);
    }
    const auto version = get_le<std::uint16_t>(b.data() + 6);
    if (version != kFieldVersion) {
        throw VersionMismatchError(path.string() + ": format version " + std::to_string(version) +
                                   ", this reader supports " + std::to_string(kFieldVersion));
    }
    if (head < kFieldHeaderBytes) {
        throw TruncatedBodyError(path.string() + ": header truncated", 0);
    }
    header_.grid.n_time = get_le<std::uint64_t>(b.data() + 8);
    header_.grid.n_space = get_le<std::uint64_t>(b.data() + 16);
    header_.grid.horizon = get_le<double>(b.data() + 24);
    header_.params.theta0 = get_le<double>(b.data() + 32);
    header_.params.theta1 = get_le<double>(b.data() + 40);
    header_.params.theta2 = get_le<double>(b.data() + 48);
    header_.params.sigma = get_le<double>(b.data() + 56);
    header_.grid.n_modes = get_le<std::uint64_t>(b.data() + 64);
    header_.seed = get_le<std::uint64_t>(b.data() + 72);
    try {
        header_.grid.validate();
    } catch (const ValidationError& e) {
        throw IoError(path.string() + ": corrupt header: " + e.what());
    }

    const std::uintmax_t slice_bytes = 8u * header_.grid.n_space;
    const std::uintmax_t body = size - kFieldHeaderBytes;
    const std::uintmax_t full = body / slice_bytes;
    const std::uintmax_t expected = header_.grid.n_time + 1;
    if (body % slice_bytes != 0 && full < expected) {
        throw TruncatedBodyError(path.string() + ": body truncated in slice " + std::to_string(full),
                                 static_cast<std::size_t>(full));
    }
    if (full != expected || body % slice_bytes != 0) {
        throw SliceCountMismatchError(path.string() + ": header says " + std::to_string(expected) +
                                      " slices, body holds " + std::to_string(full) +
                                      (body % slice_bytes != 0 ? " plus trailing bytes" : ""));
    }
}

void FieldReader::read_all(const SliceSink& sink) {
    const std::size_t M = header_.grid.n_space;
    std::vector<char> raw(8 * M);
    std::vector<double> slice;
    in_.seekg(static_cast<std::streamoff>(kFieldHeaderBytes));
    for (std::size_t i = 0; i <= header_.grid.n_time; ++i) {
        in_.read(raw.data(), static_cast<std::streamsize>(raw.size()));
        if (in_.gcount() != static_cast<std::streamsize>(raw.size())) {
            throw TruncatedBodyError(path_.string() + ": body truncated in slice " + std::to_string(i), i);
        }
        decode_doubles(raw, slice);
        sink(i, slice);
    }
}

void write_field(const std::filesystem::path& path, const FieldDataset& field) {
    if (field.slices.size() != field.grid.n_time + 1) {
        throw ValidationError("write_field: dataset holds " + std::to_string(field.slices.size()) +
                              " slices, grid says " + std::to_string(field.grid.n_time + 1));
    }
    FieldWriter w(path, {field.grid, field.params, field.seed});
    for (std::size_t i = 0; i < field.slices.size(); ++i) {
        w.write_slice(i, field.slices[i]);
    }
    w.close();
}

FieldDataset read_field(const std::filesystem::path& path) {
    FieldReader r(path);
    FieldDataset d;
    d.grid = r.header().grid;
    d.params = r.header().params;
    d.seed = r.header().seed;
    d.slices.reserve(d.grid.n_time + 1);
    r.read_all([&](std::size_t, std::span<const double> s) { d.slices.emplace_back(s.begin(), s.end()); });
    return d;
}

FieldSummary simulate_to_file(const std::filesystem::path& path, const SpdeParams& params, const GridSpec& grid,
                              std::uint64_t seed) {
    FieldWriter w(path, {grid, params, seed});
    FieldSummary s = simulate_field(params, grid, seed, w.sink());
    w.close();
    return s;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

}  // namespace spde
