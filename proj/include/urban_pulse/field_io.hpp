#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "density.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "mesh.hpp"

namespace urban_pulse {

// UPF1 layout, all integers and floats little-endian:
//   "UPF1" | u32 version | u64 config digest | u32 nx | u32 ny | f64 spacing
//   | u8 family | u8 aggregate | u16 part length | part bytes | u32 field count
//   then per field: u8 resolution | u16 step | f64 resolution_max
//                   | nx*ny f64 values (Sum) or nx*ny f64 sums + nx*ny f64 counts (Mean)
inline constexpr char kFieldMagic[4] = {'U', 'P', 'F', '1'};
inline constexpr std::uint32_t kFieldVersion = 1;

namespace detail {

class ByteWriter {
public:
    template <class T>
    void put(T value) {
        auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
        if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
        buffer_.insert(buffer_.end(), bits.begin(), bits.end());
    }
    void put_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        buffer_.insert(buffer_.end(), p, p + n);
    }
    void put_doubles(const std::vector<double>& values) {
        if constexpr (std::endian::native == std::endian::little) {
            put_bytes(values.data(), values.size() * sizeof(double));
        } else {
            for (double v : values) put(v);
        }
    }
    [[nodiscard]] const std::vector<unsigned char>& bytes() const noexcept { return buffer_; }

private:
    std::vector<unsigned char> buffer_;
};

class ByteReader {
public:
    explicit ByteReader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}

    template <class T>
    T get() {
        need(sizeof(T));
        std::array<unsigned char, sizeof(T)> bits;
        std::memcpy(bits.data(), bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
        pos_ += sizeof(T);
        return std::bit_cast<T>(bits);
    }
    std::string get_string(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void get_doubles(std::vector<double>& out, std::size_t n) {
        need(n * sizeof(double));
        out.resize(n);
        if constexpr (std::endian::native == std::endian::little) {
            std::memcpy(out.data(), bytes_.data() + pos_, n * sizeof(double));
            pos_ += n * sizeof(double);
        } else {
            for (double& v : out) v = get<double>();
        }
    }
    [[nodiscard]] bool at_end() const noexcept { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError("field file truncated");
    }
    std::vector<unsigned char> bytes_;
    std::size_t pos_ = 0;
};

inline std::vector<unsigned char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace detail

inline std::vector<unsigned char> encode_fields(const FieldCollection& c) {
    detail::ByteWriter w;
    w.put_bytes(kFieldMagic, 4);
    w.put(kFieldVersion);
    w.put(c.config_digest);
    w.put(static_cast<std::uint32_t>(c.nx));
    w.put(static_cast<std::uint32_t>(c.ny));
    w.put(c.spacing);
    w.put(static_cast<std::uint8_t>(c.scenario.family));
    w.put(static_cast<std::uint8_t>(c.aggregate));
    w.put(static_cast<std::uint16_t>(c.scenario.part.size()));
    w.put_bytes(c.scenario.part.data(), c.scenario.part.size());
    w.put(static_cast<std::uint32_t>(c.fields.size()));
    for (const ScalarField& f : c.fields) {
        w.put(static_cast<std::uint8_t>(f.resolution));
        w.put(static_cast<std::uint16_t>(f.step));
        w.put(f.resolution_max);
        if (c.aggregate == Aggregate::Mean) {
            w.put_doubles(f.sums);
            w.put_doubles(f.counts);
        } else {
            w.put_doubles(f.values);
        }
    }
    return w.bytes();
}

inline FieldCollection decode_fields(std::vector<unsigned char> bytes) {
    detail::ByteReader r(std::move(bytes));
    if (r.get_string(4) != std::string(kFieldMagic, 4)) throw FormatError("not a UPF1 field file (bad magic)");
    if (const auto version = r.get<std::uint32_t>(); version != kFieldVersion) {
        throw FormatError("unsupported field file version " + std::to_string(version));
    }
    FieldCollection c;
    c.config_digest = r.get<std::uint64_t>();
    c.nx = static_cast<int>(r.get<std::uint32_t>());
    c.ny = static_cast<int>(r.get<std::uint32_t>());
    c.spacing = r.get<double>();
    const auto family = r.get<std::uint8_t>();
    const auto aggregate = r.get<std::uint8_t>();
    if (family > 3 || aggregate > 1 || c.nx < 2 || c.ny < 2) throw FormatError("field file header corrupt");
    c.scenario.family = static_cast<ScenarioFamily>(family);
    c.aggregate = static_cast<Aggregate>(aggregate);
    c.scenario.part = r.get_string(r.get<std::uint16_t>());
    if (c.scenario.part_index() < 0) throw FormatError("field file names unknown part " + c.scenario.part);

    const auto count = r.get<std::uint32_t>();
    if (count != static_cast<std::uint32_t>(fields_per_part(c.scenario.family))) {
        throw FormatError("field file holds " + std::to_string(count) + " fields, scenario needs " +
                          std::to_string(fields_per_part(c.scenario.family)));
    }
    const std::size_t n = c.vertex_count();
    for (Resolution res : c.scenario.resolutions()) {
        for (int t = 0; t < step_count(res); ++t) {
            ScalarField f;
            const auto kind = r.get<std::uint8_t>();
            const auto step = r.get<std::uint16_t>();
            if (kind != static_cast<std::uint8_t>(res) || step != t) {
                throw FormatError("field file records out of order");
            }
            f.resolution = res;
            f.step = t;
            f.resolution_max = r.get<double>();
            if (c.aggregate == Aggregate::Mean) {
                r.get_doubles(f.sums, n);
                r.get_doubles(f.counts, n);
                f.values.resize(n);
                for (std::size_t v = 0; v < n; ++v) {
                    f.values[v] = f.counts[v] > 0.0 ? f.sums[v] / f.counts[v] : 0.0;
                }
            } else {
                r.get_doubles(f.values, n);
            }
            c.fields.push_back(std::move(f));
        }
    }
    if (!r.at_end()) throw FormatError("field file has trailing bytes");
    return c;
}

inline void write_fields(const FieldCollection& c, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto bytes = encode_fields(c);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

inline FieldCollection read_fields(const std::filesystem::path& path) {
    return decode_fields(detail::read_all(path));
}

/// Reads and checks that the file was computed on `mesh`.
inline FieldCollection read_fields(const std::filesystem::path& path, const Mesh& mesh) {
    FieldCollection c = read_fields(path);
    if (c.nx != mesh.nx() || c.ny != mesh.ny() || c.spacing != mesh.spacing()) {
        throw DimensionMismatch("field file " + path.string() + " is " + std::to_string(c.nx) + "x" +
                                std::to_string(c.ny) + ", mesh is " + std::to_string(mesh.nx()) + "x" +
                                std::to_string(mesh.ny()));
    }
    return c;
}

/// Fingerprint of a field file's bytes.
inline std::uint64_t file_digest(const std::filesystem::path& path) {
    const auto bytes = detail::read_all(path);
    Fnv1a h;
    h.update(std::as_bytes(std::span{bytes.data(), bytes.size()}));
    return h.value();
}

} // namespace urban_pulse
