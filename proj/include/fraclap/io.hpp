#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace fraclap {
namespace detail {

// All binary formats are little-endian regardless of host order.

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(std::is_integral_v<T>);
    unsigned char b[sizeof(T)];
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xffu);
    put_bytes(os, b, sizeof(T));
}

inline void put_f64(std::ostream& os, double v) {
    put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
}

template <class T>
T get_le(std::istream& is) {
    static_assert(std::is_integral_v<T>);
    unsigned char b[sizeof(T)];
    is.read(reinterpret_cast<char*>(b), sizeof(T));
    if (!is) throw format_error("unexpected end of file");
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(b[i]) << (8 * i);
    return static_cast<T>(u);
}

inline double get_f64(std::istream& is) {
    return std::bit_cast<double>(get_le<std::uint64_t>(is));
}

inline void put_magic(std::ostream& os, const char (&magic)[9]) {
    put_bytes(os, magic, 8);
}

inline void check_magic(std::istream& is, const char (&magic)[9], const char* what) {
    char got[8];
    is.read(got, 8);
    if (!is || std::memcmp(got, magic, 8) != 0)
        throw format_error(std::string("bad magic, not a ") + what + " file");
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw format_error("cannot open for writing: " + path.string());
    return os;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw format_error("cannot open for reading: " + path.string());
    return is;
}

} // namespace detail

inline constexpr char grid_magic[9] = "FLGRID01";
inline constexpr char mask_magic[9] = "FLMASK01";

// Grid dump: magic, u32 version, u32 dim, u64 n, n^dim f64 values, row-major.
inline void save_grid(const GridFunction& g, const std::filesystem::path& path) {
    validate(g.params);
    auto os = detail::open_out(path);
    detail::put_magic(os, grid_magic);
    detail::put_le<std::uint32_t>(os, 1);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.params.dim));
    detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(g.params.n));
    for (double v : g.values) detail::put_f64(os, v);
    if (!os) throw format_error("write failed: " + path.string());
}

// s is not stored in grid files; the caller supplies it (defaults to 0.5).
inline GridFunction load_grid(const std::filesystem::path& path, double s = 0.5) {
    auto is = detail::open_in(path);
    detail::check_magic(is, grid_magic, "grid");
    std::uint32_t version = detail::get_le<std::uint32_t>(is);
    if (version != 1) throw format_error("unsupported grid file version");
    ProblemParams p;
    p.dim = static_cast<int>(detail::get_le<std::uint32_t>(is));
    p.n = static_cast<std::int64_t>(detail::get_le<std::uint64_t>(is));
    p.s = s;
    validate(p);
    GridFunction g = make_grid(p);
    for (double& v : g.values) v = detail::get_f64(is);
    return g;
}

// Mask raster: magic, u32 dim, u64 n, n^dim bytes (0 or 1), row-major.
inline void save_mask(const DomainMask& m, const std::filesystem::path& path) {
    validate(m.params);
    auto os = detail::open_out(path);
    detail::put_magic(os, mask_magic);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.params.dim));
    detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(m.params.n));
    detail::put_bytes(os, m.inside.data(), m.inside.size());
    if (!os) throw format_error("write failed: " + path.string());
}

inline DomainMask load_mask(const ProblemParams& expect, const std::filesystem::path& path) {
    auto is = detail::open_in(path);
    detail::check_magic(is, mask_magic, "mask");
    int dim = static_cast<int>(detail::get_le<std::uint32_t>(is));
    std::int64_t n = static_cast<std::int64_t>(detail::get_le<std::uint64_t>(is));
    if (dim != expect.dim || n != expect.n)
        throw format_error("mask shape does not match the problem (" + std::to_string(dim) + "d, n=" + std::to_string(n) + ")");
    DomainMask m{expect, std::vector<std::uint8_t>(static_cast<std::size_t>(grid_size(expect))), 0};
    is.read(reinterpret_cast<char*>(m.inside.data()), static_cast<std::streamsize>(m.inside.size()));
    if (!is) throw format_error("unexpected end of mask file");
    for (std::uint8_t& b : m.inside) {
        if (b > 1) throw format_error("mask bytes must be 0 or 1");
        m.count += b;
    }
    return m;
}

// 8-bit binary PGM (P5), square with power-of-two side; pixels map to [0,1].
inline GridFunction load_pgm(const std::filesystem::path& path, double s = 0.5) {
    auto is = detail::open_in(path);
    std::string magic;
    is >> magic;
    if (magic != "P5") throw format_error("expected a binary P5 PGM file");
    auto next_token = [&is]() {
        std::string tok;
        for (;;) {
            if (!(is >> tok)) throw format_error("truncated PGM header");
            if (tok[0] == '#') {
                std::string rest;
                std::getline(is, rest);
                continue;
            }
            return tok;
        }
    };
    auto parse_long = [](const std::string& tok) {
        try {
            std::size_t used = 0;
            long v = std::stol(tok, &used);
            if (used != tok.size()) throw format_error("bad PGM header field: " + tok);
            return v;
        } catch (const format_error&) {
            throw;
        } catch (const std::exception&) {
            throw format_error("bad PGM header field: " + tok);
        }
    };
    long w = parse_long(next_token());
    long h = parse_long(next_token());
    long maxv = parse_long(next_token());
    is.get(); // single whitespace after maxval
    if (w != h) throw format_error("image must be square");
    if (w < 2 || (w & (w - 1)) != 0) throw format_error("image side must be a power of two");
    if (maxv != 255) throw format_error("only 8-bit PGM supported");
    ProblemParams p{2, w, s};
    GridFunction g = make_grid(p);
    std::vector<unsigned char> row(static_cast<std::size_t>(w));
    for (long r = 0; r < h; ++r) {
        is.read(reinterpret_cast<char*>(row.data()), w);
        if (!is) throw format_error("truncated PGM pixel data");
        for (long c = 0; c < w; ++c)
            g.values[static_cast<std::size_t>(r * w + c)] = static_cast<double>(row[static_cast<std::size_t>(c)]) / 255.0;
    }
    return g;
}

inline void save_pgm(const GridFunction& g, const std::filesystem::path& path) {
    if (g.params.dim != 2) throw format_error("PGM output needs a 2-d grid");
    auto os = detail::open_out(path);
    os << "P5\n" << g.params.n << " " << g.params.n << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(g.params.n));
    for (std::int64_t r = 0; r < g.params.n; ++r) {
        for (std::int64_t c = 0; c < g.params.n; ++c) {
            double v = g.values[static_cast<std::size_t>(r * g.params.n + c)];
            v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); // clamp at output only
            row[static_cast<std::size_t>(c)] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        detail::put_bytes(os, row.data(), row.size());
    }
    if (!os) throw format_error("write failed: " + path.string());
}

} // namespace fraclap
