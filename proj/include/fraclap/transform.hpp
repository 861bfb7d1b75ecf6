#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "config.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace fraclap {

// Complex spectral/physical workspace over a side^dim lattice, row-major,
// axis 0 slowest. The same layout is used before and after transforms.
struct SpectralBuffer {
    int dim = 1;
    std::int64_t side = 0;
    std::vector<std::complex<double>> values;
};

inline SpectralBuffer make_buffer(int dim, std::int64_t side) {
    if (dim < 1 || dim > 3) throw config_error("buffer dim must be 1, 2 or 3");
    if (side < 1) throw config_error("buffer side must be positive");
    std::int64_t m = 1;
    for (int a = 0; a < dim; ++a) m *= side;
    return SpectralBuffer{dim, side, std::vector<std::complex<double>>(static_cast<std::size_t>(m))};
}

namespace fft {

// FFTW planning is not thread-safe; executing distinct plans is. Plans are
// created once per geometry with FFTW_UNALIGNED so they can run on any buffer.
namespace detail {

inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanKey {
    int kind; // 0 c2c, 1 r2c, 2 c2r
    int dim;
    std::int64_t side;
    int sign;
    int nthreads;
    bool operator<(const PlanKey& o) const {
        return std::tie(kind, dim, side, sign, nthreads) < std::tie(o.kind, o.dim, o.side, o.sign, o.nthreads);
    }
};

inline void init_threads_once() {
#ifdef FRACLAP_FFTW_THREADS
    static const bool ok = fftw_init_threads() != 0;
    (void)ok;
#endif
}

inline fftw_plan get_plan(const PlanKey& key) {
    static std::map<PlanKey, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    init_threads_once();
#ifdef FRACLAP_FFTW_THREADS
    fftw_plan_with_nthreads(key.nthreads);
#endif
    int n[3] = {static_cast<int>(key.side), static_cast<int>(key.side), static_cast<int>(key.side)};
    std::int64_t m = 1;
    for (int a = 0; a < key.dim; ++a) m *= key.side;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (key.kind == 0) {
        fftw_complex* scratch = fftw_alloc_complex(static_cast<std::size_t>(m));
        plan = fftw_plan_dft(key.dim, n, scratch, scratch, key.sign, flags);
        fftw_free(scratch);
    } else {
        std::int64_t mc = m / key.side * (key.side / 2 + 1);
        double* re = fftw_alloc_real(static_cast<std::size_t>(m));
        fftw_complex* sp = fftw_alloc_complex(static_cast<std::size_t>(mc));
        if (key.kind == 1)
            plan = fftw_plan_dft_r2c(key.dim, n, re, sp, flags);
        else
            plan = fftw_plan_dft_c2r(key.dim, n, sp, re, flags);
        fftw_free(sp);
        fftw_free(re);
    }
    if (!plan) throw numerical_error("FFT planning failed");
    cache.emplace(key, plan);
    return plan;
}

} // namespace detail

// Unnormalized transform, in place: sign -1 forward, +1 backward.
inline void transform_c2c(std::complex<double>* data, int dim, std::int64_t side, int sign) {
    fftw_plan plan = detail::get_plan({0, dim, side, sign, thread_count()});
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data), reinterpret_cast<fftw_complex*>(data));
}

// Real input -> half spectrum (last axis 0..side/2), unnormalized.
inline void transform_r2c(double* in, std::complex<double>* out, int dim, std::int64_t side) {
    fftw_plan plan = detail::get_plan({1, dim, side, FFTW_FORWARD, thread_count()});
    fftw_execute_dft_r2c(plan, in, reinterpret_cast<fftw_complex*>(out));
}

// Half spectrum -> real output, unnormalized; the spectrum buffer is clobbered.
inline void transform_c2r(std::complex<double>* in, double* out, int dim, std::int64_t side) {
    fftw_plan plan = detail::get_plan({2, dim, side, FFTW_BACKWARD, thread_count()});
    fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(in), out);
}

inline std::int64_t half_spectrum_size(int dim, std::int64_t side) {
    std::int64_t m = 1;
    for (int a = 0; a < dim - 1; ++a) m *= side;
    return m * (side / 2 + 1);
}

} // namespace fft

// Forward DFT, unnormalized: x_hat_k = sum_j x_j exp(-2 pi i j.k / M).
inline SpectralBuffer dft_forward(SpectralBuffer b) {
    fft::transform_c2c(b.values.data(), b.dim, b.side, FFTW_FORWARD);
    return b;
}

// Inverse DFT with the 1/M^d factor, so dft_inverse(dft_forward(x)) == x.
inline SpectralBuffer dft_inverse(SpectralBuffer b) {
    fft::transform_c2c(b.values.data(), b.dim, b.side, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(b.values.size());
    for (auto& v : b.values) v *= scale;
    return b;
}

namespace detail {

// Copies u (n^d row-major) into a side^d buffer at a fixed offset per axis.
template <class Dst>
void place_block(const GridFunction& u, Dst* dst, std::int64_t side, std::int64_t offset) {
    const std::int64_t n = u.params.n;
    const int dim = u.params.dim;
    std::array<std::int64_t, 3> k{0, 0, 0};
    const std::int64_t total = grid_size(u.params);
    for (std::int64_t i = 0; i < total; ++i) {
        std::int64_t idx = 0;
        for (int a = 0; a < dim; ++a) idx = idx * side + (k[a] + offset);
        dst[idx] = u.values[static_cast<std::size_t>(i)];
        for (int a = dim - 1; a >= 0; --a) {
            if (++k[a] < n) break;
            k[a] = 0;
        }
    }
}

} // namespace detail

// Zero-padded embedding used by the convolution: u lands at k + n per axis in
// a (2n)^d buffer. crop_block(embed_padded(u)) is NOT u; the offset is paired
// with the kernel's alternating-sign spectral phase.
inline SpectralBuffer embed_padded(const GridFunction& u) {
    validate(u.params);
    SpectralBuffer b = make_buffer(u.params.dim, 2 * u.params.n);
    detail::place_block(u, b.values.data(), b.side, u.params.n);
    return b;
}

// Plain zero-extension to a dilation^d-times finer periodic box: u lands at
// the origin block of a (dilation*n)^d buffer.
inline SpectralBuffer zero_extend(const GridFunction& u, std::int64_t dilation) {
    validate(u.params);
    if (dilation < 1) throw config_error("dilation must be >= 1");
    SpectralBuffer b = make_buffer(u.params.dim, dilation * u.params.n);
    detail::place_block(u, b.values.data(), b.side, 0);
    return b;
}

// Real parts of the origin n^d block.
inline GridFunction crop_block(const SpectralBuffer& b, const ProblemParams& p) {
    validate(p);
    if (b.dim != p.dim || b.side < p.n) throw shape_error("buffer too small to crop");
    GridFunction g = make_grid(p);
    std::array<std::int64_t, 3> k{0, 0, 0};
    const std::int64_t total = grid_size(p);
    for (std::int64_t i = 0; i < total; ++i) {
        std::int64_t idx = 0;
        for (int a = 0; a < p.dim; ++a) idx = idx * b.side + k[a];
        g.values[static_cast<std::size_t>(i)] = b.values[static_cast<std::size_t>(idx)].real();
        for (int a = p.dim - 1; a >= 0; --a) {
            if (++k[a] < p.n) break;
            k[a] = 0;
        }
    }
    return g;
}

} // namespace fraclap
