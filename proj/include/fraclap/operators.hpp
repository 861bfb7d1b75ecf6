#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <vector>

#include "grid.hpp"
#include "kernel.hpp"
#include "transform.hpp"

namespace fraclap {

// Plain composition of the public transform pieces: embed at offset n,
// forward DFT, multiply by Phi_hat, inverse DFT, crop real parts. Kept as the
// readable reference; OperatorHandle computes the same thing faster.
inline GridFunction apply_with_full_transforms(const ConvolutionKernel& kernel, const GridFunction& u) {
    check_same_shape(kernel.params, u.params);
    SpectralBuffer b = dft_forward(embed_padded(u));
    for (std::size_t i = 0; i < b.values.size(); ++i) b.values[i] *= kernel.phi_hat[i];
    return crop_block(dft_inverse(std::move(b)), u.params);
}

// Repeated application of one assembled kernel. Phi_hat is real up to
// rounding, and the lattice input is real, so the convolution runs through
// half-spectrum transforms on preallocated workspace; no allocation per apply.
class OperatorHandle {
  public:
    explicit OperatorHandle(ConvolutionKernel kernel) : kernel_(std::move(kernel)) {
        validate(kernel_.params);
        const std::int64_t m = 2 * kernel_.params.n;
        const int dim = kernel_.params.dim;
        total_ = 1;
        for (int a = 0; a < dim; ++a) total_ *= m;
        rows_ = total_ / m;
        hside_ = m / 2 + 1;
        real_.resize(static_cast<std::size_t>(total_));
        half_.resize(static_cast<std::size_t>(rows_ * hside_));
        multiplier_.resize(static_cast<std::size_t>(rows_ * hside_));
        for (std::int64_t row = 0; row < rows_; ++row)
            for (std::int64_t l = 0; l < hside_; ++l)
                multiplier_[static_cast<std::size_t>(row * hside_ + l)] =
                    kernel_.phi_hat[static_cast<std::size_t>(row * m + l)].real();
    }

    const ConvolutionKernel& kernel() const { return kernel_; }
    const ProblemParams& params() const { return kernel_.params; }

    // out = (lattice fractional Laplacian) u on the full cube
    void apply(const std::vector<double>& in, std::vector<double>& out) {
        const std::int64_t npts = grid_size(kernel_.params);
        if (static_cast<std::int64_t>(in.size()) != npts) throw shape_error("apply: input size mismatch");
        out.resize(static_cast<std::size_t>(npts));
        const std::int64_t n = kernel_.params.n;
        const std::int64_t m = 2 * n;
        const int dim = kernel_.params.dim;
        std::memset(real_.data(), 0, real_.size() * sizeof(double));
        {
            std::array<std::int64_t, 3> k{0, 0, 0};
            for (std::int64_t i = 0; i < npts; ++i) {
                std::int64_t idx = 0;
                for (int a = 0; a < dim; ++a) idx = idx * m + (k[a] + n);
                real_[static_cast<std::size_t>(idx)] = in[static_cast<std::size_t>(i)];
                for (int a = dim - 1; a >= 0; --a) {
                    if (++k[a] < n) break;
                    k[a] = 0;
                }
            }
        }
        fft::transform_r2c(real_.data(), half_.data(), dim, m);
        for (std::size_t i = 0; i < half_.size(); ++i) half_[i] *= multiplier_[i];
        fft::transform_c2r(half_.data(), real_.data(), dim, m);
        const double scale = 1.0 / static_cast<double>(total_);
        {
            std::array<std::int64_t, 3> k{0, 0, 0};
            for (std::int64_t i = 0; i < npts; ++i) {
                std::int64_t idx = 0;
                for (int a = 0; a < dim; ++a) idx = idx * m + k[a];
                out[static_cast<std::size_t>(i)] = real_[static_cast<std::size_t>(idx)] * scale;
                for (int a = dim - 1; a >= 0; --a) {
                    if (++k[a] < n) break;
                    k[a] = 0;
                }
            }
        }
    }

    GridFunction apply(const GridFunction& u) {
        check_same_shape(kernel_.params, u.params);
        GridFunction out = make_grid(u.params);
        apply(u.values, out.values);
        return out;
    }

    // out = S_mask A S_mask^T in, on full-grid vectors whose exterior entries
    // stay exactly zero.
    void apply_masked(const DomainMask& mask, const std::vector<double>& in, std::vector<double>& out) {
        check_same_shape(kernel_.params, mask.params);
        masked_in_ = in;
        restrict_to_mask(mask, masked_in_);
        apply(masked_in_, out);
        for (std::size_t i = 0; i < out.size(); ++i)
            if (!mask.inside[i]) out[i] = 0.0;
    }

  private:
    ConvolutionKernel kernel_;
    std::int64_t total_ = 0, rows_ = 0, hside_ = 0;
    std::vector<double> real_;
    std::vector<std::complex<double>> half_;
    std::vector<double> multiplier_;
    std::vector<double> masked_in_;
};

// Periodic fractional Laplacian on the dilation^d-times enlarged box: zero
// extension, DFT multipliers |2 pi k|^{2s}, restriction to the original
// block. Comparisons against the lattice operator need the caller to scale
// the result by dilation^{-2s}.
inline GridFunction apply_scaled_periodic(const GridFunction& u, std::int64_t dilation, bool allow_large = false) {
    validate(u.params);
    if (dilation < 1) throw config_error("dilation must be >= 1");
    if (!allow_large) {
        const std::int64_t cap = u.params.dim == 3 ? 16 : 64;
        if (dilation > cap)
            throw config_error("dilation " + std::to_string(dilation) + " exceeds the default cap of " +
                               std::to_string(cap) + " for dim " + std::to_string(u.params.dim));
    }
    const std::int64_t n = u.params.n;
    const std::int64_t m = dilation * n;
    const int dim = u.params.dim;
    std::int64_t total = 1;
    for (int a = 0; a < dim; ++a) total *= m;
    const std::int64_t rows = total / m;
    const std::int64_t hside = m / 2 + 1;

    std::vector<double> real(static_cast<std::size_t>(total), 0.0);
    {
        std::array<std::int64_t, 3> k{0, 0, 0};
        const std::int64_t npts = grid_size(u.params);
        for (std::int64_t i = 0; i < npts; ++i) {
            std::int64_t idx = 0;
            for (int a = 0; a < dim; ++a) idx = idx * m + k[a];
            real[static_cast<std::size_t>(idx)] = u.values[static_cast<std::size_t>(i)];
            for (int a = dim - 1; a >= 0; --a) {
                if (++k[a] < n) break;
                k[a] = 0;
            }
        }
    }
    std::vector<std::complex<double>> half(static_cast<std::size_t>(rows * hside));
    fft::transform_r2c(real.data(), half.data(), dim, m);
    {
        const double fourpi2 = 4.0 * M_PI * M_PI;
        const double s = u.params.s;
        std::array<std::int64_t, 3> k{0, 0, 0}; // leading dim-1 axes
        for (std::int64_t row = 0; row < rows; ++row) {
            double outer = 0.0;
            for (int a = 0; a < dim - 1; ++a) {
                double t = static_cast<double>(shift_to_signed(k[a], m));
                outer += t * t;
            }
            std::complex<double>* dst = half.data() + row * hside;
            for (std::int64_t l = 0; l < hside; ++l) {
                double r2 = outer + static_cast<double>(l) * static_cast<double>(l);
                dst[l] *= r2 == 0.0 ? 0.0 : std::pow(fourpi2 * r2, s);
            }
            for (int a = dim - 2; a >= 0; --a) {
                if (++k[a] < m) break;
                k[a] = 0;
            }
        }
    }
    fft::transform_c2r(half.data(), real.data(), dim, m);
    GridFunction out = make_grid(u.params);
    const double scale = 1.0 / static_cast<double>(total);
    {
        std::array<std::int64_t, 3> k{0, 0, 0};
        const std::int64_t npts = grid_size(u.params);
        for (std::int64_t i = 0; i < npts; ++i) {
            std::int64_t idx = 0;
            for (int a = 0; a < dim; ++a) idx = idx * m + k[a];
            out.values[static_cast<std::size_t>(i)] = real[static_cast<std::size_t>(idx)] * scale;
            for (int a = dim - 1; a >= 0; --a) {
                if (++k[a] < n) break;
                k[a] = 0;
            }
        }
    }
    return out;
}

// Physical-space kernel lags: entry at multi-index m holds the lag m - n*1,
// so lags cover {-n, ..., n-1} per axis and lag 0 sits at index n*1.
inline std::vector<double> kernel_values(const ConvolutionKernel& kernel) {
    std::vector<std::complex<double>> work = kernel.phi_hat;
    const std::int64_t m = 2 * kernel.params.n;
    fft::transform_c2c(work.data(), kernel.params.dim, m, FFTW_BACKWARD);
    std::vector<double> out(work.size());
    const double scale = 1.0 / static_cast<double>(work.size());
    for (std::size_t i = 0; i < work.size(); ++i) out[i] = work[i].real() * scale;
    return out;
}

// Value at a signed lag vector, each component in [-n, n-1].
inline double kernel_value_at(const ConvolutionKernel& kernel, const std::vector<double>& lags,
                              const std::array<std::int64_t, 3>& lag) {
    if (lags.size() != kernel.phi_hat.size()) throw shape_error("lag table does not match the kernel");
    const std::int64_t n = kernel.params.n;
    const std::int64_t m = 2 * n;
    std::int64_t idx = 0;
    for (int a = 0; a < kernel.params.dim; ++a) {
        if (lag[a] < -n || lag[a] >= n) throw shape_error("kernel lag out of range");
        idx = idx * m + (lag[a] + n);
    }
    return lags[static_cast<std::size_t>(idx)];
}

} // namespace fraclap
