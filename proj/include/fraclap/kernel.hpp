#pragma once

#include <cmath>
#include <complex>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <thread>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "quadrature.hpp"
#include "transform.hpp"

namespace fraclap {

// sum_{m=-n}^{n-1} exp(i m x): an asymmetric Dirichlet kernel. Stable closed
// form sin(n r)/sin(r/2) * exp(-i r/2) with r = x reduced mod 2 pi; the
// removable singularity is taken over below |r| < 1e-9, where the value is 2n.
inline std::complex<double> dirichlet_sum(double x, std::int64_t n) {
    const double r = std::remainder(x, 2.0 * M_PI);
    if (std::abs(r) < 1e-9) return {2.0 * static_cast<double>(n), 0.0};
    const double amp = std::sin(static_cast<double>(n) * r) / std::sin(0.5 * r);
    return {amp * std::cos(0.5 * r), -amp * std::sin(0.5 * r)};
}

// Spectral coefficients Phi_hat of the lattice convolution kernel, stored on
// the (2n)^dim grid, row-major. The alternating-sign phase baked into Phi_hat
// pairs with the embed_padded offset; apply them together or not at all.
struct ConvolutionKernel {
    ProblemParams params;
    RuleKind rule_kind = RuleKind::gauss_legendre;
    int rule_points = 7;
    std::vector<std::complex<double>> phi_hat;
};

namespace detail {

// Runs compute(node) on `workers` threads and hands results to consume(node,...)
// strictly in node order, so the accumulated sum is bit-identical no matter
// how many workers run.
template <class Compute, class Consume>
void ordered_node_sweep(std::int64_t nodes, int workers, Compute&& compute, Consume&& consume) {
    if (workers <= 1 || nodes <= 1) {
        for (std::int64_t i = 0; i < nodes; ++i) consume(i, compute(i));
        return;
    }
    workers = static_cast<int>(std::min<std::int64_t>(workers, nodes));
    std::mutex mu;
    std::condition_variable cv_produce, cv_consume;
    std::int64_t next_claim = 0;
    std::int64_t next_consume = 0;
    const int max_pending = workers + 1;
    std::deque<std::pair<std::int64_t, decltype(compute(std::int64_t{}))>> ready;
    std::exception_ptr failure;

    auto worker = [&]() {
        for (;;) {
            std::int64_t mine;
            {
                std::lock_guard<std::mutex> lk(mu);
                if (failure || next_claim >= nodes) return;
                mine = next_claim++;
            }
            try {
                auto result = compute(mine);
                std::unique_lock<std::mutex> lk(mu);
                cv_produce.wait(lk, [&] { return failure || static_cast<int>(ready.size()) < max_pending; });
                if (failure) return;
                ready.emplace_back(mine, std::move(result));
                cv_consume.notify_all();
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!failure) failure = std::current_exception();
                cv_consume.notify_all();
                cv_produce.notify_all();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    while (next_consume < nodes) {
        std::unique_lock<std::mutex> lk(mu);
        cv_consume.wait(lk, [&] {
            if (failure) return true;
            for (auto& item : ready)
                if (item.first == next_consume) return true;
            return false;
        });
        if (failure) break;
        for (auto it = ready.begin(); it != ready.end(); ++it) {
            if (it->first == next_consume) {
                auto payload = std::move(it->second);
                ready.erase(it);
                lk.unlock();
                cv_produce.notify_all();
                consume(next_consume, std::move(payload));
                ++next_consume;
                break;
            }
        }
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace detail

// Assembles Phi_hat by quadrature over the unit cell. Per node x_i the
// spectrum of |j - n + x_i|^{2s} is taken by FFT; the matching Dirichlet-sum
// factor has a closed-form spectrum (it is itself a finite Fourier sum), so
// products are accumulated spectrally, node by node in a fixed order, and a
// single inverse FFT finishes the job.
inline ConvolutionKernel build_kernel(const ProblemParams& p, const QuadratureRule& rule) {
    validate(p);
    if (rule.dim != p.dim) throw config_error("quadrature rule dimension mismatch");
    const std::int64_t n = p.n;
    const std::int64_t m = 2 * n;          // transform side
    const int dim = p.dim;
    std::int64_t total = 1;
    for (int a = 0; a < dim; ++a) total *= m;
    const std::int64_t rows = total / m;   // product of the leading dim-1 axes
    const std::int64_t hside = m / 2 + 1;  // half-spectrum extent of the last axis
    const std::int64_t nnodes = static_cast<std::int64_t>(rule.weights.size());

    std::vector<std::complex<double>> acc(static_cast<std::size_t>(total), {0.0, 0.0});

    struct NodeProduct {
        std::vector<std::complex<double>> values;
    };

    auto compute = [&](std::int64_t node) {
        const double* x = rule.nodes.data() + node * dim;

        // c1[j] = |j - n*1 + x|^{2s}, real
        std::vector<double> c1(static_cast<std::size_t>(total));
        std::vector<std::vector<double>> sq(static_cast<std::size_t>(dim));
        for (int a = 0; a < dim; ++a) {
            sq[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(m));
            for (std::int64_t j = 0; j < m; ++j) {
                double t = static_cast<double>(j - n) + x[a];
                sq[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] = t * t;
            }
        }
        {
            const double s = p.s;
            const bool s_is_one = (s == 1.0);
            std::array<std::int64_t, 3> j{0, 0, 0};
            const double* sql = sq[static_cast<std::size_t>(dim - 1)].data();
            for (std::int64_t row = 0; row < rows; ++row) {
                double partial = 0.0;
                for (int a = 0; a < dim - 1; ++a) partial += sq[static_cast<std::size_t>(a)][static_cast<std::size_t>(j[a])];
                double* out = c1.data() + row * m;
                if (s_is_one) {
                    for (std::int64_t l = 0; l < m; ++l) out[l] = partial + sql[l];
                } else {
                    for (std::int64_t l = 0; l < m; ++l) out[l] = std::pow(partial + sql[l], s);
                }
                for (int a = dim - 2; a >= 0; --a) {
                    if (++j[a] < m) break;
                    j[a] = 0;
                }
            }
        }

        // half spectrum of c1, then expansion to the full grid by Hermitian symmetry
        std::vector<std::complex<double>> half(static_cast<std::size_t>(rows * hside));
        fft::transform_r2c(c1.data(), half.data(), dim, m);
        c1.clear();
        c1.shrink_to_fit();

        NodeProduct out;
        out.values.resize(static_cast<std::size_t>(total));
        std::complex<double>* full = out.values.data();
        {
            std::array<std::int64_t, 3> k{0, 0, 0}; // leading dim-1 axes
            for (std::int64_t row = 0; row < rows; ++row) {
                std::int64_t mrow = 0; // row index of the mirrored outer indices
                for (int a = 0; a < dim - 1; ++a) mrow = mrow * m + ((m - k[a]) % m);
                const std::complex<double>* src = half.data() + row * hside;
                const std::complex<double>* msrc = half.data() + mrow * hside;
                std::complex<double>* dst = full + row * m;
                for (std::int64_t l = 0; l <= m / 2; ++l) dst[l] = src[l];
                for (std::int64_t l = m / 2 + 1; l < m; ++l) dst[l] = std::conj(msrc[m - l]);
                for (int a = dim - 2; a >= 0; --a) {
                    if (++k[a] < m) break;
                    k[a] = 0;
                }
            }
        }

        // multiply by the closed-form spectrum of c2[j] = Y_d(-(pi/n)(j - n*1 - x)):
        // C2[k] = prod_a m * (-1)^{k_a} * exp(i pi m*(k_a) x_a / n), m*(k) = -k wrapped
        // into [-n, n-1].
        std::vector<std::vector<std::complex<double>>> tab(static_cast<std::size_t>(dim));
        for (int a = 0; a < dim; ++a) {
            auto& t = tab[static_cast<std::size_t>(a)];
            t.resize(static_cast<std::size_t>(m));
            for (std::int64_t k = 0; k < m; ++k) {
                std::int64_t mstar = k <= n ? -k : m - k;
                double ang = M_PI * static_cast<double>(mstar) * x[a] / static_cast<double>(n);
                double sign = (k % 2 == 0) ? 1.0 : -1.0;
                t[static_cast<std::size_t>(k)] = std::complex<double>(std::cos(ang), std::sin(ang)) *
                                                 (sign * static_cast<double>(m));
            }
        }
        {
            std::array<std::int64_t, 3> k{0, 0, 0};
            const std::complex<double>* tl = tab[static_cast<std::size_t>(dim - 1)].data();
            for (std::int64_t row = 0; row < rows; ++row) {
                std::complex<double> outer{1.0, 0.0};
                for (int a = 0; a < dim - 1; ++a) outer *= tab[static_cast<std::size_t>(a)][static_cast<std::size_t>(k[a])];
                std::complex<double>* dst = full + row * m;
                for (std::int64_t l = 0; l < m; ++l) dst[l] *= outer * tl[l];
                for (int a = dim - 2; a >= 0; --a) {
                    if (++k[a] < m) break;
                    k[a] = 0;
                }
            }
        }
        return out;
    };

    const double* weights = rule.weights.data();
    detail::ordered_node_sweep(nnodes, thread_count(), compute, [&](std::int64_t node, NodeProduct prod) {
        const double alpha = weights[node];
        const std::complex<double>* src = prod.values.data();
        for (std::int64_t i = 0; i < total; ++i) acc[static_cast<std::size_t>(i)] += alpha * src[i];
    });

    // one inverse transform for the whole quadrature sum, then the scalar
    // prefactor pi^{2s} (2n)^{-d} and the alternating-sign phase
    fft::transform_c2c(acc.data(), dim, m, FFTW_BACKWARD);
    const double pref = std::pow(M_PI, 2.0 * p.s) / (static_cast<double>(total) * static_cast<double>(total));
    {
        std::array<std::int64_t, 3> k{0, 0, 0};
        for (std::int64_t i = 0; i < total; ++i) {
            std::int64_t parity = 0;
            for (int a = 0; a < dim; ++a) parity += k[a];
            const double sign = (parity % 2 == 0) ? pref : -pref;
            acc[static_cast<std::size_t>(i)] *= sign;
            for (int a = dim - 1; a >= 0; --a) {
                if (++k[a] < m) break;
                k[a] = 0;
            }
        }
    }
    return ConvolutionKernel{p, rule.kind, rule.points_per_axis, std::move(acc)};
}

inline ConvolutionKernel build_kernel(const ProblemParams& p) {
    return build_kernel(p, default_rule(p.dim));
}

// DFT multipliers |2 pi k|^{2s} of the periodic operator on the dilated
// (dilation*n)^dim grid, indices wrapped to the symmetric range.
inline std::vector<double> periodic_symbol(const ProblemParams& p, std::int64_t dilation) {
    validate(p);
    if (dilation < 1) throw config_error("dilation must be >= 1");
    const std::int64_t m = dilation * p.n;
    const int dim = p.dim;
    std::int64_t total = 1;
    for (int a = 0; a < dim; ++a) total *= m;
    std::vector<double> sym(static_cast<std::size_t>(total));
    const double fourpi2 = 4.0 * M_PI * M_PI;
    std::array<std::int64_t, 3> k{0, 0, 0};
    for (std::int64_t i = 0; i < total; ++i) {
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            double t = static_cast<double>(shift_to_signed(k[a], m));
            r2 += t * t;
        }
        sym[static_cast<std::size_t>(i)] = r2 == 0.0 ? 0.0 : std::pow(fourpi2 * r2, p.s);
        for (int a = dim - 1; a >= 0; --a) {
            if (++k[a] < m) break;
            k[a] = 0;
        }
    }
    return sym;
}

// Normalization constant of the pointwise singular-integral definition,
// 4^s Gamma(d/2+s) s / (pi^{d/2} Gamma(1-s)); defined for s < 1.
inline double integral_definition_constant(int dim, double s) {
    if (!(s > 0.0) || !(s < 1.0)) throw config_error("integral constant needs 0 < s < 1");
    return s * std::pow(4.0, s) * std::tgamma(0.5 * dim + s) /
           (std::pow(M_PI, 0.5 * dim) * std::tgamma(1.0 - s));
}

// Closed-form solution constant for unit right-hand side on a ball:
// Gamma(d/2) / (4^s Gamma(d/2+s) Gamma(1+s)).
inline double unit_ball_solution_constant(int dim, double s) {
    if (!(s > 0.0) || s > 1.0) throw config_error("ball constant needs 0 < s <= 1");
    return std::tgamma(0.5 * dim) /
           (std::pow(4.0, s) * std::tgamma(0.5 * dim + s) * std::tgamma(1.0 + s));
}

inline constexpr char kernel_magic[9] = "FLKERN01";

// Cache file: magic, u32 version, u32 dim, u64 n, f64 s, u8 rule kind
// (0 uniform, 1 Gauss), u32 points per axis, then (2n)^dim interleaved
// (re, im) f64 pairs, row-major, little-endian.
inline void save_kernel(const ConvolutionKernel& k, const std::filesystem::path& path) {
    validate(k.params);
    auto os = detail::open_out(path);
    detail::put_magic(os, kernel_magic);
    detail::put_le<std::uint32_t>(os, 1);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(k.params.dim));
    detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(k.params.n));
    detail::put_f64(os, k.params.s);
    detail::put_le<std::uint8_t>(os, k.rule_kind == RuleKind::uniform ? 0 : 1);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(k.rule_points));
    for (const auto& v : k.phi_hat) {
        detail::put_f64(os, v.real());
        detail::put_f64(os, v.imag());
    }
    if (!os) throw format_error("write failed: " + path.string());
}

inline ConvolutionKernel load_kernel(const std::filesystem::path& path) {
    auto is = detail::open_in(path);
    detail::check_magic(is, kernel_magic, "kernel cache");
    std::uint32_t version = detail::get_le<std::uint32_t>(is);
    if (version != 1) throw format_error("unsupported kernel cache version");
    ConvolutionKernel k;
    k.params.dim = static_cast<int>(detail::get_le<std::uint32_t>(is));
    k.params.n = static_cast<std::int64_t>(detail::get_le<std::uint64_t>(is));
    k.params.s = detail::get_f64(is);
    std::uint8_t kind = detail::get_le<std::uint8_t>(is);
    if (kind > 1) throw format_error("bad quadrature kind in kernel cache");
    k.rule_kind = kind == 0 ? RuleKind::uniform : RuleKind::gauss_legendre;
    k.rule_points = static_cast<int>(detail::get_le<std::uint32_t>(is));
    try {
        validate(k.params);
    } catch (const config_error& e) {
        throw format_error(std::string("kernel cache header invalid: ") + e.what());
    }
    if (k.rule_points < 1) throw format_error("bad quadrature size in kernel cache");
    std::int64_t total = 1;
    for (int a = 0; a < k.params.dim; ++a) total *= 2 * k.params.n;
    k.phi_hat.resize(static_cast<std::size_t>(total));
    for (auto& v : k.phi_hat) {
        double re = detail::get_f64(is);
        double im = detail::get_f64(is);
        v = {re, im};
    }
    return k;
}

} // namespace fraclap
