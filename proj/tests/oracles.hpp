#pragma once

// Slow reference implementations for the tests. Nothing here shares code with
// the library: transforms are literal definition sums, the kernel spectrum
// comes straight from the quadrature formula without FFTs, and the pointwise
// fractional Laplacian is an adaptive quadrature of the singular integral.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

inline std::int64_t ipow(std::int64_t base, int e) {
    std::int64_t r = 1;
    while (e-- > 0) r *= base;
    return r;
}

inline std::array<std::int64_t, 3> unrank(std::int64_t i, int dim, std::int64_t side) {
    std::array<std::int64_t, 3> k{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
        k[a] = i % side;
        i /= side;
    }
    return k;
}

// literal DFT sum; sign -1 forward (unnormalized), +1 inverse (scaled by M^-d)
inline std::vector<cd> dft(const std::vector<cd>& in, int dim, std::int64_t side, int sign) {
    const std::int64_t total = ipow(side, dim);
    if (static_cast<std::int64_t>(in.size()) != total) throw std::runtime_error("oracle dft size");
    std::vector<cd> out(in.size());
    for (std::int64_t i = 0; i < total; ++i) {
        const auto k = unrank(i, dim, side);
        cd acc{0.0, 0.0};
        for (std::int64_t j = 0; j < total; ++j) {
            const auto q = unrank(j, dim, side);
            double phase = 0.0;
            for (int a = 0; a < dim; ++a) phase += static_cast<double>(k[a] * q[a]);
            phase *= 2.0 * M_PI * static_cast<double>(sign) / static_cast<double>(side);
            acc += in[static_cast<std::size_t>(j)] * cd{std::cos(phase), std::sin(phase)};
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    if (sign > 0)
        for (auto& v : out) v /= static_cast<double>(total);
    return out;
}

inline std::vector<cd> dft_forward(const std::vector<cd>& in, int dim, std::int64_t side) {
    return dft(in, dim, side, -1);
}
inline std::vector<cd> dft_inverse(const std::vector<cd>& in, int dim, std::int64_t side) {
    return dft(in, dim, side, +1);
}

// brute-force sum_{p=-n}^{n-1} exp(i p x), no closed form
inline cd dirichlet_sum_brute(double x, std::int64_t n) {
    cd acc{0.0, 0.0};
    for (std::int64_t p = -n; p < n; ++p) acc += cd{std::cos(p * x), std::sin(p * x)};
    return acc;
}

// Kernel spectrum straight from the quadrature definition: for each k,
//   phihat_k = pi^{2s} (2n)^{-d} (-1)^{k_1+...+k_d}
//              sum_i alpha_i sum_j |j - n 1 + x_i|^{2s} Y_d(-(pi/n)((k-j) - n 1 - x_i))
// where the inner sum is the circular convolution of the two factor sequences
// evaluated termwise. Cost (2n)^{2d} per node; keep n tiny.
inline std::vector<cd> kernel_spectrum(int dim, std::int64_t n, double s,
                                       const std::vector<double>& nodes,
                                       const std::vector<double>& weights) {
    const std::int64_t m = 2 * n;
    const std::int64_t total = ipow(m, dim);
    const std::int64_t nnodes = static_cast<std::int64_t>(weights.size());
    std::vector<cd> phihat(static_cast<std::size_t>(total), cd{0.0, 0.0});
    for (std::int64_t node = 0; node < nnodes; ++node) {
        const double* x = nodes.data() + node * dim;
        std::vector<double> c1(static_cast<std::size_t>(total));
        std::vector<cd> c2(static_cast<std::size_t>(total));
        for (std::int64_t j = 0; j < total; ++j) {
            const auto q = unrank(j, dim, m);
            double r2 = 0.0;
            cd y{1.0, 0.0};
            for (int a = 0; a < dim; ++a) {
                const double t = static_cast<double>(q[a] - n) + x[a];
                r2 += t * t;
                const double arg = -(M_PI / static_cast<double>(n)) *
                                   (static_cast<double>(q[a] - n) - x[a]);
                y *= dirichlet_sum_brute(arg, n);
            }
            c1[static_cast<std::size_t>(j)] = std::pow(r2, s);
            c2[static_cast<std::size_t>(j)] = y;
        }
        for (std::int64_t k = 0; k < total; ++k) {
            const auto kk = unrank(k, dim, m);
            cd conv{0.0, 0.0};
            for (std::int64_t j = 0; j < total; ++j) {
                const auto jj = unrank(j, dim, m);
                std::int64_t lag = 0;
                for (int a = 0; a < dim; ++a) lag = lag * m + ((kk[a] - jj[a]) % m + m) % m;
                conv += c1[static_cast<std::size_t>(j)] * c2[static_cast<std::size_t>(lag)];
            }
            phihat[static_cast<std::size_t>(k)] += weights[static_cast<std::size_t>(node)] * conv;
        }
    }
    const double pref = std::pow(M_PI, 2.0 * s) / static_cast<double>(total);
    for (std::int64_t k = 0; k < total; ++k) {
        const auto kk = unrank(k, dim, m);
        std::int64_t parity = 0;
        for (int a = 0; a < dim; ++a) parity += kk[a];
        phihat[static_cast<std::size_t>(k)] *= (parity % 2 == 0) ? pref : -pref;
    }
    return phihat;
}

// Direct convolution with the physical kernel at signed lags, the definition
// of the lattice operator. u lives on the n^dim grid, the kernel spectrum on
// the (2n)^dim grid.
inline std::vector<double> dense_apply(int dim, std::int64_t n, const std::vector<cd>& phihat,
                                       const std::vector<double>& u) {
    const std::int64_t m = 2 * n;
    std::vector<cd> lagc = dft_inverse(phihat, dim, m);
    const std::int64_t npts = ipow(n, dim);
    std::vector<double> out(static_cast<std::size_t>(npts), 0.0);
    for (std::int64_t i = 0; i < npts; ++i) {
        const auto k = unrank(i, dim, n);
        double acc = 0.0;
        for (std::int64_t j = 0; j < npts; ++j) {
            const auto q = unrank(j, dim, n);
            std::int64_t idx = 0;
            for (int a = 0; a < dim; ++a) idx = idx * m + (k[a] - q[a] + n);
            acc += lagc[static_cast<std::size_t>(idx)].real() * u[static_cast<std::size_t>(j)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

namespace detail {
template <class F>
double adaptive_simpson(F&& f, double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-10) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Pointwise fractional Laplacian of a one-dimensional function vanishing
// outside [support_lo, support_hi]:
//   C(1,s) * integral_0^inf (2u(x) - u(x+t) - u(x-t)) / t^{1+2s} dt.
// The [0, delta) piece uses the Taylor expansion of the symmetric difference,
// the far tail where both shifted arguments leave the support is analytic.
inline double fractional_laplacian_pointwise_1d(const std::function<double(double)>& u, double x,
                                                double s, double support_lo, double support_hi) {
    const double c = s * std::pow(4.0, s) * std::tgamma(0.5 + s) /
                     (std::sqrt(M_PI) * std::tgamma(1.0 - s));
    const double delta = 1e-4;
    const double h = 1e-3;
    // u'' and u'''' by central differences on the smooth closed form
    const double d2 = (-u(x - 2 * h) + 16 * u(x - h) - 30 * u(x) + 16 * u(x + h) - u(x + 2 * h)) /
                      (12 * h * h);
    const double d4 = (u(x - 2 * h) - 4 * u(x - h) + 6 * u(x) - 4 * u(x + h) + u(x + 2 * h)) /
                      (h * h * h * h);
    const double near = -d2 * std::pow(delta, 2.0 - 2.0 * s) / (2.0 - 2.0 * s) -
                        d4 / 12.0 * std::pow(delta, 4.0 - 2.0 * s) / (4.0 - 2.0 * s);
    const double tmax = std::max(std::abs(x - support_lo), std::abs(x - support_hi)) + 0.5;
    auto integrand = [&](double t) {
        return (2.0 * u(x) - u(x + t) - u(x - t)) / std::pow(t, 1.0 + 2.0 * s);
    };
    const double mid = integrate(integrand, delta, tmax, 1e-11);
    const double tail = 2.0 * u(x) / (2.0 * s * std::pow(tmax, 2.0 * s));
    return c * (near + mid + tail);
}

} // namespace oracle
