#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace fraclap {

// Problem description shared by every module: a uniform lattice {k/n : k in I_n^d}
// on the unit cube [0,1)^d and a fractional exponent s in (0,1].
struct ProblemParams {
    int dim = 1;
    std::int64_t n = 0; // lattice points per axis
    double s = 0.5;
};

inline void validate(const ProblemParams& p) {
    if (p.dim < 1 || p.dim > 3)
        throw config_error("dim must be 1, 2 or 3 (got " + std::to_string(p.dim) + ")");
    if (p.n < 2)
        throw config_error("n must be at least 2 (got " + std::to_string(p.n) + ")");
    if (!(p.s > 0.0) || p.s > 1.0)
        throw config_error("s must be in (0, 1] (got " + std::to_string(p.s) + ")");
}

inline std::int64_t grid_size(const ProblemParams& p) {
    std::int64_t m = 1;
    for (int a = 0; a < p.dim; ++a) m *= p.n;
    return m;
}

// Row-major linear index, axis 0 slowest. Same layout everywhere, including
// spectral buffers.
inline std::int64_t linear_index(int dim, std::int64_t side, const std::array<std::int64_t, 3>& k) {
    std::int64_t idx = 0;
    for (int a = 0; a < dim; ++a) {
        if (k[a] < 0 || k[a] >= side)
            throw shape_error("multi-index component out of range");
        idx = idx * side + k[a];
    }
    return idx;
}

inline std::array<std::int64_t, 3> multi_index(int dim, std::int64_t side, std::int64_t idx) {
    std::array<std::int64_t, 3> k{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
        k[a] = idx % side;
        idx /= side;
    }
    return k;
}

// Maps an unsigned DFT index in {0,...,m-1} to the signed range {-m/2,...,m/2-1}.
inline std::int64_t shift_to_signed(std::int64_t k, std::int64_t m) {
    return k < m / 2 ? k : k - m;
}

// Real-valued lattice function, values in row-major order.
struct GridFunction {
    ProblemParams params;
    std::vector<double> values;
};

inline GridFunction make_grid(const ProblemParams& p, double fill = 0.0) {
    validate(p);
    return GridFunction{p, std::vector<double>(static_cast<std::size_t>(grid_size(p)), fill)};
}

// Builds a grid function by evaluating f at the lattice points k/n.
template <class F>
GridFunction sample(const ProblemParams& p, F&& f) {
    GridFunction g = make_grid(p);
    const std::int64_t m = grid_size(p);
    std::array<std::int64_t, 3> k{0, 0, 0};
    std::array<double, 3> x{0, 0, 0};
    for (std::int64_t i = 0; i < m; ++i) {
        for (int a = 0; a < p.dim; ++a) x[a] = static_cast<double>(k[a]) / static_cast<double>(p.n);
        g.values[static_cast<std::size_t>(i)] = f(x);
        for (int a = p.dim - 1; a >= 0; --a) {
            if (++k[a] < p.n) break;
            k[a] = 0;
        }
    }
    return g;
}

inline void check_same_shape(const ProblemParams& a, const ProblemParams& b) {
    if (a.dim != b.dim || a.n != b.n)
        throw shape_error("grid shapes differ");
}

// Normalized discrete L2 norm, sqrt((1/n^d) sum u_k^2).
inline double norm_l2(const GridFunction& g) {
    double acc = 0.0;
    for (double v : g.values) acc += v * v;
    return std::sqrt(acc / static_cast<double>(g.values.size()));
}

inline double norm_linf(const GridFunction& g) {
    double m = 0.0;
    for (double v : g.values) m = std::max(m, std::abs(v));
    return m;
}

inline double mean(const GridFunction& g) {
    double acc = 0.0;
    for (double v : g.values) acc += v;
    return acc / static_cast<double>(g.values.size());
}

// Lattice subset playing the role of the domain; selected points carry degrees
// of freedom, everything else is fixed to zero.
struct DomainMask {
    ProblemParams params;
    std::vector<std::uint8_t> inside; // one byte per lattice point
    std::int64_t count = 0;           // number of selected points
};

inline DomainMask mask_cube(const ProblemParams& p) {
    validate(p);
    DomainMask m{p, std::vector<std::uint8_t>(static_cast<std::size_t>(grid_size(p)), 1), grid_size(p)};
    return m;
}

// Open ball, strict inequality |x - c| < r. The closed ball must fit in the cube.
inline DomainMask mask_disc(const ProblemParams& p, const std::array<double, 3>& center, double radius) {
    validate(p);
    if (!(radius > 0.0)) throw geometry_error("disc radius must be positive");
    for (int a = 0; a < p.dim; ++a) {
        if (center[a] - radius < 0.0 || center[a] + radius > 1.0)
            throw geometry_error("disc does not fit inside the unit cube");
    }
    DomainMask m{p, std::vector<std::uint8_t>(static_cast<std::size_t>(grid_size(p)), 0), 0};
    const std::int64_t total = grid_size(p);
    std::array<std::int64_t, 3> k{0, 0, 0};
    const double r2 = radius * radius;
    for (std::int64_t i = 0; i < total; ++i) {
        double d2 = 0.0;
        for (int a = 0; a < p.dim; ++a) {
            double t = static_cast<double>(k[a]) / static_cast<double>(p.n) - center[a];
            d2 += t * t;
        }
        if (d2 < r2) {
            m.inside[static_cast<std::size_t>(i)] = 1;
            ++m.count;
        }
        for (int a = p.dim - 1; a >= 0; --a) {
            if (++k[a] < p.n) break;
            k[a] = 0;
        }
    }
    return m;
}

// [0,1)^2 with the closed quadrant [1/2,1)^2 removed.
inline DomainMask mask_lshape(const ProblemParams& p) {
    validate(p);
    if (p.dim != 2) throw geometry_error("lshape domain is two-dimensional");
    DomainMask m{p, std::vector<std::uint8_t>(static_cast<std::size_t>(grid_size(p)), 1), 0};
    for (std::int64_t k0 = 0; k0 < p.n; ++k0) {
        for (std::int64_t k1 = 0; k1 < p.n; ++k1) {
            bool cut = (2 * k0 >= p.n) && (2 * k1 >= p.n);
            if (cut) m.inside[static_cast<std::size_t>(k0 * p.n + k1)] = 0;
        }
    }
    for (std::uint8_t b : m.inside) m.count += b;
    return m;
}

// Zeroes u outside the mask, in place.
inline void restrict_to_mask(const DomainMask& m, std::vector<double>& u) {
    if (u.size() != m.inside.size()) throw shape_error("mask/vector size mismatch");
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!m.inside[i]) u[i] = 0.0;
}

} // namespace fraclap
