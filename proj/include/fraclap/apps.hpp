#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "grid.hpp"
#include "kernel.hpp"
#include "operators.hpp"
#include "solver.hpp"

namespace fraclap {

enum class Backend { dirichlet, periodic };

// Derivative of the double well W(u) = u^2 (1-u)^2 / 4, roots at 0, 1/2, 1.
inline double double_well_derivative(double u) {
    return 0.5 * u * (u - 1.0) * (2.0 * u - 1.0);
}

// Smooth bump supported on the open ball, peak value exp(-1) at the center.
inline GridFunction bump(const ProblemParams& p, const std::array<double, 3>& center, double radius) {
    validate(p);
    if (!(radius > 0.0)) throw config_error("bump radius must be positive");
    const double inv_r2 = 1.0 / (radius * radius);
    return sample(p, [&](const std::array<double, 3>& x) {
        double d2 = 0.0;
        for (int a = 0; a < p.dim; ++a) d2 += (x[a] - center[a]) * (x[a] - center[a]);
        const double t2 = d2 * inv_r2;
        return t2 < 1.0 ? std::exp(-1.0 / (1.0 - t2)) : 0.0;
    });
}

namespace detail {

// |2 pi sigma(k)|^{2s} sampled on the r2c half spectrum of the n^dim grid.
inline std::vector<double> half_spectrum_symbol(const ProblemParams& p) {
    const std::int64_t m = p.n;
    const int dim = p.dim;
    std::int64_t rows = 1;
    for (int a = 0; a < dim - 1; ++a) rows *= m;
    const std::int64_t hside = m / 2 + 1;
    std::vector<double> sym(static_cast<std::size_t>(rows * hside));
    const double fourpi2 = 4.0 * M_PI * M_PI;
    std::array<std::int64_t, 3> k{0, 0, 0};
    for (std::int64_t row = 0; row < rows; ++row) {
        double outer = 0.0;
        for (int a = 0; a < dim - 1; ++a) {
            const double t = static_cast<double>(shift_to_signed(k[a], m));
            outer += t * t;
        }
        double* dst = sym.data() + row * hside;
        for (std::int64_t l = 0; l < hside; ++l) {
            const double r2 = outer + static_cast<double>(l) * static_cast<double>(l);
            dst[l] = r2 == 0.0 ? 0.0 : std::pow(fourpi2 * r2, p.s);
        }
        for (int a = dim - 2; a >= 0; --a) {
            if (++k[a] < m) break;
            k[a] = 0;
        }
    }
    return sym;
}

// out = inverse DFT of (mult .* forward DFT of in) on the n^dim grid, with the
// multiplier given on the r2c half spectrum.
struct HalfMultiplierApplier {
    ProblemParams params;
    std::vector<double> mult;
    std::vector<std::complex<double>> half;
    std::vector<double> work;

    HalfMultiplierApplier(const ProblemParams& p, std::vector<double> multiplier)
        : params(p), mult(std::move(multiplier)) {
        const std::int64_t m = p.n;
        std::int64_t total = grid_size(p);
        half.resize(static_cast<std::size_t>(total / m * (m / 2 + 1)));
        work.resize(static_cast<std::size_t>(total));
        if (mult.size() != half.size()) throw shape_error("multiplier does not match the half spectrum");
    }

    void operator()(const std::vector<double>& in, std::vector<double>& out) {
        const std::int64_t m = params.n;
        std::copy(in.begin(), in.end(), work.begin());
        fft::transform_r2c(work.data(), half.data(), params.dim, m);
        for (std::size_t i = 0; i < half.size(); ++i) half[i] *= mult[i];
        fft::transform_c2r(half.data(), work.data(), params.dim, m);
        const double scale = 1.0 / static_cast<double>(grid_size(params));
        out.resize(work.size());
        for (std::size_t i = 0; i < work.size(); ++i) out[i] = work[i] * scale;
    }
};

} // namespace detail

struct TraceRow {
    double time = 0.0;
    double mass = 0.0;                // mean of u over the cell
    double interface_position = 0.0;  // leftmost upward 0.5 crossing, 1d only (else nan)
};

struct AllenCahnConfig {
    ProblemParams params{1, 1024, 0.5};
    double tau = 1e-3;
    double epsilon = 2e-3;
    double t_end = 40.0;
    Backend backend = Backend::dirichlet;
    double cg_tolerance = 1e-10;
    std::vector<double> snapshot_times;
    std::optional<QuadratureRule> rule; // dirichlet backend only; default rule if unset
};

struct AllenCahnResult {
    GridFunction u;
    std::vector<TraceRow> trace;
    std::vector<std::pair<double, GridFunction>> snapshots;
    std::int64_t total_cg_iterations = 0;
};

// Indicator of the centered cube [1/4, 3/4]^dim, the stock initial state.
inline GridFunction allen_cahn_initial_state(const ProblemParams& p) {
    return sample(p, [&](const std::array<double, 3>& x) {
        for (int a = 0; a < p.dim; ++a)
            if (x[a] < 0.25 || x[a] > 0.75) return 0.0;
        return 1.0;
    });
}

inline double interface_position(const GridFunction& u) {
    if (u.params.dim != 1) return std::numeric_limits<double>::quiet_NaN();
    const std::int64_t n = u.params.n;
    for (std::int64_t k = 0; k + 1 < n; ++k) {
        const double a = u.values[static_cast<std::size_t>(k)];
        const double b = u.values[static_cast<std::size_t>(k + 1)];
        if (a < 0.5 && b >= 0.5)
            return (static_cast<double>(k) + (0.5 - a) / (b - a)) / static_cast<double>(n);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Semi-implicit stepping of u_t = -(-Laplace)^s u - W'(u)/eps: the nonlinear
// term is explicit, the operator implicit, so each step solves
// (I + tau A) u_next = u - (tau/eps) W'(u).
inline AllenCahnResult run_allen_cahn(const AllenCahnConfig& cfg,
                                      const std::optional<GridFunction>& initial = std::nullopt) {
    validate(cfg.params);
    if (!(cfg.tau > 0.0)) throw config_error("time step must be positive");
    if (!(cfg.epsilon > 0.0)) throw config_error("interface width must be positive");
    if (!(cfg.t_end >= 0.0)) throw config_error("end time must be nonnegative");

    AllenCahnResult res;
    res.u = initial ? *initial : allen_cahn_initial_state(cfg.params);
    check_same_shape(cfg.params, res.u.params);
    const std::int64_t npts = grid_size(cfg.params);
    const double volume = static_cast<double>(npts);
    const std::int64_t nsteps = static_cast<std::int64_t>(std::llround(cfg.t_end / cfg.tau));

    std::vector<double> snaps = cfg.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    auto record = [&](double t) {
        res.trace.push_back({t, mean(res.u), interface_position(res.u)});
        while (next_snap < snaps.size() && t >= snaps[next_snap] - 1e-12) {
            res.snapshots.emplace_back(snaps[next_snap], res.u);
            ++next_snap;
        }
    };
    record(0.0);

    std::vector<double> rhs(static_cast<std::size_t>(npts));
    auto fill_rhs = [&]() {
        const double c = cfg.tau / cfg.epsilon;
        for (std::int64_t i = 0; i < npts; ++i) {
            const double ui = res.u.values[static_cast<std::size_t>(i)];
            rhs[static_cast<std::size_t>(i)] = ui - c * double_well_derivative(ui);
        }
    };

    if (cfg.backend == Backend::periodic) {
        std::vector<double> mult = detail::half_spectrum_symbol(cfg.params);
        for (auto& z : mult) z = 1.0 / (1.0 + cfg.tau * z);
        detail::HalfMultiplierApplier step(cfg.params, std::move(mult));
        for (std::int64_t it = 1; it <= nsteps; ++it) {
            fill_rhs();
            step(rhs, res.u.values);
            record(static_cast<double>(it) * cfg.tau);
        }
    } else {
        OperatorHandle op(build_kernel(cfg.params, cfg.rule ? *cfg.rule : default_rule(cfg.params.dim)));
        CgConfig cg{cfg.cg_tolerance, 100000};
        std::vector<double> tmp(static_cast<std::size_t>(npts));
        auto system = [&](const std::vector<double>& in, std::vector<double>& out) {
            op.apply(in, out);
            for (std::int64_t i = 0; i < npts; ++i)
                out[static_cast<std::size_t>(i)] = in[static_cast<std::size_t>(i)] +
                                                   cfg.tau * out[static_cast<std::size_t>(i)];
        };
        for (std::int64_t it = 1; it <= nsteps; ++it) {
            fill_rhs();
            // warm start from the previous state
            SolveReport rep = conjugate_gradient(system, rhs, res.u.values, volume, cg);
            if (!rep.converged) throw numerical_error("time step " + std::to_string(it) + " did not converge");
            res.total_cg_iterations += rep.iterations;
            record(static_cast<double>(it) * cfg.tau);
        }
    }
    return res;
}

struct SqrtDecayFit {
    double amplitude = 0.0;   // a in  mass ~ a sqrt(t0 - t)
    double vanish_time = 0.0; // t0
    std::size_t rows_used = 0;
};

// Fits mass^2 = a^2 (t0 - t) by least squares over the trace window where the
// mass sits strictly between the two thresholds.
inline SqrtDecayFit sqrt_decay_fit(const std::vector<TraceRow>& trace, double mass_low = 0.02,
                                   double mass_high = 0.45) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t used = 0;
    for (const auto& row : trace) {
        if (row.mass <= mass_low || row.mass >= mass_high) continue;
        const double x = row.time;
        const double y = row.mass * row.mass;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++used;
    }
    if (used < 2) throw config_error("decay fit window holds fewer than two samples");
    const double m = static_cast<double>(used);
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;
    if (!(slope < 0.0)) throw numerical_error("mass is not decaying, no square-root fit");
    return {std::sqrt(-slope), -intercept / slope, used};
}

struct DenoiseConfig {
    double s = 0.42;
    double alpha = 20.0 * M_PI;
    Backend backend = Backend::periodic;
    double cg_tolerance = 1e-8;
    std::optional<QuadratureRule> rule; // dirichlet backend only
};

struct DenoiseResult {
    GridFunction u;
    SolveReport report; // dirichlet backend only, empty otherwise
};

// Linear smoother (alpha I + A) u = alpha (g - mean(g)), returned re-centered
// as u + mean(g). Large alpha returns g, small alpha flattens toward the mean.
inline DenoiseResult denoise(const GridFunction& g, const DenoiseConfig& cfg = {}) {
    validate(g.params);
    if (!(cfg.alpha > 0.0)) throw config_error("fidelity weight must be positive");
    ProblemParams p{g.params.dim, g.params.n, cfg.s};
    validate(p);
    const std::int64_t npts = grid_size(p);
    const double g_mean = mean(g);
    std::vector<double> b(static_cast<std::size_t>(npts));
    for (std::int64_t i = 0; i < npts; ++i)
        b[static_cast<std::size_t>(i)] = cfg.alpha * (g.values[static_cast<std::size_t>(i)] - g_mean);

    DenoiseResult res;
    res.u = make_grid(p);
    if (cfg.backend == Backend::periodic) {
        std::vector<double> mult = detail::half_spectrum_symbol(p);
        for (auto& z : mult) z = 1.0 / (cfg.alpha + z);
        detail::HalfMultiplierApplier apply(p, std::move(mult));
        apply(b, res.u.values);
    } else {
        OperatorHandle op(build_kernel(p, cfg.rule ? *cfg.rule : default_rule(p.dim)));
        auto system = [&](const std::vector<double>& in, std::vector<double>& out) {
            op.apply(in, out);
            for (std::int64_t i = 0; i < npts; ++i)
                out[static_cast<std::size_t>(i)] += cfg.alpha * in[static_cast<std::size_t>(i)];
        };
        res.report = conjugate_gradient(system, b, res.u.values, static_cast<double>(npts),
                                        CgConfig{cfg.cg_tolerance, 100000});
        if (!res.report.converged) throw numerical_error("smoothing solve did not converge");
    }
    for (auto& v : res.u.values) v += g_mean;
    return res;
}

struct ComparisonRow {
    std::int64_t dilation = 0;
    double max_difference = 0.0;
};

// Probes how fast the rescaled periodic operator on the dilated grid converges
// to the lattice operator as the torus grows. Input is a smooth interior bump.
inline std::vector<ComparisonRow> operator_comparison(const ProblemParams& p, const QuadratureRule& rule,
                                                      const std::vector<std::int64_t>& dilations,
                                                      bool allow_large = false) {
    OperatorHandle op(build_kernel(p, rule));
    const GridFunction u = bump(p, {0.5, 0.5, 0.5}, 0.4);
    const GridFunction ref = op.apply(u);
    std::vector<ComparisonRow> rows;
    rows.reserve(dilations.size());
    for (std::int64_t s_dil : dilations) {
        GridFunction v = apply_scaled_periodic(u, s_dil, allow_large);
        const double scale = std::pow(static_cast<double>(s_dil), -2.0 * p.s);
        double worst = 0.0;
        for (std::size_t i = 0; i < ref.values.size(); ++i)
            worst = std::max(worst, std::abs(ref.values[i] - scale * v.values[i]));
        rows.push_back({s_dil, worst});
    }
    return rows;
}

} // namespace fraclap
