#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "grid.hpp"
#include "operators.hpp"

namespace fraclap {

struct StopWatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

struct CgConfig {
    double tolerance = 1e-8;            // on the volume-scaled squared residual
    std::int64_t max_iterations = 100000;
};

struct SolveReport {
    std::int64_t iterations = 0;
    bool converged = false;
    double residual_functional = 0.0;   // (1/n^d) sum r_k^2, the stopping quantity
    double residual_l2 = 0.0;           // its square root
    std::vector<double> history;        // functional per iteration, entry 0 = initial
};

namespace detail {
inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}
} // namespace detail

// Plain conjugate gradients. The iteration stops once the squared residual,
// scaled by the lattice volume, drops below cfg.tolerance. x is the initial
// guess on entry (zeros for a cold start) and the solution on exit.
template <class Op>
SolveReport conjugate_gradient(Op&& apply_op, const std::vector<double>& b, std::vector<double>& x,
                               double volume, const CgConfig& cfg = {}) {
    SolveReport rep;
    const std::size_t npts = b.size();
    if (x.size() != npts) throw shape_error("cg: initial guess has the wrong size");
    std::vector<double> r(npts), p(npts), q(npts);

    apply_op(x, q);
    for (std::size_t i = 0; i < npts; ++i) r[i] = b[i] - q[i];
    double rho = detail::dot(r, r);
    double functional = rho / volume;
    if (!std::isfinite(functional)) throw numerical_error("cg: residual is not finite");
    rep.history.push_back(functional);
    if (functional < cfg.tolerance) {
        rep.converged = true;
        rep.residual_functional = functional;
        rep.residual_l2 = std::sqrt(functional);
        return rep;
    }
    p = r;
    for (std::int64_t it = 1; it <= cfg.max_iterations; ++it) {
        apply_op(p, q);
        const double pq = detail::dot(p, q);
        if (!(pq > 0.0)) throw numerical_error("cg: operator is not positive definite on this subspace");
        const double alpha = rho / pq;
        for (std::size_t i = 0; i < npts; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        const double rho_next = detail::dot(r, r);
        functional = rho_next / volume;
        if (!std::isfinite(functional)) throw numerical_error("cg: residual is not finite");
        rep.history.push_back(functional);
        rep.iterations = it;
        if (functional < cfg.tolerance) {
            rep.converged = true;
            break;
        }
        const double beta = rho_next / rho;
        for (std::size_t i = 0; i < npts; ++i) p[i] = r[i] + beta * p[i];
        rho = rho_next;
    }
    rep.residual_functional = functional;
    rep.residual_l2 = std::sqrt(functional);
    return rep;
}

struct DirichletSolution {
    GridFunction u;
    SolveReport report;
};

// Homogeneous-exterior problem on the masked lattice: S A S^T u = S f.
// Exterior entries of the solution are exactly zero (never touched).
inline DirichletSolution solve_dirichlet(OperatorHandle& op, const DomainMask& mask,
                                         const GridFunction& rhs, const CgConfig& cfg = {}) {
    check_same_shape(op.params(), mask.params);
    check_same_shape(op.params(), rhs.params);
    std::vector<double> b = rhs.values;
    restrict_to_mask(mask, b);
    DirichletSolution sol{make_grid(rhs.params), {}};
    const double volume = static_cast<double>(grid_size(rhs.params));
    sol.report = conjugate_gradient(
        [&](const std::vector<double>& in, std::vector<double>& out) { op.apply_masked(mask, in, out); },
        b, sol.u.values, volume, cfg);
    return sol;
}

// u(x) = C(d,s) (r^2 - |x-c|^2)_+^s, the exact solution for unit right-hand
// side on the open ball; zero outside.
inline GridFunction exact_ball_solution(const ProblemParams& p, const std::array<double, 3>& center,
                                        double radius) {
    validate(p);
    for (int a = 0; a < p.dim; ++a)
        if (center[a] - radius < 0.0 || center[a] + radius > 1.0)
            throw geometry_error("ball does not fit inside the unit cube");
    const double c_ball = unit_ball_solution_constant(p.dim, p.s);
    return sample(p, [&](const std::array<double, 3>& x) {
        double d2 = 0.0;
        for (int a = 0; a < p.dim; ++a) d2 += (x[a] - center[a]) * (x[a] - center[a]);
        const double t = radius * radius - d2;
        return t > 0.0 ? c_ball * std::pow(t, p.s) : 0.0;
    });
}

// Least-squares slope of log2(error) against log2(n), negated. With five or
// more rows the two coarsest grids are dropped from the fit.
inline double fitted_rate(std::vector<std::pair<std::int64_t, double>> rows) {
    if (rows.size() >= 5) rows.erase(rows.begin(), rows.begin() + 2);
    if (rows.size() < 2) throw config_error("rate fit needs at least two grids");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(rows.size());
    for (auto& [n, err] : rows) {
        const double lx = std::log2(static_cast<double>(n));
        const double ly = std::log2(err);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return -slope;
}

// Benchmark geometry used throughout: disc of radius 0.45 centered in the
// cube, right-hand side identically one.
inline constexpr double benchmark_disc_radius = 0.45;

struct BenchmarkResult {
    GridFunction u;
    SolveReport report;
    double error_l2 = 0.0; // against the closed-form ball solution
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
};

inline BenchmarkResult solve_disc_benchmark(const ProblemParams& p, const QuadratureRule& rule,
                                            const CgConfig& cfg = {}) {
    validate(p);
    const std::array<double, 3> center{0.5, 0.5, 0.5};
    StopWatch setup;
    OperatorHandle op(build_kernel(p, rule));
    BenchmarkResult res;
    res.setup_seconds = setup.seconds();
    DomainMask mask = mask_disc(p, center, benchmark_disc_radius);
    GridFunction rhs = make_grid(p, 1.0);
    StopWatch solve;
    DirichletSolution sol = solve_dirichlet(op, mask, rhs, cfg);
    res.solve_seconds = solve.seconds();
    GridFunction exact = exact_ball_solution(p, center, benchmark_disc_radius);
    double acc = 0.0;
    for (std::size_t i = 0; i < exact.values.size(); ++i) {
        const double d = sol.u.values[i] - exact.values[i];
        acc += d * d;
    }
    res.error_l2 = std::sqrt(acc / static_cast<double>(exact.values.size()));
    res.u = std::move(sol.u);
    res.report = std::move(sol.report);
    return res;
}

// Discrete L2 distance between a coarse solution and the exact restriction of
// a finer one; the fine side must be a multiple of the coarse side.
inline double error_against_fine(const GridFunction& coarse, const GridFunction& fine) {
    if (coarse.params.dim != fine.params.dim || fine.params.n % coarse.params.n != 0)
        throw shape_error("grids are not nested");
    const std::int64_t ratio = fine.params.n / coarse.params.n;
    const int dim = coarse.params.dim;
    const std::int64_t nc = coarse.params.n;
    const std::int64_t total = grid_size(coarse.params);
    std::array<std::int64_t, 3> k{0, 0, 0};
    double acc = 0.0;
    for (std::int64_t i = 0; i < total; ++i) {
        std::int64_t fi = 0;
        for (int a = 0; a < dim; ++a) fi = fi * fine.params.n + k[a] * ratio;
        const double d = coarse.values[static_cast<std::size_t>(i)] - fine.values[static_cast<std::size_t>(fi)];
        acc += d * d;
        for (int a = dim - 1; a >= 0; --a) {
            if (++k[a] < nc) break;
            k[a] = 0;
        }
    }
    return std::sqrt(acc / static_cast<double>(total));
}

} // namespace fraclap
