#include <gtest/gtest.h>

#include <map>

#include <fraclap/apps.hpp>

#include "oracles.hpp"

using namespace fraclap;

TEST(DoubleWell, DerivativeValues) {
    EXPECT_EQ(double_well_derivative(0.0), 0.0);
    EXPECT_EQ(double_well_derivative(1.0), 0.0);
    EXPECT_EQ(double_well_derivative(0.5), 0.0);
    EXPECT_DOUBLE_EQ(double_well_derivative(2.0), 3.0);
    EXPECT_DOUBLE_EQ(double_well_derivative(-1.0), -3.0);
    // derivative of u^2(1-u)^2/4 by finite differences
    auto well = [](double u) { return 0.25 * u * u * (1.0 - u) * (1.0 - u); };
    for (double u : {0.2, 0.7, 1.3}) {
        const double h = 1e-6;
        EXPECT_NEAR(double_well_derivative(u), (well(u + h) - well(u - h)) / (2 * h), 1e-8);
    }
}

TEST(Bump, PeakAndSupport) {
    ProblemParams p{2, 16, 0.5};
    GridFunction u = bump(p, {0.5, 0.5, 0.5}, 0.4);
    EXPECT_NEAR(u.values[static_cast<std::size_t>(8 * 16 + 8)], std::exp(-1.0), 1e-15);
    // corner is far outside the support
    EXPECT_EQ(u.values[0], 0.0);
    // lattice point at distance exactly 0.4 would be on the boundary: value 0
    GridFunction u1 = bump(ProblemParams{1, 10, 0.5}, {0.5, 0.0, 0.0}, 0.4);
    EXPECT_EQ(u1.values[1], 0.0); // x=0.1, rho=1
    EXPECT_GT(u1.values[2], 0.0); // x=0.2, rho=0.75
}

TEST(Bump, RadialSymmetryOnTheLattice) {
    ProblemParams p{2, 16, 0.5};
    GridFunction u = bump(p, {0.5, 0.5, 0.5}, 0.4);
    std::map<std::int64_t, double> by_r2;
    for (std::int64_t k0 = 0; k0 < 16; ++k0)
        for (std::int64_t k1 = 0; k1 < 16; ++k1) {
            std::int64_t r2 = (k0 - 8) * (k0 - 8) + (k1 - 8) * (k1 - 8);
            double v = u.values[static_cast<std::size_t>(k0 * 16 + k1)];
            auto it = by_r2.find(r2);
            if (it == by_r2.end())
                by_r2[r2] = v;
            else
                EXPECT_NEAR(it->second, v, 1e-15);
        }
}

TEST(AllenCahn, InitialStateIsCenteredIndicator) {
    GridFunction u = allen_cahn_initial_state(ProblemParams{1, 8, 0.5});
    EXPECT_EQ(u.values, (std::vector<double>{0, 0, 1, 1, 1, 1, 1, 0}));
}

TEST(AllenCahn, ZeroIsFixedForBothBackends) {
    for (Backend b : {Backend::periodic, Backend::dirichlet}) {
        AllenCahnConfig cfg;
        cfg.params = {1, 32, 0.5};
        cfg.t_end = 5e-3;
        cfg.backend = b;
        AllenCahnResult res = run_allen_cahn(cfg, make_grid(cfg.params, 0.0));
        EXPECT_LT(norm_linf(res.u), 1e-13);
    }
}

TEST(AllenCahn, OneIsFixedOnlyForPeriodic) {
    AllenCahnConfig cfg;
    cfg.params = {1, 32, 0.5};
    cfg.t_end = 5e-3;

    cfg.backend = Backend::periodic;
    AllenCahnResult per = run_allen_cahn(cfg, make_grid(cfg.params, 1.0));
    for (double v : per.u.values) EXPECT_NEAR(v, 1.0, 1e-12);

    // the operator does not annihilate constants in the zero-exterior setting,
    // so u = 1 must move
    cfg.backend = Backend::dirichlet;
    AllenCahnResult dir = run_allen_cahn(cfg, make_grid(cfg.params, 1.0));
    double worst = 0.0;
    for (double v : dir.u.values) worst = std::max(worst, std::abs(v - 1.0));
    EXPECT_GT(worst, 1e-4);
}

TEST(AllenCahn, HalfIsAnUnstableEquilibriumForPeriodic) {
    AllenCahnConfig cfg;
    cfg.params = {1, 32, 0.5};
    cfg.t_end = 2e-3;
    cfg.backend = Backend::periodic;
    AllenCahnResult res = run_allen_cahn(cfg, make_grid(cfg.params, 0.5));
    for (double v : res.u.values) EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(AllenCahn, TraceAndSnapshots) {
    AllenCahnConfig cfg;
    cfg.params = {1, 64, 0.5};
    cfg.t_end = 0.01;
    cfg.backend = Backend::periodic;
    cfg.snapshot_times = {0.005, 0.01};
    AllenCahnResult res = run_allen_cahn(cfg);
    ASSERT_EQ(res.trace.size(), 11u);
    EXPECT_DOUBLE_EQ(res.trace.front().time, 0.0);
    EXPECT_NEAR(res.trace.back().time, 0.01, 1e-12);
    // mass of the indicator: 33 of 64 points inside [1/4, 3/4]
    EXPECT_NEAR(res.trace.front().mass, 33.0 / 64.0, 1e-14);
    ASSERT_EQ(res.snapshots.size(), 2u);
    EXPECT_EQ(res.snapshots[0].first, 0.005);
    // kink of the initial indicator: jump between x = 15/64 and 16/64
    EXPECT_GT(res.trace.front().interface_position, 15.0 / 64);
    EXPECT_LE(res.trace.front().interface_position, 16.0 / 64);
}

TEST(AllenCahn, InterfaceOfLinearRamp) {
    ProblemParams p{1, 64, 0.5};
    GridFunction g = sample(p, [](const std::array<double, 3>& x) { return x[0]; });
    EXPECT_NEAR(interface_position(g), 0.5, 1e-14);
    GridFunction flat = make_grid(p, 0.0);
    EXPECT_TRUE(std::isnan(interface_position(flat)));
}

TEST(AllenCahn, DirichletBackendStepsAndCounts) {
    AllenCahnConfig cfg;
    cfg.params = {1, 64, 0.5};
    cfg.t_end = 0.01;
    cfg.backend = Backend::dirichlet;
    AllenCahnResult res = run_allen_cahn(cfg);
    EXPECT_EQ(res.trace.size(), 11u);
    EXPECT_GT(res.total_cg_iterations, 0);
    // the masked evolution loses mass from the start
    EXPECT_LT(res.trace.back().mass, res.trace.front().mass);
}

TEST(AllenCahn, ConfigValidation) {
    AllenCahnConfig cfg;
    cfg.tau = 0.0;
    EXPECT_THROW(run_allen_cahn(cfg), config_error);
    cfg = {};
    cfg.epsilon = -1.0;
    EXPECT_THROW(run_allen_cahn(cfg), config_error);
    cfg = {};
    cfg.t_end = -2.0;
    EXPECT_THROW(run_allen_cahn(cfg), config_error);
}

TEST(SqrtFit, RecoversSyntheticDecay) {
    std::vector<TraceRow> trace;
    const double a = 0.2242, t0 = 5.0104;
    for (double t = 0.0; t < t0; t += 0.01) {
        double m2 = a * a * (t0 - t);
        trace.push_back({t, std::sqrt(m2), 0.0});
    }
    SqrtDecayFit fit = sqrt_decay_fit(trace);
    EXPECT_NEAR(fit.amplitude, a, 1e-10);
    EXPECT_NEAR(fit.vanish_time, t0, 1e-8);
    EXPECT_GT(fit.rows_used, 100u);
}

TEST(SqrtFit, RejectsFlatMass) {
    std::vector<TraceRow> trace;
    for (double t = 0.0; t < 10.0; t += 0.1) trace.push_back({t, 0.3, 0.0});
    EXPECT_THROW(sqrt_decay_fit(trace), numerical_error);
    std::vector<TraceRow> empty;
    EXPECT_THROW(sqrt_decay_fit(empty), config_error);
}

TEST(Denoise, ConstantImageIsFixed) {
    ProblemParams p{2, 16, 0.42};
    GridFunction g = make_grid(p, 0.37);
    for (Backend b : {Backend::periodic, Backend::dirichlet}) {
        DenoiseConfig cfg;
        cfg.backend = b;
        DenoiseResult res = denoise(g, cfg);
        for (double v : res.u.values) EXPECT_NEAR(v, 0.37, 1e-12);
    }
}

TEST(Denoise, LargeFidelityReturnsInput) {
    ProblemParams p{2, 16, 0.5};
    GridFunction g = sample(p, [](const std::array<double, 3>& x) {
        return 0.5 + 0.3 * std::sin(2 * M_PI * x[0]) * std::cos(4 * M_PI * x[1]);
    });
    DenoiseConfig cfg;
    cfg.alpha = 1e9;
    DenoiseResult res = denoise(g, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i)
        worst = std::max(worst, std::abs(res.u.values[i] - g.values[i]));
    EXPECT_LT(worst, 1e-6);
}

TEST(Denoise, PeriodicPreservesTheMean) {
    ProblemParams p{2, 32, 0.42};
    GridFunction g = sample(p, [](const std::array<double, 3>& x) {
        return 0.4 + 0.2 * std::sin(2 * M_PI * (x[0] + 2 * x[1]));
    });
    DenoiseResult res = denoise(g);
    EXPECT_NEAR(mean(res.u), mean(g), 1e-10);
}

TEST(Denoise, SmoothsHighFrequenciesMore) {
    // fidelity term ||u - g||^2 decreases monotonically as alpha grows
    ProblemParams p{2, 16, 0.42};
    GridFunction g = sample(p, [](const std::array<double, 3>& x) {
        return 0.5 + 0.25 * std::sin(14 * M_PI * x[0]) + 0.15 * std::cos(6 * M_PI * x[1]);
    });
    double prev = -1.0;
    for (double alpha : {2.0, 20.0, 200.0}) {
        DenoiseConfig cfg;
        cfg.alpha = alpha;
        DenoiseResult res = denoise(g, cfg);
        double dist2 = 0.0;
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            double d = res.u.values[i] - g.values[i];
            dist2 += d * d;
        }
        if (prev >= 0.0) EXPECT_LT(dist2, prev);
        prev = dist2;
    }
}

TEST(Denoise, BackendsAgreeInTheInterior) {
    // away from the boundary the zero-exterior and periodic smoothers see the
    // same local picture; differences concentrate near the frame
    ProblemParams p{2, 32, 0.42};
    GridFunction g = sample(p, [](const std::array<double, 3>& x) {
        double dx = x[0] - 0.5, dy = x[1] - 0.5;
        return dx * dx + dy * dy < 0.04 ? 0.8 : 0.3;
    });
    DenoiseConfig per, dir;
    per.backend = Backend::periodic;
    dir.backend = Backend::dirichlet;
    GridFunction a = denoise(g, per).u;
    GridFunction b = denoise(g, dir).u;
    double interior = 0.0, boundary = 0.0;
    for (std::int64_t k0 = 0; k0 < 32; ++k0)
        for (std::int64_t k1 = 0; k1 < 32; ++k1) {
            double d = a.values[static_cast<std::size_t>(k0 * 32 + k1)] -
                       b.values[static_cast<std::size_t>(k0 * 32 + k1)];
            bool frame = k0 < 4 || k0 >= 28 || k1 < 4 || k1 >= 28;
            (frame ? boundary : interior) = std::max(frame ? boundary : interior, std::abs(d));
        }
    EXPECT_GT(boundary, interior);
}

TEST(Comparison, UniformRuleHitsMachineZeroAtTwiceTheNodes) {
    auto rows = operator_comparison({1, 16, 0.5}, uniform_rule(2, 1), {4});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_LT(rows[0].max_difference, 1e-10);
    auto rows2 = operator_comparison({2, 8, 0.75}, uniform_rule(3, 2), {6});
    EXPECT_LT(rows2[0].max_difference, 1e-10);
}

TEST(Comparison, DefectShrinksWithTorusSizeBeforePlateau) {
    auto rows = operator_comparison({1, 32, 0.5}, gauss_legendre_rule(7, 1), {2, 4, 8});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_GT(rows[0].max_difference, rows[1].max_difference);
    EXPECT_GT(rows[1].max_difference, rows[2].max_difference);
}
