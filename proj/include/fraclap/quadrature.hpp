#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"

namespace fraclap {

enum class RuleKind { uniform, gauss_legendre };

// Tensor-product rule on [0,1]^dim. Node i occupies nodes[i*dim .. i*dim+dim).
struct QuadratureRule {
    RuleKind kind = RuleKind::gauss_legendre;
    int points_per_axis = 7;
    int dim = 1;
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Gauss-Legendre points on [-1,1] by Newton iteration on the three-term
// recurrence; no tabulated values.
inline void legendre_points(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(static_cast<std::size_t>(n), 0.0);
    w.assign(static_cast<std::size_t>(n), 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        x[static_cast<std::size_t>(i)] = -z;
        x[static_cast<std::size_t>(n - 1 - i)] = z;
        double wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[static_cast<std::size_t>(i)] = wi;
        w[static_cast<std::size_t>(n - 1 - i)] = wi;
    }
}

inline void axis_points(RuleKind kind, int npts, std::vector<double>& x, std::vector<double>& w) {
    if (npts < 1) throw config_error("quadrature rule needs at least one point per axis");
    if (kind == RuleKind::gauss_legendre && npts > 32)
        throw config_error("Gauss rule capped at 32 points per axis");
    if (kind == RuleKind::uniform) {
        x.assign(static_cast<std::size_t>(npts), 0.0);
        w.assign(static_cast<std::size_t>(npts), 1.0 / npts);
        for (int i = 0; i < npts; ++i) x[static_cast<std::size_t>(i)] = static_cast<double>(i) / npts;
    } else {
        legendre_points(npts, x, w);
        for (auto& v : x) v = 0.5 * (v + 1.0); // map [-1,1] -> [0,1]
        for (auto& v : w) v *= 0.5;
    }
}

} // namespace detail

inline QuadratureRule make_rule(RuleKind kind, int points_per_axis, int dim) {
    if (dim < 1 || dim > 3) throw config_error("quadrature dim must be 1, 2 or 3");
    std::vector<double> x, w;
    detail::axis_points(kind, points_per_axis, x, w);
    QuadratureRule rule{kind, points_per_axis, dim, {}, {}};
    const int npts = points_per_axis;
    std::int64_t total = 1;
    for (int a = 0; a < dim; ++a) total *= npts;
    rule.nodes.reserve(static_cast<std::size_t>(total * dim));
    rule.weights.reserve(static_cast<std::size_t>(total));
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (std::int64_t i = 0; i < total; ++i) {
        double wt = 1.0;
        for (int a = 0; a < dim; ++a) {
            rule.nodes.push_back(x[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])]);
            wt *= w[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
        }
        rule.weights.push_back(wt);
        for (int a = dim - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < npts) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return rule;
}

inline QuadratureRule uniform_rule(int points_per_axis, int dim) {
    return make_rule(RuleKind::uniform, points_per_axis, dim);
}

inline QuadratureRule gauss_legendre_rule(int points_per_axis, int dim) {
    return make_rule(RuleKind::gauss_legendre, points_per_axis, dim);
}

// Default accuracy/cost trade-off: 7 Gauss points per axis up to 2-d, 5 in 3-d.
inline QuadratureRule default_rule(int dim) {
    return gauss_legendre_rule(dim <= 2 ? 7 : 5, dim);
}

inline std::string rule_id(const QuadratureRule& r) {
    if (r.kind == RuleKind::uniform) return "uniform:" + std::to_string(r.points_per_axis);
    return "gl" + std::to_string(r.points_per_axis);
}

// Accepts "gl<k>" or "uniform:<k>".
inline QuadratureRule parse_rule(const std::string& text, int dim) {
    try {
        if (text.rfind("gl", 0) == 0) {
            int k = std::stoi(text.substr(2));
            return gauss_legendre_rule(k, dim);
        }
        if (text.rfind("uniform:", 0) == 0) {
            int k = std::stoi(text.substr(8));
            return uniform_rule(k, dim);
        }
    } catch (const std::exception&) {
        // fall through to the config_error below
    }
    throw config_error("unknown quadrature rule '" + text + "' (expected gl<k> or uniform:<k>)");
}

} // namespace fraclap
