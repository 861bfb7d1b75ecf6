// Command-line frontend: kernel precomputation, Dirichlet solves, convergence
// benchmarks, Allen-Cahn time stepping, image denoising.
//
// Exit codes: 0 ok, 2 usage or configuration, 3 I/O or file format,
// 4 numerical non-convergence.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <fraclap/fraclap.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fraclap;

namespace {

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t kernel_checksum(const ConvolutionKernel& k) {
    // hash the payload exactly as it sits in the cache file (LE f64 pairs)
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&h](double v) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (const auto& z : k.phi_hat) {
        feed(z.real());
        feed(z.imag());
    }
    return h;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Manifest {
    std::string subcommand;
    json params = json::object();
    std::string kernel_cache = "inline";
    json timings = json::object();

    json body(bool with_timings) const {
        json j;
        j["subcommand"] = subcommand;
        j["parameters"] = params;
        j["kernel_cache"] = kernel_cache;
        j["version"] = version_string;
        if (with_timings) j["timings"] = timings;
        return j;
    }
    // comment line for CSV output; timings ride on a separate line so data
    // rows stay byte-identical across runs
    std::string csv_lines() const {
        return "# manifest: " + body(false).dump() + "\n# timing: " + timings.dump() + "\n";
    }
    void write_sidecar(const fs::path& out) const {
        std::ofstream os(out.string() + ".manifest.json");
        os << body(true).dump(2) << "\n";
        if (!os) throw format_error("cannot write manifest next to " + out.string());
    }
};

// Kernels built implicitly (no --kernel flag) can be cached across runs.
fs::path cache_path_for(const ProblemParams& p, const QuadratureRule& rule) {
    const char* dir = std::getenv("FRACLAP_CACHE_DIR");
    if (!dir || !*dir) return {};
    std::string name = "kern_d" + std::to_string(p.dim) + "_n" + std::to_string(p.n) + "_s" +
                       fmt17(p.s) + "_" + rule_id(rule) + ".bin";
    return fs::path(dir) / name;
}

ConvolutionKernel obtain_kernel(const ProblemParams& p, const QuadratureRule& rule,
                                Manifest& man, double& seconds) {
    StopWatch sw;
    fs::path cache = cache_path_for(p, rule);
    if (!cache.empty() && fs::exists(cache)) {
        ConvolutionKernel k = load_kernel(cache);
        if (k.params.dim == p.dim && k.params.n == p.n && k.params.s == p.s &&
            k.rule_kind == rule.kind && k.rule_points == rule.points_per_axis) {
            man.kernel_cache = cache.string();
            seconds = sw.seconds();
            return k;
        }
        // stale or hash-collided name: fall through and rebuild
    }
    ConvolutionKernel k = build_kernel(p, rule);
    if (!cache.empty()) {
        fs::create_directories(cache.parent_path());
        save_kernel(k, cache);
        man.kernel_cache = cache.string();
    }
    seconds = sw.seconds();
    return k;
}

DomainMask parse_domain(const std::string& text, const ProblemParams& p) {
    if (text == "cube") return mask_cube(p);
    if (text == "lshape") return mask_lshape(p);
    if (text.rfind("disc:", 0) == 0) {
        double r;
        try {
            r = std::stod(text.substr(5));
        } catch (const std::exception&) {
            throw config_error("bad disc radius in '" + text + "'");
        }
        return mask_disc(p, {0.5, 0.5, 0.5}, r);
    }
    if (text.rfind("mask:", 0) == 0) return load_mask(p, text.substr(5));
    throw config_error("unknown domain '" + text + "' (cube | disc:r | lshape | mask:file)");
}

GridFunction parse_rhs(const std::string& text, const ProblemParams& p) {
    if (text.rfind("const:", 0) == 0) {
        double v;
        try {
            v = std::stod(text.substr(6));
        } catch (const std::exception&) {
            throw config_error("bad constant in '" + text + "'");
        }
        return make_grid(p, v);
    }
    std::string path = text.rfind("file:", 0) == 0 ? text.substr(5) : text;
    GridFunction g = load_grid(path, p.s);
    check_same_shape(g.params, p);
    return g;
}

struct KernelSource {
    std::string kernel_file; // load from here when nonempty
    int dim = 0;
    std::int64_t n = 0;
    double s = -1.0;
    std::string quad = "";

    // flags for `kernel` itself and for inline specification elsewhere
    void add_inline_flags(CLI::App* cmd, bool required) {
        auto* d = cmd->add_option("--dim", dim, "dimension (1, 2 or 3)");
        auto* nn = cmd->add_option("--n", n, "lattice points per axis");
        auto* ss = cmd->add_option("--s", s, "fractional exponent in (0, 1]");
        cmd->add_option("--quad", quad, "quadrature rule: gl<k> or uniform:<k>");
        if (required) {
            d->required();
            nn->required();
            ss->required();
        }
    }

    ConvolutionKernel resolve(Manifest& man, double& seconds) const {
        if (!kernel_file.empty()) {
            StopWatch sw;
            ConvolutionKernel k = load_kernel(kernel_file);
            if (dim != 0 && dim != k.params.dim) throw config_error("--dim disagrees with kernel file");
            if (n != 0 && n != k.params.n) throw config_error("--n disagrees with kernel file");
            if (s >= 0.0 && s != k.params.s) throw config_error("--s disagrees with kernel file");
            man.kernel_cache = kernel_file;
            seconds = sw.seconds();
            return k;
        }
        if (dim == 0 || n == 0 || s < 0.0)
            throw config_error("need --kernel or all of --dim, --n, --s");
        ProblemParams p{dim, n, s};
        validate(p);
        QuadratureRule rule = quad.empty() ? default_rule(dim) : parse_rule(quad, dim);
        return obtain_kernel(p, rule, man, seconds);
    }
};

void record_params(Manifest& man, const ConvolutionKernel& k) {
    man.params["dim"] = k.params.dim;
    man.params["n"] = k.params.n;
    man.params["s"] = k.params.s;
    man.params["quad"] = rule_id(make_rule(k.rule_kind, k.rule_points, k.params.dim));
}

int cmd_kernel(const KernelSource& src, const std::string& out) {
    Manifest man;
    man.subcommand = "kernel";
    if (src.dim == 0 || src.n == 0 || src.s < 0.0)
        throw config_error("kernel needs --dim, --n and --s");
    ProblemParams p{src.dim, src.n, src.s};
    validate(p);
    QuadratureRule rule = src.quad.empty() ? default_rule(p.dim) : parse_rule(src.quad, p.dim);
    StopWatch sw;
    ConvolutionKernel k = build_kernel(p, rule);
    const double secs = sw.seconds();
    save_kernel(k, out);
    record_params(man, k);
    man.params["out"] = out;
    man.timings["build_seconds"] = secs;
    man.write_sidecar(out);
    std::printf("kernel %s  checksum fnv1a:%016llx  build_seconds %.3f\n", out.c_str(),
                static_cast<unsigned long long>(kernel_checksum(k)), secs);
    return 0;
}

int cmd_solve(const KernelSource& src, const std::string& domain, const std::string& rhs_spec,
              double tol, std::int64_t max_iter, const std::string& out_grid,
              const std::string& out_report) {
    Manifest man;
    man.subcommand = "solve";
    double setup_secs = 0.0;
    ConvolutionKernel kern = src.resolve(man, setup_secs);
    record_params(man, kern);
    man.params["domain"] = domain;
    man.params["rhs"] = rhs_spec;
    man.params["tol"] = tol;
    man.params["max_iter"] = max_iter;

    OperatorHandle op(std::move(kern));
    DomainMask mask = parse_domain(domain, op.params());
    if (mask.count == 0) throw config_error("domain selects no lattice points");
    GridFunction rhs = parse_rhs(rhs_spec, op.params());

    StopWatch sw;
    DirichletSolution sol = solve_dirichlet(op, mask, rhs, CgConfig{tol, max_iter});
    const double solve_secs = sw.seconds();
    man.timings["setup_seconds"] = setup_secs;
    man.timings["solve_seconds"] = solve_secs;

    if (!out_grid.empty()) {
        save_grid(sol.u, out_grid);
        man.write_sidecar(out_grid);
    }
    if (!out_report.empty()) {
        std::ofstream os(out_report);
        if (!os) throw format_error("cannot write " + out_report);
        os << man.csv_lines();
        os << "iterations,residual\n";
        os << sol.report.iterations << "," << fmt17(sol.report.residual_l2) << "\n";
    }
    std::printf("iterations %lld  residual %.3e  solve_seconds %.3f\n",
                static_cast<long long>(sol.report.iterations), sol.report.residual_l2, solve_secs);
    if (!sol.report.converged) {
        std::fprintf(stderr, "did not reach tolerance %g within %lld iterations\n", tol,
                     static_cast<long long>(max_iter));
        return 4;
    }
    return 0;
}

int cmd_bench(int dim, const std::string& s_list, const std::string& n_list,
              const std::string& geometry, const std::string& quad, const std::string& out) {
    Manifest man;
    man.subcommand = "bench";
    man.params["dim"] = dim;
    man.params["s_list"] = s_list;
    man.params["n_list"] = n_list;
    man.params["geometry"] = geometry;

    auto split = [](const std::string& text) {
        std::vector<std::string> parts;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t comma = text.find(',', pos);
            if (comma == std::string::npos) comma = text.size();
            if (comma > pos) parts.push_back(text.substr(pos, comma - pos));
            pos = comma + 1;
        }
        return parts;
    };
    std::vector<double> svals;
    std::vector<std::int64_t> nvals;
    try {
        for (const auto& t : split(s_list)) svals.push_back(std::stod(t));
        for (const auto& t : split(n_list)) nvals.push_back(std::stoll(t));
    } catch (const std::exception&) {
        throw config_error("bad --s-list or --n-list");
    }
    if (svals.empty() || nvals.size() < 2) throw config_error("need at least one s and two n values");
    for (std::size_t i = 1; i < nvals.size(); ++i)
        if (nvals[i] <= nvals[i - 1]) throw config_error("--n-list must be ascending");
    if (geometry != "disc" && geometry != "lshape") throw config_error("geometry must be disc or lshape");
    if (geometry == "lshape" && dim != 2) throw config_error("lshape runs in two dimensions");

    std::string rows;
    StopWatch total;
    for (double s : svals) {
        std::vector<std::pair<std::int64_t, double>> table;
        if (geometry == "disc") {
            for (std::int64_t n : nvals) {
                ProblemParams p{dim, n, s};
                QuadratureRule rule = quad.empty() ? default_rule(dim) : parse_rule(quad, dim);
                Manifest scratch;
                double build_secs = 0.0;
                OperatorHandle op(obtain_kernel(p, rule, scratch, build_secs));
                DomainMask mask = mask_disc(p, {0.5, 0.5, 0.5}, benchmark_disc_radius);
                DirichletSolution sol = solve_dirichlet(op, mask, make_grid(p, 1.0));
                if (!sol.report.converged) throw numerical_error("solve stalled at n=" + std::to_string(n));
                GridFunction exact = exact_ball_solution(p, {0.5, 0.5, 0.5}, benchmark_disc_radius);
                double acc = 0.0;
                for (std::size_t i = 0; i < exact.values.size(); ++i) {
                    double d = sol.u.values[i] - exact.values[i];
                    acc += d * d;
                }
                table.emplace_back(n, std::sqrt(acc / static_cast<double>(exact.values.size())));
            }
        } else {
            // self-convergence: everything against the finest grid in the run
            std::vector<GridFunction> sols;
            for (std::int64_t n : nvals) {
                ProblemParams p{dim, n, s};
                QuadratureRule rule = quad.empty() ? default_rule(dim) : parse_rule(quad, dim);
                Manifest scratch;
                double build_secs = 0.0;
                OperatorHandle op(obtain_kernel(p, rule, scratch, build_secs));
                DirichletSolution sol = solve_dirichlet(op, mask_lshape(p), make_grid(p, 1.0));
                if (!sol.report.converged) throw numerical_error("solve stalled at n=" + std::to_string(n));
                sols.push_back(std::move(sol.u));
            }
            for (std::size_t i = 0; i + 1 < sols.size(); ++i)
                table.emplace_back(nvals[i], error_against_fine(sols[i], sols.back()));
        }
        double fitted = fitted_rate(table);
        for (std::size_t i = 0; i < table.size(); ++i) {
            rows += std::to_string(table[i].first) + "," + fmt17(table[i].second) + ",";
            if (i > 0)
                rows += fmt17(std::log2(table[i - 1].second / table[i].second) /
                              std::log2(static_cast<double>(table[i].first) /
                                        static_cast<double>(table[i - 1].first)));
            rows += "\n";
        }
        rows += "# s " + fmt17(s) + " fitted_rate " + fmt17(fitted) + "\n";
    }
    man.timings["total_seconds"] = total.seconds();

    std::ofstream os(out);
    if (!os) throw format_error("cannot write " + out);
    os << man.csv_lines() << "N,error,rate\n" << rows;
    std::printf("bench table written to %s\n", out.c_str());
    return 0;
}

int cmd_allen_cahn(std::int64_t n, double s, double eps, double tau, double t_end,
                   const std::string& backend, const std::string& quad,
                   const std::vector<double>& snapshots, const std::string& out) {
    if (!(t_end > 0.0)) throw config_error("--t-end must be positive");
    Manifest man;
    man.subcommand = "allen-cahn";
    AllenCahnConfig cfg;
    cfg.params = ProblemParams{1, n, s};
    validate(cfg.params);
    cfg.epsilon = eps;
    cfg.tau = tau;
    cfg.t_end = t_end;
    cfg.snapshot_times = snapshots;
    if (backend == "periodic")
        cfg.backend = Backend::periodic;
    else if (backend == "dirichlet")
        cfg.backend = Backend::dirichlet;
    else
        throw config_error("backend must be dirichlet or periodic");
    if (!quad.empty()) cfg.rule = parse_rule(quad, 1);
    man.params["n"] = n;
    man.params["s"] = s;
    man.params["eps"] = eps;
    man.params["tau"] = tau;
    man.params["t_end"] = t_end;
    man.params["backend"] = backend;

    StopWatch sw;
    AllenCahnResult res = run_allen_cahn(cfg);
    man.timings["run_seconds"] = sw.seconds();
    man.timings["cg_iterations"] = res.total_cg_iterations;

    std::ofstream os(out);
    if (!os) throw format_error("cannot write " + out);
    os << man.csv_lines() << "t,mass,kink_position\n";
    for (const auto& row : res.trace)
        os << fmt17(row.time) << "," << fmt17(row.mass) << "," << fmt17(row.interface_position)
           << "\n";
    for (const auto& [t, g] : res.snapshots) {
        std::string path = out + ".t" + fmt17(t) + ".grid";
        save_grid(g, path);
    }
    std::printf("time series written to %s (%zu rows, %zu snapshots)\n", out.c_str(),
                res.trace.size(), res.snapshots.size());
    return 0;
}

int cmd_denoise(const std::string& in, double s, double alpha, const std::string& backend,
                const std::string& out) {
    Manifest man;
    man.subcommand = "denoise";
    DenoiseConfig cfg;
    cfg.s = s;
    cfg.alpha = alpha;
    if (backend == "periodic")
        cfg.backend = Backend::periodic;
    else if (backend == "dirichlet")
        cfg.backend =Ackend_check(backend);
    else
        throw config_error("backend must be dirichlet or periodic");
    man.params["in"] = in;
    man.params["s"] = s;
    man.params["alpha"] = alpha;
    man.params["backend"] = backend;

    GridFunction g = load_pgm(in, s);
    StopWatch sw;
    DenoiseResult res = denoise(g, cfg);
    man.timings["solve_seconds"] = sw.seconds();
    man.timings["cg_iterations"] = res.report.iterations;
    save_pgm(res.u, out);
    man.write_sidecar(out);
    std::printf("denoised %s -> %s\n", in.c_str(), out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice fractional Laplacian toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: hardware)");

    KernelSource ksrc;
    std::string out_path;

    auto* kernel_cmd = app.add_subcommand("kernel", "precompute a convolution kernel");
    ksrc.add_inline_flags(kernel_cmd, true);
    kernel_cmd->add_option("--out", out_path, "kernel cache file")->required();

    KernelSource solve_src;
    std::string domain = "cube", rhs = "const:1";
    double tol = 1e-8;
    std::int64_t max_iter = 100000;
    std::string out_grid, out_report;
    auto* solve_cmd = app.add_subcommand("solve", "Dirichlet problem on a masked domain");
    solve_src.add_inline_flags(solve_cmd, false);
    solve_cmd->add_option("--kernel", solve_src.kernel_file, "precomputed kernel file");
    solve_cmd->add_option("--domain", domain, "cube | disc:r | lshape | mask:file");
    solve_cmd->add_option("--rhs", rhs, "const:v | file:path");
    solve_cmd->add_option("--tol", tol, "residual tolerance");
    solve_cmd->add_option("--max-iter", max_iter, "iteration cap");
    solve_cmd->add_option("--out-grid", out_grid, "solution grid file");
    solve_cmd->add_option("--out-report", out_report, "CSV report file");

    int bench_dim = 2;
    std::string s_list = "0.5", n_list, geometry = "disc", bench_quad, bench_out;
    auto* bench_cmd = app.add_subcommand("bench", "convergence study");
    bench_cmd->add_option("--dim", bench_dim, "dimension");
    bench_cmd->add_option("--s-list", s_list, "comma-separated exponents");
    bench_cmd->add_option("--n-list", n_list, "comma-separated ascending grid sizes")->required();
    bench_cmd->add_option("--geometry", geometry, "disc | lshape");
    bench_cmd->add_option("--quad", bench_quad, "quadrature rule override");
    bench_cmd->add_option("--out", bench_out, "CSV output")->required();

    std::int64_t ac_n = 1024;
    double ac_s = 0.5, ac_eps = 2e-3, ac_tau = 1e-3, ac_tend = 40.0;
    std::string ac_backend = "dirichlet", ac_quad, ac_out;
    std::vector<double> ac_snapshots;
    auto* ac_cmd = app.add_subcommand("allen-cahn", "phase-field evolution in one dimension");
    ac_cmd->add_option("--n", ac_n, "lattice points");
    ac_cmd->add_option("--s", ac_s, "fractional exponent");
    ac_cmd->add_option("--eps", ac_eps, "interface width");
    ac_cmd->add_option("--tau", ac_tau, "time step");
    ac_cmd->add_option("--t-end", ac_tend, "simulated time");
    ac_cmd->add_option("--backend", ac_backend, "dirichlet | periodic");
    ac_cmd->add_option("--quad", ac_quad, "quadrature rule override");
    ac_cmd->add_option("--snapshot", ac_snapshots, "state dump times (repeatable)");
    ac_cmd->add_option("--out", ac_out, "CSV time series")->required();

    std::string dn_in, dn_backend = "periodic", dn_out;
    double dn_s = 0.42, dn_alpha = 20.0 * M_PI;
    auto* dn_cmd = app.add_subcommand("denoise", "variational image smoothing");
    dn_cmd->add_option("--in", dn_in, "input PGM image")->required();
    dn_cmd->add_option("--s", dn_s, "fractional exponent");
    dn_cmd->add_option("--alpha", dn_alpha, "data fidelity weight");
    dn_cmd->add_option("--backend", dn_backend, "dirichlet | periodic");
    dn_cmd->add_option("--out", dn_out, "output PGM image")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (threads > 0) set_thread_count(threads);
        if (*kernel_cmd) return cmd_kernel(ksrc, out_path);
        if (*solve_cmd)
            return cmd_solve(solve_src, domain, rhs, tol, max_iter, out_grid, out_report);
        if (*bench_cmd) return cmd_bench(bench_dim, s_list, n_list, geometry, bench_quad, bench_out);
        if (*ac_cmd)
            return cmd_allen_cahn(ac_n, ac_s, ac_eps, ac_tau, ac_tend, ac_backend, ac_quad,
                                  ac_snapshots, ac_out);
        if (*dn_cmd) return cmd_denoise(dn_in, dn_s, dn_alpha, dn_backend, dn_out);
    } catch (const config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const geometry_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const shape_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const format_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const numerical_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
    return 0;
}
