#include "brw/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <sstream>

#include "brw/analysis.hpp"
#include "brw/builtin_models.hpp"
#include "brw/csv.hpp"
#include "brw/errors.hpp"
#include "brw/first_passage.hpp"
#include "brw/model_io.hpp"
#include "brw/simulate.hpp"
#include "brw/tail_solver.hpp"
#include "brw/verify.hpp"

namespace brw {

namespace {

constexpr const char* kToolVersion = "brw 0.1.0";

std::string iso_now() {
    char buf[32];
    const std::time_t t = std::time(nullptr);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string join_args(const std::vector<std::string>& args) {
    std::string s = "brw";
    for (const auto& a : args) s += " " + a;
    return s;
}

int default_workers() {
    if (const char* env = std::getenv("BRW_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    return 1;
}

ModelSpec load_model_arg(const std::string& path) {
    if (path.rfind("builtin:", 0) == 0) return builtin_model(path.substr(8));
    return load_model_file(path);
}

std::string out_path(const std::string& out_dir, const std::string& out) {
    if (out.empty() || out_dir.empty() || out.front() == '/') return out;
    return out_dir + "/" + out;
}

struct CommonManifest {
    std::string command, model_path;
    long long seed = 0;
    int workers = 1;
};

void finish_output(const CsvWriter& csv, const std::string& path, const CommonManifest& mf,
                   const std::vector<ManifestEntry>& extra) {
    csv.write_file(path);
    std::vector<ManifestEntry> entries = {
        {"command", mf.command},
        {"model", mf.model_path},
        {"tool_version", kToolVersion},
        {"master_seed", std::to_string(mf.seed)},
        {"workers", std::to_string(mf.workers)},
        {"timestamp", iso_now()},
    };
    entries.insert(entries.end(), extra.begin(), extra.end());
    write_manifest(path, entries);
}

// ---- solve ----
int cmd_solve(const ModelSpec& model, const std::string& model_path, int horizon, double tol,
              int min_report, const std::string& out, const CommonManifest& mf) {
    const TailTable t = solve_tail_M(model, horizon, tol, min_report);
    CsvWriter csv;
    csv.meta("tool", kToolVersion);
    csv.meta("model", model_path);
    csv.meta("label", model.label);
    csv.meta("horizon", static_cast<long long>(t.horizon));
    csv.meta("tol", t.tolerance);
    csv.meta("n_rep", static_cast<long long>(t.report_limit));
    csv.meta("rho", t.rho_value);
    csv.meta("bracket_gap", t.bracket_gap);
    csv.meta("residual_scale", "ell");
    csv.header({"n", "u", "ell", "residual", "bracket_gap"});
    for (int n = 0; n <= t.report_limit; ++n) {
        const double resid = n >= 1 ? tail_residual_ell(t, model, n) : 0.0;
        csv.row({std::to_string(n), CsvWriter::num(t.u(n)), CsvWriter::num(t.ell_at(n)),
                 CsvWriter::num(resid), CsvWriter::num(t.bracket_gap)});
    }
    if (!out.empty()) {
        finish_output(csv, out, mf, {{"horizon", std::to_string(horizon)},
                                     {"tol", CsvWriter::num(tol)}});
    } else {
        std::cout << csv.text();
    }
    return 0;
}

// ---- solve --first-passage ----
int cmd_solve_fp(const ModelSpec& model, const std::string& model_path, double s,
                 const std::vector<int>& levels, double tol, const std::string& out,
                 const CommonManifest& mf) {
    CsvWriter csv;
    csv.meta("tool", kToolVersion);
    csv.meta("model", model_path);
    csv.meta("s", s);
    csv.meta("tol", tol);
    csv.header({"n", "s", "phi", "depth", "truncation_bound"});
    for (int n : levels) {
        const auto sol = first_passage_pgf(model.jump, s, n, tol);
        csv.row({std::to_string(n), CsvWriter::num(s), CsvWriter::num(sol.value()),
                 std::to_string(sol.depth), CsvWriter::num(sol.truncation_bound)});
    }
    if (!out.empty()) finish_output(csv, out, mf, {});
    else std::cout << csv.text();
    return 0;
}

// ---- simulate ----
int cmd_simulate(const ModelSpec& model, const std::string& model_path, const SimConfig& cfg,
                 const std::vector<int>& levels, double c_speed, int g_n, double a_ratio,
                 const std::string& out, const CommonManifest& mf) {
    CsvWriter csv;
    csv.meta("tool", kToolVersion);
    csv.meta("model", model_path);
    csv.meta("reps", cfg.replications);
    csv.meta("seed", static_cast<long long>(cfg.master_seed));
    csv.meta("max_gen", static_cast<long long>(cfg.max_generations));
    csv.meta("pop_cap", cfg.population_cap);
    csv.header({"level", "point", "stderr", "ci_low", "ci_high", "reps", "successes", "excluded"});
    auto emit = [&](int level, const Estimate& e, double point, double se) {
        csv.row({std::to_string(level), CsvWriter::num(point), CsvWriter::num(se),
                 CsvWriter::num(e.ci_low), CsvWriter::num(e.ci_high),
                 std::to_string(e.replications_used), std::to_string(e.successes),
                 std::to_string(e.excluded)});
    };
    if (c_speed > 0.0 && g_n > 0) {
        csv.meta("mode", "g");
        csv.meta("c", c_speed);
        const GEstimate ge = estimate_g(model, c_speed, g_n, cfg);
        emit(ge.n, ge.prob, ge.g, ge.g_stderr);
        if (ge.noise_dominated)
            std::cerr << "warning: g estimate is noise-dominated; prefer the exact route\n";
    } else if (a_ratio > 0.0) {
        csv.meta("mode", "conditional");
        csv.meta("a", a_ratio);
        const auto est = estimate_conditional(model, a_ratio, levels, cfg);
        for (std::size_t i = 0; i < levels.size(); ++i)
            emit(levels[i], est[i], est[i].point, est[i].stderr_);
    } else {
        csv.meta("mode", "tail");
        const auto est = estimate_tail_M(model, levels, cfg);
        long long excluded = 0;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            emit(levels[i], est[i], est[i].point, est[i].stderr_);
            excluded += est[i].excluded;
        }
        if (excluded > cfg.replications / 1000)
            std::cerr << "warning: censored fraction exceeds 1e-3; raise --max-gen/--pop-cap\n";
    }
    if (!out.empty()) finish_output(csv, out, mf, {});
    else std::cout << csv.text();
    return 0;
}

// ---- scan ----
int cmd_scan(const ModelSpec& model, const std::string& model_path, const std::string& route,
             std::vector<double> c_grid, std::vector<int> n_grid, const SimConfig& cfg,
             const std::string& out, const CommonManifest& mf) {
    if (c_grid.empty()) c_grid = {0.3, 0.45, 0.6, 0.75, 0.9};
    if (n_grid.empty()) n_grid = {20, 40, 60};
    const ScanRoute r =
        route == "exact" ? ScanRoute::exact_special : ScanRoute::monte_carlo;
    const PhaseScan scan = phase_scan(model, c_grid, n_grid, r,
                                      r == ScanRoute::monte_carlo ? &cfg : nullptr);
    CsvWriter csv;
    csv.meta("tool", kToolVersion);
    csv.meta("model", model_path);
    csv.meta("route", route);
    csv.meta("level_convention", "ceil(cn)");
    csv.meta("slope_tolerance", scan.slope_tolerance);
    if (scan.reference_threshold) csv.meta("reference_threshold", *scan.reference_threshold);
    csv.header({"c", "n", "g", "stderr", "class"});
    for (std::size_t ci = 0; ci < scan.c_grid.size(); ++ci)
        for (std::size_t ni = 0; ni < scan.n_grid.size(); ++ni)
            csv.row({CsvWriter::num(scan.c_grid[ci]), std::to_string(scan.n_grid[ni]),
                     CsvWriter::num(scan.g[ci][ni]), CsvWriter::num(scan.g_stderr[ci][ni]),
                     phase_class_name(scan.classification[ci])});
    if (!out.empty()) finish_output(csv, out, mf, {});
    else std::cout << csv.text();
    return 0;
}

// ---- report ----
int cmd_report(const ModelSpec& model, const SimConfig& cfg, int horizon, double tol) {
    std::ostringstream os;
    os << "model " << model.label << "\n";
    if (model.mode == Mode::subcritical) {
        const TailTable t = solve_tail_M(model, horizon, tol);
        const int R = model.jump.right_range();
        double min_last_half = 1e300, sup = 0.0;
        for (int n = 1; n <= t.report_limit; ++n) {
            sup = std::max(sup, t.ell[n]);
            if (n >= t.report_limit / 2) min_last_half = std::min(min_last_half, t.ell[n]);
        }
        const bool t1a = sup <= 1.0 + 10.0 * tol && min_last_half > 0.0;
        os << "T1a bounded ell: " << (t1a ? "pass" : "fail") << " (sup " << sup
           << ", min last half " << min_last_half << ")\n";
        const KappaEstimate k = kappa_estimate(t, R);
        if (model.jump.nearly_right_continuous()) {
            os << "T1b kappa limit: " << (!k.oscillation ? "pass" : "fail") << " (kappa "
               << k.kappa_hat << ", half width " << k.half_width << ")\n";
        } else {
            os << "T1b kappa limit: inconclusive (jump not nearly right-continuous; oscillation "
               << (k.oscillation ? "detected" : "not detected") << ")\n";
        }
        const int N = std::min(120, t.report_limit);
        const auto lb = ell_bar_table(model.jump, model.offspring.mean(), N, 1e-12);
        const double gap_end = std::abs(std::log(lb[N])) / N;
        const double gap_mid = std::abs(std::log(lb[N / 2])) / (N / 2);
        const bool t1c = gap_end < 0.05 && gap_end <= gap_mid + 1e-12;
        os << "T1c rate identity: " << (t1c ? "pass" : "fail") << " (gap " << gap_end
           << " at n=" << N << ")\n";
        const bool special = model.offspring.max_children() <= 1 && R == 1;
        std::vector<double> cs = {0.3, 0.45, 0.6, 0.75, 0.9};
        std::vector<int> ns = {20, 40, 60};
        PhaseScan scan;
        if (special) {
            scan = phase_scan(model, cs, ns, ScanRoute::exact_special);
        } else {
            SimConfig mc = cfg;
            mc.max_generations = std::max(mc.max_generations, 60);
            scan = phase_scan(model, cs, ns, ScanRoute::monte_carlo, &mc);
        }
        bool any_plateau = false, any_decay = false;
        double c_low = 0.0, c_high = 0.0;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (scan.classification[i] == PhaseClass::plateau) {
                any_plateau = true;
                c_low = std::max(c_low, cs[i]);
            }
            if (scan.classification[i] == PhaseClass::decay) {
                any_decay = true;
                if (c_high == 0.0) c_high = cs[i];
            }
        }
        os << "T2a plateau regime: " << (any_plateau ? "pass" : "inconclusive")
           << " (largest plateau c = " << c_low << ")\n";
        os << "T2c decay regime: " << ((any_decay && c_high < R) ? "pass" : "inconclusive");
        if (any_decay) os << " (smallest decay c = " << c_high << ", R = " << R << ")\n";
        else os << " (no decay certified on this grid, R = " << R << ")\n";
        os << "threshold bracket: [" << c_low << ", ";
        if (any_decay) os << c_high;
        else os << "?";
        os << "]";
        if (scan.reference_threshold) os << " (reference " << *scan.reference_threshold << ")";
        os << "\n";
        os << "P1.6 duality: not applicable (subcritical model)\n";
    } else {
        std::vector<int> levels = {1, 2, 3, 4, 5, 6};
        const DualityReport rep = duality_report(model, levels, cfg, horizon, tol);
        os << "q = " << rep.q << ", dual mean = " << rep.dual_mean << ", rho_bar = " << rep.rho_bar
           << "\n";
        double worst = 0.0;
        for (double z : rep.joint_z) worst = std::max(worst, std::abs(z));
        bool ell_ok = true;
        for (double e : rep.ell_bar)
            if (!(e > 0.0 && e <= rep.q + 1e-6)) ell_ok = false;
        os << "P1.6 duality: " << ((worst <= 4.0 && ell_ok) ? "pass" : "fail")
           << " (worst joint |z| = " << worst << ", acceptance " << rep.acceptance.point << ")\n";
    }
    std::cout << os.str();
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"subcritical branching random walk maximal-displacement toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    std::string out_dir;
    long long seed = 1;
    int workers = default_workers();
    std::string format = "csv";
    app.add_option("--out-dir", out_dir, "directory for outputs");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--workers", workers, "worker threads");
    app.add_option("--format", format, "output format (csv)");

    // validate
    auto* validate = app.add_subcommand("validate", "check a model file");
    std::string v_model;
    validate->add_option("model", v_model, "model file")->required();

    // solve
    auto* solve = app.add_subcommand("solve", "exact tail / first-passage solver");
    std::string s_model, s_out;
    int s_horizon = 400, s_min_report = 0;
    double s_tol = 1e-11;
    bool s_fp = false;
    double s_s = 0.8;
    std::vector<int> s_levels;
    solve->add_option("model", s_model)->required();
    solve->add_option("--horizon", s_horizon);
    solve->add_option("--tol", s_tol);
    solve->add_option("--min-report", s_min_report);
    solve->add_option("--out", s_out);
    solve->add_flag("--first-passage", s_fp, "solve E(s^tau_n) instead of the tail");
    solve->add_option("--s", s_s, "discount for --first-passage");
    solve->add_option("--levels", s_levels)->delimiter(',');

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimators");
    std::string m_model, m_out;
    long long m_reps = 100000;
    int m_max_gen = 400;
    long long m_pop_cap = 1 << 20;
    std::vector<int> m_levels = {1, 2, 3, 4, 5};
    double m_c = 0.0, m_a = 0.0;
    int m_n = 0;
    simulate->add_option("model", m_model)->required();
    simulate->add_option("--reps", m_reps);
    simulate->add_option("--max-gen", m_max_gen);
    simulate->add_option("--pop-cap", m_pop_cap);
    simulate->add_option("--levels", m_levels)->delimiter(',');
    simulate->add_option("--c", m_c, "speed for the g estimator");
    simulate->add_option("--n", m_n, "generation for the g estimator");
    simulate->add_option("--a", m_a, "ratio for the conditional estimator");
    simulate->add_option("--out", m_out);

    // scan
    auto* scan = app.add_subcommand("scan", "phase scan over (c, n)");
    std::string p_model, p_out, p_route = "exact";
    std::vector<double> p_cgrid;
    std::vector<int> p_ngrid;
    long long p_reps = 1000000;
    scan->add_option("model", p_model)->required();
    scan->add_option("--route", p_route)->check(CLI::IsMember({"exact", "mc"}));
    scan->add_option("--c-grid", p_cgrid)->delimiter(',');
    scan->add_option("--n-grid", p_ngrid)->delimiter(',');
    scan->add_option("--reps", p_reps);
    scan->add_option("--out", p_out);

    // report
    auto* report = app.add_subcommand("report", "pass/fail summary blocks for a model's limit laws");
    std::string r_model;
    int r_horizon = 600;
    long long r_reps = 1000000;
    report->add_option("model", r_model)->required();
    report->add_option("--horizon", r_horizon);
    report->add_option("--reps", r_reps);

    // verify
    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    bool q_quick = false;
    std::string q_fault;
    verify->add_flag("--quick", q_quick, "reduced-replication smoke run");
    verify->add_option("--inject-fault", q_fault)->group("");  // hidden test hook

    std::vector<const char*> argv;
    argv.push_back("brw");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    CommonManifest mf;
    mf.command = join_args(args);
    mf.seed = seed;
    mf.workers = workers;

    try {
        if (*validate) {
            const auto issues = validate_model_file(v_model);
            if (issues.empty()) {
                std::cout << "ok\n";
                return 0;
            }
            for (const auto& i : issues) std::cout << i << "\n";
            return 1;
        }
        if (*solve) {
            mf.model_path = s_model;
            const ModelSpec model = load_model_arg(s_model);
            if (s_fp) {
                if (s_levels.empty()) s_levels = {0, 1, 2, 3, 4, 5};
                return cmd_solve_fp(model, s_model, s_s, s_levels, std::min(s_tol, 1e-12),
                                    out_path(out_dir, s_out), mf);
            }
            return cmd_solve(model, s_model, s_horizon, s_tol, s_min_report,
                             out_path(out_dir, s_out), mf);
        }
        if (*simulate) {
            mf.model_path = m_model;
            const ModelSpec model = load_model_arg(m_model);
            SimConfig cfg;
            cfg.replications = m_reps;
            cfg.max_generations = m_max_gen;
            cfg.population_cap = m_pop_cap;
            cfg.master_seed = static_cast<std::uint64_t>(seed);
            cfg.workers = workers;
            return cmd_simulate(model, m_model, cfg, m_levels, m_c, m_n, m_a,
                                out_path(out_dir, m_out), mf);
        }
        if (*scan) {
            mf.model_path = p_model;
            const ModelSpec model = load_model_arg(p_model);
            SimConfig cfg;
            cfg.replications = p_reps;
            cfg.max_generations = 400;
            cfg.master_seed = static_cast<std::uint64_t>(seed);
            cfg.workers = workers;
            for (int n : p_ngrid) cfg.max_generations = std::max(cfg.max_generations, 2 * n);
            return cmd_scan(model, p_model, p_route, p_cgrid, p_ngrid, cfg,
                            out_path(out_dir, p_out), mf);
        }
        if (*report) {
            const ModelSpec model = load_model_arg(r_model);
            SimConfig cfg;
            cfg.replications = r_reps;
            cfg.max_generations = 60;
            cfg.population_cap = 50;
            cfg.master_seed = static_cast<std::uint64_t>(seed);
            cfg.workers = workers;
            return cmd_report(model, cfg, r_horizon, 1e-11);
        }
        if (*verify) {
            AcceptanceOptions opts;
            opts.workers = workers;
            opts.quick = q_quick;
            opts.fault = q_fault;
            const auto results = run_acceptance(opts);
            std::cout << format_results(results);
            if (all_passed(results)) return 0;
            std::cout << "failed criteria:";
            for (const auto& r : results)
                if (!r.pass) std::cout << " " << r.id;
            std::cout << "\n";
            return 3;
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        for (const auto& i : e.issues) std::cerr << i << "\n";
        return 1;
    } catch (const ConvergenceError& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace brw
