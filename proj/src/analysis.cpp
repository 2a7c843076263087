#include "brw/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "brw/errors.hpp"
#include "brw/special.hpp"

namespace brw {

namespace {

bool is_special_model(const ModelSpec& model) {
    const auto& off = model.offspring;
    const bool binary = off.max_children() <= 1;
    const auto& jump = model.jump;
    const bool nn = jump.entries().size() == 2 && jump.prob_at(1) == 0.5 && jump.prob_at(-1) == 0.5;
    return binary && nn && model.mode == Mode::subcritical;
}

}  // namespace

RateFit fit_decay_rate(const std::vector<int>& levels, const std::vector<double>& log_values,
                       double log_rho) {
    if (levels.size() != log_values.size() || levels.size() < 8)
        throw DomainError("fit_decay_rate: need at least 8 aligned points");
    for (double v : log_values)
        if (!std::isfinite(v))
            throw DomainError("fit_decay_rate: nonpositive tail value in the window");
    const std::size_t n = levels.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += levels[i];
        sy += log_values[i];
        sxx += static_cast<double>(levels[i]) * levels[i];
        sxy += levels[i] * log_values[i];
    }
    const double denom = n * sxx - sx * sx;
    RateFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = log_values[i] - (fit.intercept + fit.slope * levels[i]);
        ss += r * r;
        fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(r));
    }
    const double sigma2 = n > 2 ? ss / (n - 2) : 0.0;
    fit.stderr_slope = std::sqrt(sigma2 * n / denom);
    fit.window_lo = levels.front();
    fit.window_hi = levels.back();
    fit.target = log_rho;
    fit.gap = std::abs(-fit.slope - log_rho);
    return fit;
}

RateFit fit_decay_rate(const TailTable& table, int window_lo, int window_hi) {
    if (window_lo < 1 || window_hi > table.report_limit || window_hi - window_lo + 1 < 8)
        throw DomainError("fit_decay_rate: window must sit inside the certified report window");
    std::vector<int> ns;
    std::vector<double> ys;
    for (int n = window_lo; n <= window_hi; ++n) {
        ns.push_back(n);
        ys.push_back(table.log_u(n));
    }
    return fit_decay_rate(ns, ys, table.log_rho);
}

KappaEstimate kappa_estimate(const std::vector<double>& ell_values, int right_range, double tol) {
    if (ell_values.size() < static_cast<std::size_t>(2 * right_range + 1))
        throw DomainError("kappa_estimate: window shorter than 2R+1");
    KappaEstimate k;
    const std::size_t last = ell_values.size() - 1;
    k.kappa_hat = ell_values[last];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = last - 2 * right_range + 1; i <= last; ++i) {
        lo = std::min(lo, ell_values[i]);
        hi = std::max(hi, ell_values[i]);
    }
    k.half_width = hi - lo;
    k.net_drift = std::abs(ell_values[last] - ell_values[last - 2 * right_range]);
    k.oscillation = k.half_width > 10.0 * k.net_drift + 50.0 * tol;
    return k;
}

KappaEstimate kappa_estimate(const TailTable& table, int right_range) {
    std::vector<double> window(table.ell.begin(), table.ell.begin() + table.report_limit + 1);
    return kappa_estimate(window, right_range, table.tolerance);
}

const char* phase_class_name(PhaseClass c) {
    switch (c) {
        case PhaseClass::plateau: return "plateau";
        case PhaseClass::decay: return "decay";
        default: return "inconclusive";
    }
}

PhaseScan phase_scan(const ModelSpec& model, const std::vector<double>& c_grid,
                     const std::vector<int>& n_grid, ScanRoute route,
                     const SimConfig* mc_config) {
    if (c_grid.empty() || n_grid.empty()) throw DomainError("phase_scan: empty grid");
    PhaseScan scan;
    scan.c_grid = c_grid;
    scan.n_grid = n_grid;
    scan.route = route;
    const double m = model.offspring.mean();
    const double log_rho = std::log(rho(model.jump, 1.0 / m));

    if (route == ScanRoute::exact_special) {
        if (!is_special_model(model))
            throw ConfigError("phase_scan: exact route needs the binary nearest-neighbor model");
        scan.reference_threshold = std::sqrt(1.0 - m * m);
        for (double c : c_grid) {
            std::vector<double> row, err;
            std::vector<bool> use;
            for (int n : n_grid) {
                const int level = static_cast<int>(std::ceil(c * n - 1e-9));
                double g;
                if (level <= 0) g = std::exp(c * n * log_rho);
                else g = std::exp(c * n * log_rho + special_Mn_log_tail(m, n, level));
                row.push_back(g);
                err.push_back(0.0);
                use.push_back(g > 0.0);
            }
            scan.g.push_back(std::move(row));
            scan.g_stderr.push_back(std::move(err));
            scan.usable.push_back(std::move(use));
        }
    } else {
        if (!mc_config) throw ConfigError("phase_scan: monte-carlo route needs a SimConfig");
        if (is_special_model(model)) scan.reference_threshold = std::sqrt(1.0 - m * m);
        scan.mc_replications = mc_config->replications;
        const auto grid = estimate_g_grid(model, c_grid, n_grid, *mc_config);
        std::size_t idx = 0;
        for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
            std::vector<double> row, err;
            std::vector<bool> use;
            for (std::size_t ni = 0; ni < n_grid.size(); ++ni, ++idx) {
                row.push_back(grid[idx].g);
                err.push_back(grid[idx].g_stderr);
                use.push_back(grid[idx].prob.successes > 0 &&
                              grid[idx].g_stderr <= 0.25 * grid[idx].g);
            }
            scan.g.push_back(std::move(row));
            scan.g_stderr.push_back(std::move(err));
            scan.usable.push_back(std::move(use));
        }
    }

    // Deterministic classification over the usable subsequence of each row.
    const std::size_t k = n_grid.size();
    for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
        const auto& row = scan.g[ci];
        std::vector<std::size_t> live;
        for (std::size_t i = 0; i < k; ++i)
            if (scan.usable[ci][i]) live.push_back(i);

        double slope = 0.0, slope_se = 0.0;
        PhaseClass cls = PhaseClass::inconclusive;
        if (!live.empty()) {
            const std::size_t ku = live.size();
            const std::size_t third = std::max<std::size_t>(1, ku / 3);
            double first_mean = 0.0, last_mean = 0.0;
            for (std::size_t i = 0; i < third; ++i) first_mean += row[live[i]];
            for (std::size_t i = ku - third; i < ku; ++i) last_mean += row[live[i]];
            first_mean /= third;
            last_mean /= third;
            if (ku >= 2) {
                double sx = 0, sy = 0, sxx = 0, sxy = 0;
                for (std::size_t i : live) {
                    const double n = n_grid[i];
                    sx += n;
                    sy += std::log(row[i]);
                    sxx += n * n;
                    sxy += n * std::log(row[i]);
                }
                const double denom = ku * sxx - sx * sx;
                slope = (ku * sxy - sx * sy) / denom;
                // propagate per-cell relative stderrs through the LS weights
                const double xbar = sx / ku;
                const double sxx_c = sxx - ku * xbar * xbar;
                double var = 0.0;
                for (std::size_t i : live) {
                    const double sig = row[i] > 0.0 ? scan.g_stderr[ci][i] / row[i] : 0.0;
                    const double a = (n_grid[i] - xbar) / sxx_c;
                    var += a * a * sig * sig;
                }
                slope_se = std::sqrt(var);
                if (last_mean >= 0.5 * first_mean && last_mean <= 1.05 &&
                    std::abs(slope) <= scan.slope_tolerance &&
                    slope_se <= scan.slope_tolerance) {
                    cls = PhaseClass::plateau;
                } else if (slope + 2.0 * slope_se < -scan.slope_tolerance) {
                    cls = PhaseClass::decay;
                }
            }
            if (cls == PhaseClass::inconclusive) {
                // The deepest grid cell can still certify decay through its
                // upper bound: the exact value, or rho^cn * 3/reps when the
                // Monte Carlo cell saw nothing (rule of three).
                const std::size_t last = k - 1;
                double bound = row[last];
                if (route == ScanRoute::monte_carlo && !scan.usable[ci][last]) {
                    bound = std::exp(c_grid[ci] * n_grid[last] * log_rho) * 3.0 /
                            static_cast<double>(scan.mc_replications);
                    bound = std::max(bound, row[last]);
                }
                if (bound < 0.25 * first_mean) cls = PhaseClass::decay;
            }
        }
        scan.slope.push_back(slope);
        scan.slope_stderr.push_back(slope_se);
        scan.classification.push_back(cls);
    }
    return scan;
}

ZReport reconcile(const TailTable& exact, const std::vector<int>& levels,
                  const std::vector<Estimate>& mc) {
    if (levels.size() != mc.size()) throw DomainError("reconcile: levels/estimates mismatch");
    ZReport rep;
    int within2 = 0, within4 = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        ZScore zs;
        zs.level = levels[i];
        if (levels[i] < 0 || levels[i] > exact.report_limit) {
            zs.excluded = true;
            rep.scores.push_back(zs);
            continue;
        }
        const double u = exact.u(levels[i]);
        if (mc[i].stderr_ == 0.0) {
            zs.exact_match = mc[i].point == u;
            zs.z = zs.exact_match ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            zs.z = (mc[i].point - u) / mc[i].stderr_;
        }
        ++rep.compared;
        if (std::abs(zs.z) <= 2.0) ++within2;
        if (std::abs(zs.z) <= 4.0) ++within4;
        rep.scores.push_back(zs);
    }
    if (rep.compared > 0) {
        rep.fraction_within_2 = static_cast<double>(within2) / rep.compared;
        rep.fraction_within_4 = static_cast<double>(within4) / rep.compared;
    }
    return rep;
}

DualityReport duality_report(const ModelSpec& model, const std::vector<int>& levels,
                             const SimConfig& cfg, int horizon, double tol) {
    DualityReport rep;
    rep.levels = levels;
    if (model.mode == Mode::subcritical) {
        rep.subcritical_passthrough = true;
        rep.q = 1.0;
        const TailTable t = solve_tail_M(model, horizon, tol);
        rep.rho_bar = t.rho_value;
        rep.dual_mean = model.offspring.mean();
        for (int n : levels) {
            rep.u_dual.push_back(t.u(n));
            rep.ell_bar.push_back(t.ell_at(n));
            rep.joint_exact.push_back(t.u(n));
        }
        return rep;
    }
    rep.q = extinction_probability(model.offspring);
    const OffspringDistribution dual = dual_offspring(model.offspring);
    rep.dual_mean = dual.mean();
    ModelSpec dual_model =
        ModelSpec::create(model.jump, dual, Mode::subcritical, model.label + "-dual");
    const TailTable t = solve_tail_M(dual_model, horizon, tol);
    rep.rho_bar = t.rho_value;

    const ConditionedTails cond = simulate_conditioned_on_extinction(model, levels, cfg, rep.q);
    rep.acceptance = cond.acceptance;
    rep.bias_bound = cond.bias_bound;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const int n = levels[i];
        const double ud = t.u(n);
        rep.u_dual.push_back(ud);
        rep.ell_bar.push_back(rep.q * t.ell_at(n));  // rho_bar^n (u_bar - (1-q)) = q ell_dual
        rep.joint_exact.push_back(rep.q * ud);
        rep.joint_mc.push_back(cond.joint_tail[i]);
        const auto& est = cond.joint_tail[i];
        rep.joint_z.push_back(est.stderr_ > 0.0 ? (est.point - rep.q * ud) / est.stderr_ : 0.0);
    }
    return rep;
}

}  // namespace brw
