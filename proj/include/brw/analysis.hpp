#pragma once

#include <optional>
#include <string>
#include <vector>

#include "brw/model.hpp"
#include "brw/simulate.hpp"
#include "brw/tail_solver.hpp"

namespace brw {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    int window_lo = 0, window_hi = 0;
    double target = 0.0;  // log rho
    double gap = 0.0;     // |-slope - log rho|
    double max_abs_residual = 0.0;
};

/// Least-squares line on (n, log u(n)) over [window_lo, window_hi] (table
/// indices). Needs at least 8 points and finite log values.
RateFit fit_decay_rate(const TailTable& table, int window_lo, int window_hi);
RateFit fit_decay_rate(const std::vector<int>& levels, const std::vector<double>& log_values,
                       double log_rho);

struct KappaEstimate {
    double kappa_hat = 0.0;
    bool oscillation = false;
    double half_width = 0.0;  // max - min of ell over the last 2R points
    double net_drift = 0.0;   // |ell(N_rep) - ell(N_rep - 2R)|
};

/// kappa_hat = ell(N_rep); flags oscillation when the terminal window's spread
/// dwarfs its net drift (periodic ell never settles, so the drift vanishes
/// while the spread stays put).
KappaEstimate kappa_estimate(const TailTable& table, int right_range);
KappaEstimate kappa_estimate(const std::vector<double>& ell_values, int right_range, double tol);

enum class PhaseClass { plateau, decay, inconclusive };
enum class ScanRoute { exact_special, monte_carlo };

struct PhaseScan {
    std::vector<double> c_grid;
    std::vector<int> n_grid;
    std::vector<std::vector<double>> g;         // [c][n]
    std::vector<std::vector<double>> g_stderr;  // zeros on the exact route
    std::vector<std::vector<bool>> usable;      // cell carries real evidence
    std::vector<PhaseClass> classification;     // per c
    std::vector<double> slope;                  // log-g slope per c over usable cells
    std::vector<double> slope_stderr;           // propagated from the cell stderrs
    std::optional<double> reference_threshold;  // sqrt(1-m^2) for the special model
    double slope_tolerance = 0.005;
    ScanRoute route = ScanRoute::exact_special;
    long long mc_replications = 0;              // 0 on the exact route
};

/// Fills g(c,n) over the grid and classifies each c on its *usable* cells
/// (exact cells with g > 0; Monte Carlo cells with hits and stderr <= g/4 —
/// an empty MC cell says nothing except through its rule-of-three bound):
///   plateau: >= 2 usable cells, last-usable-third mean within
///            [0.5 * first-usable-third mean, 1.05], |log-g slope| <= 0.005,
///            and enough power to measure flatness (slope stderr <= 0.005);
///   decay:   slope + 2 * slope_stderr < -0.005 over >= 2 usable cells, or the
///            deepest grid cell's upper bound (exact value, or rho^cn * 3/reps
///            for a zero-hit MC cell) under a quarter of the first-third mean;
///   otherwise inconclusive.
/// The exact route requires the binary-offspring nearest-neighbor model.
PhaseScan phase_scan(const ModelSpec& model, const std::vector<double>& c_grid,
                     const std::vector<int>& n_grid, ScanRoute route,
                     const SimConfig* mc_config = nullptr);

const char* phase_class_name(PhaseClass c);

struct ZScore {
    int level = 0;
    double z = 0.0;
    bool exact_match = false;  // stderr 0 handled as equality check
    bool excluded = false;     // level outside the certified window
};

struct ZReport {
    std::vector<ZScore> scores;
    double fraction_within_2 = 0.0;
    double fraction_within_4 = 0.0;
    int compared = 0;
};

/// z = (point - u(n))/stderr per level against the exact table.
ZReport reconcile(const TailTable& exact, const std::vector<int>& levels,
                  const std::vector<Estimate>& mc);

struct DualityReport {
    double q = 0.0;
    double dual_mean = 0.0;
    double rho_bar = 0.0;
    std::vector<int> levels;
    std::vector<double> u_dual;          // exact dual-model tail
    std::vector<double> ell_bar;         // rho_bar^n (u_bar(n) - (1-q)) = q * ell_dual(n)
    std::vector<Estimate> joint_mc;      // P(M >= n AND extinction), Monte Carlo
    std::vector<double> joint_exact;     // q * u_dual(n)
    std::vector<double> joint_z;
    Estimate acceptance;
    double bias_bound = 0.0;
    bool subcritical_passthrough = false;
};

/// Supercritical model conditioned on extinction versus its exact dual.
/// Subcritical input degenerates to the plain tail report (q = 1).
DualityReport duality_report(const ModelSpec& model, const std::vector<int>& levels,
                             const SimConfig& cfg, int horizon = 400, double tol = 1e-11);

}  // namespace brw
