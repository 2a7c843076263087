#include "brw/tail_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "brw/errors.hpp"

namespace brw {

namespace testing {
std::atomic<Fault> fault_injection{Fault::none};
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One horizon's worth of solver state. All arithmetic runs on ell(n) = rho^n u(n):
// the per-term building block is G(j, ell) = rho^j Q(rho^-j ell), which collapses
// to m*ell once rho^-j is beyond double range (the neglected H-correction is
// below 1e-250 relative there).
struct Core {
    const ModelSpec* model;
    double rho_v, m, p0;
    int N;
    int n_direct;                  // largest j with rho^j representable comfortably
    std::vector<double> pow_pos;   // rho^j, j = 0..n_direct
    std::vector<double> pow_neg;   // rho^-j
    std::vector<double> qc;        // Q(s) = sum q_i s^(i+1)
    double q_sign = 1.0;
    struct Term {
        int offset;
        double a_rho_y;  // a_y rho^y
        double a;
    };
    std::vector<Term> terms;

    Core(const ModelSpec& mod, int horizon, double rho_value) {
        model = &mod;
        rho_v = rho_value;
        m = mod.offspring.mean();
        p0 = mod.offspring.p(0);
        N = horizon;
        n_direct = std::min<int>(horizon, static_cast<int>(250.0 * std::log(10.0) / std::log(rho_v)));
        pow_pos.resize(n_direct + 1);
        pow_neg.resize(n_direct + 1);
        pow_pos[0] = pow_neg[0] = 1.0;
        for (int j = 1; j <= n_direct; ++j) {
            pow_pos[j] = pow_pos[j - 1] * rho_v;
            pow_neg[j] = pow_neg[j - 1] / rho_v;
        }
        qc = offspring_Q_coefficients(mod.offspring);
        if (testing::fault_injection.load(std::memory_order_relaxed) == testing::Fault::q_sign)
            q_sign = -1.0;
        for (const auto& e : mod.jump.entries())
            terms.push_back({e.offset, e.prob * std::pow(rho_v, e.offset), e.prob});
    }

    double Q(double s) const {
        double v;
        if (s > 0.5) {
            v = 1.0 - offspring_pgf(model->offspring, 1.0 - s);
        } else {
            double acc = 0.0;
            for (std::size_t i = qc.size(); i-- > 0;) acc = acc * s + qc[i];
            v = acc * s;
        }
        return q_sign * v;
    }

    double G(int j, double ell) const {
        if (j > n_direct) return q_sign * m * ell;
        return pow_pos[j] * Q(pow_neg[j] * ell);
    }

    // T(ell)(n) with the boundary u = 1 below 1 and the 0 closure above N.
    double site(const std::vector<double>& ell, int n) const {
        double tot = 0.0;
        for (const auto& t : terms) {
            const int j = n - t.offset;
            if (j <= 0) {
                tot += t.a * pow_pos[n] * q_sign * (1.0 - p0);  // Q(1) = 1 - p0
            } else if (j > N) {
                // closure: ell = 0
            } else {
                tot += t.a_rho_y * G(j, ell[j]);
            }
        }
        return tot;
    }
};

struct SolveResult {
    std::vector<double> ell;
    double gap = 0.0;
    int sweeps = 0;
    double contraction_ratio_max = 0.0;
    long long monotonicity_violations = 0;
};

SolveResult solve_at_horizon(const ModelSpec& model, int N, double tol, double rho_value) {
    Core core(model, N, rho_value);
    std::vector<double> lo(N + 1, 0.0), up(N + 1, 1.0);
    lo[0] = up[0] = 1.0;  // u(0) = 1, ell(0) = 1

    // Ascending sweeps converge in O(N/L) passes plus a log(1/tol) mixing term;
    // the budget is an order of magnitude above that so only a genuinely broken
    // system (or an injected fault) exhausts it.
    const int max_sweeps = 4000 + 10 * N;
    double prev_change_lo = -1.0, prev_change_up = -1.0;
    double ratio_max = 0.0;
    double gap = std::numeric_limits<double>::infinity();
    int sweeps = 0;
    long long mono_bad = 0;
    for (; sweeps < max_sweeps; ++sweeps) {
        // u-scale sup change this sweep, for the contraction certificate; the
        // lower iterate may only climb and the upper only descend.
        double change_lo = 0.0, change_up = 0.0;
        for (int n = 1; n <= N; ++n) {
            const double v = core.site(lo, n);
            if (v < lo[n] - 1e-15 * std::max(1.0, lo[n])) ++mono_bad;
            const double du = (v - lo[n]) * (n <= core.n_direct ? core.pow_neg[n] : 0.0);
            change_lo = std::max(change_lo, std::abs(du));
            lo[n] = v;
        }
        for (int n = 1; n <= N; ++n) {
            const double v = core.site(up, n);
            if (v > up[n] + 1e-15 * std::max(1.0, up[n])) ++mono_bad;
            const double du = (up[n] - v) * (n <= core.n_direct ? core.pow_neg[n] : 0.0);
            change_up = std::max(change_up, std::abs(du));
            up[n] = v;
        }
        // Ratios certify the contraction only while changes sit well above the
        // rounding floor; past that they are quotients of ~1-ulp jitter.
        if (sweeps >= 1) {
            if (prev_change_lo > 1e-13) ratio_max = std::max(ratio_max, change_lo / prev_change_lo);
            if (prev_change_up > 1e-13) ratio_max = std::max(ratio_max, change_up / prev_change_up);
        }
        prev_change_lo = change_lo;
        prev_change_up = change_up;
        gap = 0.0;
        for (int n = 1; n <= N; ++n) gap = std::max(gap, up[n] - lo[n]);
        if (gap <= tol) break;
    }
    if (!(gap <= tol)) throw ConvergenceError("solve_tail_M: sweep budget exceeded", gap);

    SolveResult r;
    r.ell.resize(N + 1);
    for (int n = 0; n <= N; ++n) r.ell[n] = 0.5 * (lo[n] + up[n]);
    r.gap = gap;
    r.sweeps = sweeps + 1;
    r.contraction_ratio_max = ratio_max;
    r.monotonicity_violations = mono_bad;
    return r;
}

}  // namespace

double TailTable::ell_at(int n) const {
    if (n <= 0) return n == 0 ? 1.0 : std::pow(rho_value, n);  // u = 1 below the origin
    if (n > horizon) return 0.0;
    return ell[n];
}

double TailTable::u(int n) const {
    if (n <= 0) return 1.0;
    if (n > horizon) return 0.0;
    return std::exp(log_u(n));
}

double TailTable::log_u(int n) const {
    if (n <= 0) return 0.0;
    if (n > horizon || ell[n] <= 0.0) return kNegInf;
    return -n * log_rho + std::log(ell[n]);
}

TailTable solve_tail_M(const ModelSpec& model, int horizon, double tol, int min_report) {
    if (model.mode != Mode::subcritical || !model.offspring.subcritical())
        throw DomainError("solve_tail_M: subcritical model required");
    const int L = model.jump.left_range();
    const int R = model.jump.right_range();
    if (horizon < 4 * (L + R))
        throw ConfigError("solve_tail_M: horizon must be at least 4(L+R) = " +
                          std::to_string(4 * (L + R)));
    if (!(tol >= 1e-13)) throw ConfigError("solve_tail_M: tol must be >= 1e-13");

    const double m = model.offspring.mean();
    const double rho_value = rho(model.jump, 1.0 / m);

    SolveResult main = solve_at_horizon(model, horizon, tol, rho_value);
    SolveResult wide = solve_at_horizon(model, 2 * horizon, tol, rho_value);

    // Closure influence decays per site at rate 1/rho; the doubling run is the
    // actual certificate, the formula is its a-priori cap.
    const int formula_margin =
        static_cast<int>(std::ceil(std::log(10.0 / tol) / std::log(rho_value))) + 2 * R;
    int n_rep = horizon - formula_margin;
    while (n_rep > 0) {
        bool ok = true;
        for (int n = 1; n <= n_rep; ++n) {
            if (std::abs(main.ell[n] - wide.ell[n]) > tol) {
                ok = false;
                break;
            }
        }
        if (ok) break;
        --n_rep;
    }
    if (n_rep < std::max(1, min_report))
        throw ConfigError("solve_tail_M: horizon too small for the requested report window "
                          "(certified N_rep = " + std::to_string(n_rep) + ")");

    TailTable t;
    t.ell = std::move(main.ell);
    t.rho_value = rho_value;
    t.log_rho = std::log(rho_value);
    t.offspring_mean = m;
    t.horizon = horizon;
    t.report_limit = n_rep;
    t.tolerance = tol;
    t.bracket_gap = main.gap;
    t.iterations = main.sweeps + wide.sweeps;
    t.contraction_ratio_max = main.contraction_ratio_max;
    t.monotonicity_violations = main.monotonicity_violations + wide.monotonicity_violations;

    Core core(model, horizon, rho_value);
    double worst = 0.0;
    for (int n = 1; n <= n_rep; ++n)
        worst = std::max(worst, std::abs(t.ell[n] - core.site(t.ell, n)));
    t.max_residual = worst;
    return t;
}

std::vector<double> ell_table(const TailTable& table, double rho_check) {
    if (std::abs(rho_check - table.rho_value) > 1e-9 * table.rho_value)
        throw ConfigError("ell_table: rho does not match the table's model");
    std::vector<double> out(table.ell.begin(), table.ell.begin() + table.report_limit + 1);
    double pw = 1.0;
    for (int n = 0; n <= table.report_limit; ++n) {
        if (pw < 1e280 && out[n] > 1.0 + 10.0 * table.tolerance * pw)
            throw ConvergenceError("ell_table: ell(" + std::to_string(n) +
                                   ") exceeds its bound; solver fault", out[n] - 1.0);
        pw *= table.rho_value;
        if (pw > 1e280) pw = 1e281;  // saturate; bound is vacuous past here
    }
    return out;
}

double tail_residual_ell(const TailTable& table, const ModelSpec& model, int n) {
    if (n < 1 || n > table.horizon) throw DomainError("tail_residual_ell: n out of range");
    Core core(model, table.horizon, table.rho_value);
    return std::abs(table.ell[n] - core.site(table.ell, n));
}

}  // namespace brw
