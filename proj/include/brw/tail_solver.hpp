#pragma once

#include <atomic>
#include <vector>

#include "brw/model.hpp"

namespace brw {

/// Solved tail of M for a subcritical model, stored in the scaled coordinates
/// ell(n) = rho^n u(n). u(n) itself underflows doubles near n ~ 1000 for
/// rho ~ 2, while ell stays O(1) across any horizon, which is what the
/// deep-window certificates are stated on.
struct TailTable {
    std::vector<double> ell;  // n = 0..horizon; ell[0] = 1
    double rho_value = 0.0;
    double log_rho = 0.0;
    double offspring_mean = 0.0;
    int horizon = 0;       // N: tail closure u = 0 beyond this
    int report_limit = 0;  // N_rep: window certified by the horizon-doubling re-solve
    double tolerance = 0.0;
    double bracket_gap = 0.0;     // final sup over the report window of (upper - lower), ell scale
    double max_residual = 0.0;    // sup over the report window of the fixed-point residual, ell scale
    int iterations = 0;           // sweeps, both brackets and the doubling run
    double contraction_ratio_max = 0.0;  // largest per-sweep sup-change ratio (u scale) after sweep 2
    long long monotonicity_violations = 0;  // sites where a bracket moved the wrong way (0 when healthy)

    double ell_at(int n) const;  // 1 for n <= 0, 0 past the horizon
    double u(int n) const;       // rho^-n ell(n); may underflow to 0 at depth
    double log_u(int n) const;   // exact: -n log rho + log ell(n)
};

/// Solves u(n) = sum_y a_y Q(u(n-y)) on [1, N] (u = 1 at n <= 0, u = 0 past N)
/// with two monotone Gauss-Seidel bracket iterations: a lower sweep from u = 0
/// and an upper sweep from the supersolution u = min(1, rho^-n). Both contract
/// at rate <= m in the u sup-norm; iteration stops when the brackets agree to
/// tol in ell scale. The report window is then certified by re-solving at
/// horizon 2N and keeping the prefix where both solutions agree to tol.
///
/// Preconditions: subcritical model, N >= 4(L+R), tol >= 1e-13.
/// min_report: fail with ConfigError if the certified window ends below it.
TailTable solve_tail_M(const ModelSpec& model, int horizon, double tol = 1e-11,
                       int min_report = 0);

/// ell(n) = rho^n u(n) on the certified window. rho_check must match the
/// table's rho; any ell(n) > 1 + 10 tol rho^n is flagged as a solver fault.
std::vector<double> ell_table(const TailTable& table, double rho_check);

/// Recomputes the ell-scale fixed-point residual at one site from scratch
/// (independent of the solver's internal bookkeeping).
double tail_residual_ell(const TailTable& table, const ModelSpec& model, int n);

namespace testing {
enum class Fault { none, q_sign };
/// Negative-control hook for the verify harness: flips the sign of Q inside
/// the tail solver. Never set outside tests.
extern std::atomic<Fault> fault_injection;
}  // namespace testing

}  // namespace brw
