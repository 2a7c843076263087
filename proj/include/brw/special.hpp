#pragma once

#include <vector>

#include "brw/model.hpp"

namespace brw {

// Exact quantities for the nearest-neighbor walk and the binary-offspring
// single-lineage model, plus the phase-transition rate functions.

/// log P(tau_n = j) for the simple +-1 walk, via the hitting-time identity
/// P(tau_n = j) = (n/j) P(W_j = n) and log-factorials. -inf when j < n or
/// parity mismatches.
///
/// Accuracy: dominated by lgamma rounding; relative error ~1e-12 for j <= 2e3
/// and ~4e-11 for j <= 2e4 (log magnitudes ~1e5 make anything tighter
/// unreachable in doubles).
double nn_tau_log_pmf(int n, long long j);
double nn_tau_pmf(int n, long long j);

/// log sum_{j in [j_lo, j_hi]} w^j P(tau_n = j), w in (0,1].
double nn_tau_log_weighted_sum(int n, long long j_lo, long long j_hi, double w);

/// P(M^s_k >= n) for the single-lineage model with survival rate m per step:
/// sum_{n <= j <= k} m^j P(tau_n = j). Returned as a log.
double special_Mn_log_tail(double m, long long k, int n);
double special_Mn_tail(double m, long long k, int n);

/// lambda(a) = (a+1)^((a+1)/2) (a-1)^((a-1)/2) a^-a, a > 1, in log space.
/// lambda(a) -> 2 as a -> 1+.
double lambda_of_a(double a);

/// theta*(x) = sqrt((x+1)/(x-1)) for the nearest-neighbor walk, x > 1.
double special_theta_star(double x);

/// g(x) for the nearest-neighbor walk:
/// log((1+sqrt(1-m^2))/m) + x log(mx) - (x-1)/2 log(x-1) - (x+1)/2 log(x+1).
/// Vanishes at x = 1/sqrt(1-m^2).
double special_g(double m, double x);

/// Root of theta K'(theta)/K(theta) = 1/x on (1, inf); exists iff x > 1/R.
double finite_range_theta_star(const JumpDistribution& jump, double x);

/// g(x) = log rho - log theta* + x log(m K(theta*)) for a finite-right-range
/// jump law; agrees with special_g on the nearest-neighbor walk.
double finite_range_g(const JumpDistribution& jump, double m, double x);

struct ChernoffBound {
    double total;    // m^n + summand
    double summand;  // 1/((1 - m K(theta0)) theta0^n), bounds P(M_n >= n)
    double log_total;
};

/// Exponential upper bound on u(n); requires m K(theta0) < 1, i.e.
/// 1 < theta0 < rho(jump, 1/m).
ChernoffBound chernoff_bound_Mn(const ModelSpec& model, double theta0, int n);

/// Numerically stable log(sum exp(x_i)).
double log_sum_exp(const std::vector<double>& xs);

}  // namespace brw
