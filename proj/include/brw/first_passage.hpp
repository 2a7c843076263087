#pragma once

#include <utility>
#include <vector>

#include "brw/model.hpp"

namespace brw {

/// Solution of the discounted one-step system
///   phi(x) = s * sum_y a_y phi(x+y),  x in [-depth, level-1],
/// with phi = boundary values on [level, level+R-1] and phi = 0 below -depth.
/// phi(0) = E(s^tau_level) when the boundary is identically 1.
struct FirstPassageSolution {
    int level = 0;
    double discount = 0.0;
    int depth = 0;
    std::vector<double> phi;  // index i <-> x = i - depth, size depth + level
    double truncation_bound = 0.0;  // s^(depth/R), declared truncation error scale
    double tolerance = 0.0;
    double max_rel_residual = 0.0;  // one-step equation residual over the solved column
    int sweeps = 0;

    double phi_at(int x) const;
    double value() const { return phi_at(0); }
};

/// E(s^tau_n) by damped Gauss-Seidel sweeps (contraction factor s). The lower
/// truncation depth starts at R*ceil(log(10/tol)/log(1/s)) and doubles until
/// phi(0) is stable to a relative tol.
FirstPassageSolution first_passage_pgf(const JumpDistribution& jump, double s, int level,
                                       double tol = 1e-12);

/// Overshoot law across level 1: p_k(s) = E(s^tau_1; W_tau1 = 1+k), k = 0..R-1,
/// plus the renewal weights w_k = rho_s^(k+1) p_k(s) with rho_s = rho(jump, 1/s).
/// The weights sum to 1 for any s in (0,1).
struct OvershootLaw {
    double discount = 0.0;
    double rho_s = 0.0;
    std::vector<double> p;
    std::vector<double> w;
    double weight_sum = 0.0;
};

OvershootLaw overshoot_pgf(const JumpDistribution& jump, double s, double tol = 1e-12);

/// ell_bar(n) = rho^n E(m^tau_n) for n = 0..N (entry 0 is 1).
std::vector<double> ell_bar_table(const JumpDistribution& jump, double m, int N,
                                  double tol = 1e-12);

/// Same table through the exact renewal recursion
/// ell_bar(n+1) = sum_k w_k ell_bar(n-k); independent cross-check of the DP.
std::vector<double> ell_bar_table_recursive(const JumpDistribution& jump, double m, int N,
                                            double tol = 1e-12);

struct SupermultiplicativityCheck {
    int k = 0, l = 0;
    double lhs = 0.0;  // E(gamma^tau_{k+l})
    double rhs = 0.0;  // E(gamma^tau_k) E(gamma^tau_l)
    bool holds = false;
};

/// Verifies E(gamma^tau_{k+l}) >= E(gamma^tau_k) E(gamma^tau_l) - tol per pair.
std::vector<SupermultiplicativityCheck> supermultiplicativity_check(
    const JumpDistribution& jump, double gamma,
    const std::vector<std::pair<int, int>>& pairs, double tol = 1e-10);

}  // namespace brw
