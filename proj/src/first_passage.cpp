#include "brw/first_passage.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "brw/errors.hpp"

namespace brw {

namespace {

// Gauss-Seidel sweeps on phi(x) = s sum_y a_y phi(x+y), descending in x so
// mass from the absorbing boundary propagates through the whole column per
// sweep. Iterates start at 0 and increase monotonically; stop when the
// largest per-site relative change falls below rel_stop.
std::vector<double> sweep_solve(const JumpDistribution& jump, double s, int level, int depth,
                                const std::vector<double>& boundary, double rel_stop,
                                int* sweeps_out) {
    const int size = depth + level;  // x in [-depth, level-1]
    std::vector<double> phi(size, 0.0);
    const auto& ent = jump.entries();

    auto at = [&](int x) -> double {
        if (x >= level) {
            const int k = x - level;
            return k < static_cast<int>(boundary.size()) ? boundary[k] : 0.0;
        }
        if (x < -depth) return 0.0;
        return phi[x + depth];
    };

    const int max_sweeps = 2000000;
    int sweeps = 0;
    for (; sweeps < max_sweeps; ++sweeps) {
        double worst = 0.0;
        for (int x = level - 1; x >= -depth; --x) {
            double t = 0.0;
            for (const auto& e : ent) t += e.prob * at(x + e.offset);
            t *= s;
            const double old = phi[x + depth];
            const double denom = std::max(t, old);
            const double rel = denom > 0.0 ? std::abs(t - old) / denom : (t > 0.0 ? 1.0 : 0.0);
            worst = std::max(worst, rel);
            phi[x + depth] = t;
        }
        if (worst <= rel_stop) break;
    }
    if (sweeps >= max_sweeps)
        throw ConvergenceError("first_passage: sweep budget exceeded", rel_stop);
    if (sweeps_out) *sweeps_out = sweeps + 1;
    return phi;
}

double max_relative_residual(const JumpDistribution& jump, double s, int level, int depth,
                             const std::vector<double>& boundary,
                             const std::vector<double>& phi) {
    double worst = 0.0;
    for (int x = -depth; x < level; ++x) {
        double t = 0.0;
        for (const auto& e : jump.entries()) {
            const int xx = x + e.offset;
            if (xx >= level) {
                const int k = xx - level;
                t += e.prob * (k < static_cast<int>(boundary.size()) ? boundary[k] : 0.0);
            } else if (xx >= -depth) {
                t += e.prob * phi[xx + depth];
            }
        }
        t *= s;
        const double scale = std::max(t, phi[x + depth]);
        if (scale > 0.0) worst = std::max(worst, std::abs(t - phi[x + depth]) / scale);
    }
    return worst;
}

int initial_depth(const JumpDistribution& jump, double s, double tol) {
    const int R = jump.right_range();
    const double d = std::ceil(std::log(10.0 / tol) / std::log(1.0 / s));
    return std::max(R, R * static_cast<int>(d));
}

}  // namespace

double FirstPassageSolution::phi_at(int x) const {
    if (x >= level) return 1.0;
    if (x < -depth) return 0.0;
    return phi[x + depth];
}

FirstPassageSolution first_passage_pgf(const JumpDistribution& jump, double s, int level,
                                       double tol) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("first_passage_pgf: s must lie in (0,1)");
    if (level < 0) throw DomainError("first_passage_pgf: level must be >= 0");
    FirstPassageSolution sol;
    sol.level = level;
    sol.discount = s;
    sol.tolerance = tol;
    if (level == 0) {
        sol.depth = 0;
        sol.truncation_bound = 0.0;
        sol.phi = {};
        return sol;  // tau_0 = 0, phi(0) = 1 by phi_at
    }
    const int R = jump.right_range();
    const std::vector<double> boundary(R, 1.0);
    const double rel_stop = std::min(tol * (1.0 - s) * 0.5, 1e-13);

    int depth = initial_depth(jump, s, tol);
    int sweeps = 0;
    std::vector<double> phi = sweep_solve(jump, s, level, depth, boundary, rel_stop, &sweeps);
    // Deepen until the answer stops moving.
    for (int round = 0; round < 20; ++round) {
        const int depth2 = depth * 2;
        int sweeps2 = 0;
        std::vector<double> phi2 = sweep_solve(jump, s, level, depth2, boundary, rel_stop, &sweeps2);
        const double a = phi[depth], b = phi2[depth2];
        if (std::abs(a - b) <= tol * std::max(b, 1e-300)) {
            sol.sweeps = sweeps + sweeps2;
            break;
        }
        depth = depth2;
        phi = std::move(phi2);
        sweeps += sweeps2;
        sol.sweeps = sweeps;
        if (round == 19)
            throw ConvergenceError("first_passage: depth doubling did not stabilize", std::abs(a - b));
    }
    sol.depth = depth;
    sol.max_rel_residual = max_relative_residual(jump, s, level, depth, boundary, phi);
    sol.phi = std::move(phi);
    sol.truncation_bound = std::pow(s, static_cast<double>(depth) / R);
    return sol;
}

OvershootLaw overshoot_pgf(const JumpDistribution& jump, double s, double tol) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("overshoot_pgf: s must lie in (0,1)");
    const int R = jump.right_range();
    OvershootLaw law;
    law.discount = s;
    law.rho_s = rho(jump, 1.0 / s);
    law.p.resize(R, 0.0);
    law.w.resize(R, 0.0);
    const double rel_stop = std::min(tol * (1.0 - s) * 0.5, 1e-13);
    const int depth = 2 * initial_depth(jump, s, tol);
    for (int k = 0; k < R; ++k) {
        std::vector<double> boundary(R, 0.0);
        boundary[k] = 1.0;  // land exactly at 1+k
        const std::vector<double> phi = sweep_solve(jump, s, 1, depth, boundary, rel_stop, nullptr);
        law.p[k] = phi[depth];
        law.w[k] = std::pow(law.rho_s, k + 1) * law.p[k];
        law.weight_sum += law.w[k];
    }
    return law;
}

std::vector<double> ell_bar_table(const JumpDistribution& jump, double m, int N, double tol) {
    if (!(m > 0.0 && m < 1.0)) throw DomainError("ell_bar_table: m must lie in (0,1)");
    const double r = rho(jump, 1.0 / m);
    if (N * std::log(r) > 600.0)
        throw ConfigError("ell_bar_table: level too deep for the double-precision DP; "
                          "use ell_bar_table_recursive");
    std::vector<double> out(N + 1, 1.0);
    for (int n = 1; n <= N; ++n) {
        const auto sol = first_passage_pgf(jump, m, n, tol);
        out[n] = std::exp(n * std::log(r) + std::log(sol.value()));
    }
    return out;
}

std::vector<double> ell_bar_table_recursive(const JumpDistribution& jump, double m, int N,
                                            double tol) {
    const auto law = overshoot_pgf(jump, m, tol);
    const int R = jump.right_range();
    const double r = law.rho_s;
    std::vector<double> out(N + 1, 1.0);
    // ell_bar(j) = rho^j for j <= 0 (tau_j = 0 there).
    auto get = [&](int j) { return j >= 0 ? out[j] : std::pow(r, j); };
    for (int n = 0; n < N; ++n) {
        double acc = 0.0;
        for (int k = 0; k < R; ++k) acc += law.w[k] * get(n - k);
        out[n + 1] = acc;
    }
    return out;
}

std::vector<SupermultiplicativityCheck> supermultiplicativity_check(
    const JumpDistribution& jump, double gamma,
    const std::vector<std::pair<int, int>>& pairs, double tol) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw DomainError("supermultiplicativity_check: gamma must lie in (0,1)");
    std::map<int, double> cache;
    auto phi = [&](int n) {
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;
        const double v = first_passage_pgf(jump, gamma, n, 1e-13).value();
        cache[n] = v;
        return v;
    };
    std::vector<SupermultiplicativityCheck> out;
    out.reserve(pairs.size());
    for (const auto& [k, l] : pairs) {
        SupermultiplicativityCheck c;
        c.k = k;
        c.l = l;
        c.lhs = phi(k + l);
        c.rhs = phi(k) * phi(l);
        c.holds = c.lhs >= c.rhs - tol;
        out.push_back(c);
    }
    return out;
}

}  // namespace brw
