#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "brw/model.hpp"
#include "brw/rng.hpp"
#include "brw/tail_solver.hpp"

namespace brw {

struct SimConfig {
    long long replications = 100000;
    int max_generations = 400;
    long long population_cap = 1u << 20;
    std::uint64_t master_seed = 1;
    int workers = 1;
};

/// One branching-random-walk replication. Particles jump first, then
/// reproduce; children sit at the parent's post-jump position, and only born
/// vertices (plus the root) count toward the displacement records.
struct BrwOutcome {
    int max_displacement = 0;        // M, running max; >= 0 (root at the origin)
    int extinction_generation = -1;  // first n with Z_n = 0; -1 while censored
    bool censored = false;           // alive at max_generations or population cap hit
    bool population_cap_hit = false;
    long long total_progeny = 1;     // vertices ever born, root included
    std::vector<int> max_trajectory; // M_n for n = 0..last simulated generation
};

struct Estimate {
    double point = 0.0;
    double stderr_ = 0.0;
    double ci_low = 0.0;   // Wilson, 95%
    double ci_high = 0.0;
    long long replications_used = 0;
    long long successes = 0;
    long long excluded = 0;  // censored before the level was decided
    bool noise_dominated = false;
    bool low_power = false;
};

Estimate make_proportion_estimate(long long successes, long long trials);

/// Runs one replication into `out` (buffers reused across calls).
void simulate_one(const ModelSpec& model, const SimConfig& cfg, Rng& rng, BrwOutcome& out);

/// P(M >= level) for each level, all levels sharing one replication pass.
/// Censored replications count when the level was already reached and are
/// excluded from the denominator otherwise (exclusions reported).
std::vector<Estimate> estimate_tail_M(const ModelSpec& model, const std::vector<int>& levels,
                                      const SimConfig& cfg);

/// g(c,n) = rho^{cn} P(M_n >= ceil(cn)), estimated from a shared pass.
/// Returned per (c, n) pair in row-major (c outer) order.
struct GEstimate {
    double c = 0.0;
    int n = 0;
    int level = 0;       // ceil(cn)
    Estimate prob;       // P(M_n >= level)
    double g = 0.0;      // rho^{cn} * prob.point
    double g_stderr = 0.0;
    bool noise_dominated = false;
};
std::vector<GEstimate> estimate_g_grid(const ModelSpec& model, const std::vector<double>& c_grid,
                                       const std::vector<int>& n_grid, const SimConfig& cfg);
GEstimate estimate_g(const ModelSpec& model, double c, int n, const SimConfig& cfg);

/// P(M_{floor(a n)} >= n | M >= n) per level n.
std::vector<Estimate> estimate_conditional(const ModelSpec& model, double a,
                                           const std::vector<int>& levels, const SimConfig& cfg);

/// Rejection run of a supercritical model conditioned on extinction.
struct ConditionedTails {
    Estimate acceptance;              // acceptance rate, target q
    std::vector<Estimate> tail;       // P(M >= level | extinct) per requested level
    std::vector<Estimate> joint_tail; // P(M >= level AND extinct), all replications
    long long accepted = 0;
    double bias_bound = 0.0;          // |acceptance - q|, the censoring bias proxy
    bool acceptance_suspect = false;  // acceptance off the target by > 5 stderr: caps too small
};
ConditionedTails simulate_conditioned_on_extinction(const ModelSpec& model,
                                                    const std::vector<int>& levels,
                                                    const SimConfig& cfg, double q_reference);

/// Empirical mean of the discounted reflected-walk functional
///   Y_h = m^tau' (1-p0)/m * prod_{j<tau'} [1-H(u(W_j))]        if tau' <= h
///       = m^h u(W_h) prod_{j<=h} [1-H(u(W_j))]                 otherwise
/// started at x, where tau' is the first visit to (-inf, 0] and u comes from
/// the solved table. Contract: mean equals u(x) for every horizon.
struct MartingaleMean {
    Estimate estimate;
    long long table_exits = 0;  // steps evaluated past the certified window
};
MartingaleMean martingale_mean(const ModelSpec& model, const TailTable& table, int x,
                               int horizon, const SimConfig& cfg);

/// Monte Carlo E(s^tau_level) with step cap = max_generations; truncation adds
/// at most s^cap, reported in the interval.
struct TauPgfEstimate {
    Estimate estimate;
    double truncation_bias_bound = 0.0;
    long long censored_walks = 0;
};
TauPgfEstimate estimate_tau_pgf(const JumpDistribution& jump, double s, int level,
                                const SimConfig& cfg);

}  // namespace brw
