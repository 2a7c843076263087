#include "brw/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "brw/errors.hpp"

namespace brw {

namespace {

constexpr long long kChunk = 8192;  // fixed chunk size keeps reductions worker-invariant

DiscreteSampler jump_sampler(const JumpDistribution& jump) {
    std::vector<int> vals;
    std::vector<double> probs;
    for (const auto& e : jump.entries()) {
        vals.push_back(e.offset);
        probs.push_back(e.prob);
    }
    return DiscreteSampler(std::move(vals), probs);
}

DiscreteSampler offspring_sampler(const OffspringDistribution& off) {
    std::vector<int> vals;
    for (std::size_t k = 0; k < off.probabilities().size(); ++k) vals.push_back(static_cast<int>(k));
    return DiscreteSampler(std::move(vals), off.probabilities());
}

// Runs `body(rep, rng, partial)` for every replication index, chunked so the
// partials can be merged in chunk order regardless of worker count.
template <class Partial, class Body>
Partial run_chunked(const SimConfig& cfg, const Body& body) {
    const long long reps = cfg.replications;
    if (reps < 1) throw ConfigError("simulate: replications must be >= 1");
    const long long nchunks = (reps + kChunk - 1) / kChunk;
    std::vector<Partial> partials(static_cast<std::size_t>(nchunks));
    std::atomic<long long> next{0};
    auto work = [&] {
        for (;;) {
            const long long c = next.fetch_add(1);
            if (c >= nchunks) return;
            Partial& p = partials[static_cast<std::size_t>(c)];
            const long long lo = c * kChunk;
            const long long hi = std::min(reps, lo + kChunk);
            for (long long rep = lo; rep < hi; ++rep) {
                Rng rng = Rng::for_replication(cfg.master_seed, static_cast<std::uint64_t>(rep));
                body(rep, rng, p);
            }
        }
    };
    int workers = std::max(1, cfg.workers);
    workers = static_cast<int>(std::min<long long>(workers, nchunks));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    Partial total{};
    for (auto& p : partials) total.merge(p);
    return total;
}

struct MeanAccum {
    double sum = 0.0, sumsq = 0.0;
    long long n = 0;
    void add(double x) {
        sum += x;
        sumsq += x * x;
        ++n;
    }
    void merge(const MeanAccum& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        n += o.n;
    }
    double mean() const { return n ? sum / n : 0.0; }
    double stderr_() const {
        if (n < 2) return 0.0;
        const double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1));
        return std::sqrt(var / n);
    }
};

// Samplers prepared once per estimator call; replications only draw.
struct Engine {
    DiscreteSampler jumps;
    DiscreteSampler kids;
    const SimConfig* cfg;

    Engine(const ModelSpec& model, const SimConfig& c)
        : jumps(jump_sampler(model.jump)), kids(offspring_sampler(model.offspring)), cfg(&c) {}

    void run(Rng& rng, BrwOutcome& out) const {
        thread_local std::vector<int> cur, nxt;
        cur.clear();
        cur.push_back(0);
        out.max_displacement = 0;
        out.extinction_generation = -1;
        out.censored = false;
        out.population_cap_hit = false;
        out.total_progeny = 1;
        out.max_trajectory.clear();
        out.max_trajectory.push_back(0);

        for (int gen = 1; gen <= cfg->max_generations; ++gen) {
            nxt.clear();
            int gen_max = out.max_displacement;
            bool capped = false;
            for (int pos : cur) {
                const int moved = pos + jumps.sample(rng);
                const int k = kids.sample(rng);
                if (k > 0) {
                    gen_max = std::max(gen_max, moved);
                    out.total_progeny += k;
                    for (int c = 0; c < k; ++c) nxt.push_back(moved);
                    if (static_cast<long long>(nxt.size()) > cfg->population_cap) {
                        capped = true;
                        break;
                    }
                }
            }
            if (capped) {
                out.censored = true;
                out.population_cap_hit = true;
                return;
            }
            out.max_displacement = gen_max;
            out.max_trajectory.push_back(gen_max);
            if (nxt.empty()) {
                out.extinction_generation = gen;
                return;
            }
            std::swap(cur, nxt);
        }
        out.censored = true;  // alive at the generation cap
    }
};

}  // namespace

DiscreteSampler::DiscreteSampler(std::vector<int> values, const std::vector<double>& probs)
    : values_(std::move(values)) {
    cdf_.resize(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf_[i] = acc;
    }
    if (!cdf_.empty()) cdf_.back() = 1.0 + 1e-9;  // guard the u ~ 1 edge
}

Estimate make_proportion_estimate(long long successes, long long trials) {
    Estimate e;
    e.replications_used = trials;
    e.successes = successes;
    if (trials <= 0) return e;
    const double p = static_cast<double>(successes) / static_cast<double>(trials);
    e.point = p;
    e.stderr_ = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double denom = 1.0 + z * z / n;
    const double center = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    e.ci_low = std::max(0.0, center - half);
    e.ci_high = std::min(1.0, center + half);
    return e;
}

void simulate_one(const ModelSpec& model, const SimConfig& cfg, Rng& rng, BrwOutcome& out) {
    Engine(model, cfg).run(rng, out);
}

// ---------- estimate_tail_M ----------

std::vector<Estimate> estimate_tail_M(const ModelSpec& model, const std::vector<int>& levels,
                                      const SimConfig& cfg) {
    struct Partial {
        std::vector<long long> success, excluded;
        BrwOutcome scratch;
        void merge(const Partial& o) {
            if (success.empty()) {
                success = o.success;
                excluded = o.excluded;
                return;
            }
            if (o.success.empty()) return;
            for (std::size_t i = 0; i < success.size(); ++i) {
                success[i] += o.success[i];
                excluded[i] += o.excluded[i];
            }
        }
    };
    const Engine engine(model, cfg);
    auto total = run_chunked<Partial>(cfg, [&](long long, Rng& rng, Partial& p) {
        if (p.success.empty()) {
            p.success.assign(levels.size(), 0);
            p.excluded.assign(levels.size(), 0);
        }
        engine.run(rng, p.scratch);
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (p.scratch.max_displacement >= levels[i]) ++p.success[i];
            else if (p.scratch.censored) ++p.excluded[i];
        }
    });
    std::vector<Estimate> out;
    out.reserve(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        Estimate e = make_proportion_estimate(total.success[i], cfg.replications - total.excluded[i]);
        e.excluded = total.excluded[i];
        out.push_back(e);
    }
    return out;
}

// ---------- estimate_g ----------

std::vector<GEstimate> estimate_g_grid(const ModelSpec& model, const std::vector<double>& c_grid,
                                       const std::vector<int>& n_grid, const SimConfig& cfg) {
    int max_n = 0;
    for (int n : n_grid) max_n = std::max(max_n, n);
    if (cfg.max_generations < max_n)
        throw ConfigError("estimate_g: max_generations must cover the largest n in the grid");
    const double r = rho(model.jump, 1.0 / model.offspring.mean());

    struct Cell {
        int level;
        int n;
        double c;
    };
    std::vector<Cell> cells;
    for (double c : c_grid)
        for (int n : n_grid)
            cells.push_back({static_cast<int>(std::ceil(c * n - 1e-9)), n, c});

    struct Partial {
        std::vector<long long> success, excluded;
        BrwOutcome scratch;
        void merge(const Partial& o) {
            if (success.empty()) {
                success = o.success;
                excluded = o.excluded;
                return;
            }
            if (o.success.empty()) return;
            for (std::size_t i = 0; i < success.size(); ++i) {
                success[i] += o.success[i];
                excluded[i] += o.excluded[i];
            }
        }
    };
    const Engine engine(model, cfg);
    auto total = run_chunked<Partial>(cfg, [&](long long, Rng& rng, Partial& p) {
        if (p.success.empty()) {
            p.success.assign(cells.size(), 0);
            p.excluded.assign(cells.size(), 0);
        }
        engine.run(rng, p.scratch);
        const auto& traj = p.scratch.max_trajectory;
        const int last = static_cast<int>(traj.size()) - 1;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& cell = cells[i];
            const int mn = traj[std::min(cell.n, last)];
            if (mn >= cell.level) ++p.success[i];
            else if (p.scratch.censored && last < cell.n) ++p.excluded[i];
        }
    });
    std::vector<GEstimate> out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        GEstimate ge;
        ge.c = cells[i].c;
        ge.n = cells[i].n;
        ge.level = cells[i].level;
        ge.prob = make_proportion_estimate(total.success[i], cfg.replications - total.excluded[i]);
        ge.prob.excluded = total.excluded[i];
        const double scale = std::exp(cells[i].c * cells[i].n * std::log(r));
        ge.g = scale * ge.prob.point;
        ge.g_stderr = scale * ge.prob.stderr_;
        ge.noise_dominated = ge.g_stderr > ge.g || ge.prob.successes == 0;
        out.push_back(ge);
    }
    return out;
}

GEstimate estimate_g(const ModelSpec& model, double c, int n, const SimConfig& cfg) {
    return estimate_g_grid(model, {c}, {n}, cfg).front();
}

// ---------- estimate_conditional ----------

std::vector<Estimate> estimate_conditional(const ModelSpec& model, double a,
                                           const std::vector<int>& levels, const SimConfig& cfg) {
    if (!(a > 0.0)) throw DomainError("estimate_conditional: a must be > 0");
    struct Partial {
        std::vector<long long> denom, numer;
        BrwOutcome scratch;
        void merge(const Partial& o) {
            if (denom.empty()) {
                denom = o.denom;
                numer = o.numer;
                return;
            }
            if (o.denom.empty()) return;
            for (std::size_t i = 0; i < denom.size(); ++i) {
                denom[i] += o.denom[i];
                numer[i] += o.numer[i];
            }
        }
    };
    const Engine engine(model, cfg);
    auto total = run_chunked<Partial>(cfg, [&](long long, Rng& rng, Partial& p) {
        if (p.denom.empty()) {
            p.denom.assign(levels.size(), 0);
            p.numer.assign(levels.size(), 0);
        }
        engine.run(rng, p.scratch);
        const auto& traj = p.scratch.max_trajectory;
        const int last = static_cast<int>(traj.size()) - 1;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const int n = levels[i];
            if (p.scratch.max_displacement < n) continue;  // conditioning event fails or undecided
            const int an = static_cast<int>(std::floor(a * n));
            ++p.denom[i];
            if (traj[std::min(an, last)] >= n) ++p.numer[i];
        }
    });
    std::vector<Estimate> out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        Estimate e = make_proportion_estimate(total.numer[i], total.denom[i]);
        e.low_power = total.denom[i] < 100;
        out.push_back(e);
    }
    return out;
}

// ---------- conditioned-on-extinction ----------

ConditionedTails simulate_conditioned_on_extinction(const ModelSpec& model,
                                                    const std::vector<int>& levels,
                                                    const SimConfig& cfg, double q_reference) {
    if (model.mode == Mode::supercritical && !(model.offspring.p(0) > 0.0))
        throw DomainError("simulate_conditioned_on_extinction: p_0 must be positive");
    struct Partial {
        long long accepted = 0;
        std::vector<long long> cond, joint;
        BrwOutcome scratch;
        void merge(const Partial& o) {
            accepted += o.accepted;
            if (cond.empty()) {
                cond = o.cond;
                joint = o.joint;
                return;
            }
            if (o.cond.empty()) return;
            for (std::size_t i = 0; i < cond.size(); ++i) {
                cond[i] += o.cond[i];
                joint[i] += o.joint[i];
            }
        }
    };
    const Engine engine(model, cfg);
    auto total = run_chunked<Partial>(cfg, [&](long long, Rng& rng, Partial& p) {
        if (p.cond.empty()) {
            p.cond.assign(levels.size(), 0);
            p.joint.assign(levels.size(), 0);
        }
        engine.run(rng, p.scratch);
        const bool extinct = !p.scratch.censored;
        if (!extinct) return;
        ++p.accepted;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (p.scratch.max_displacement >= levels[i]) {
                ++p.cond[i];
                ++p.joint[i];
            }
        }
    });
    ConditionedTails out;
    out.accepted = total.accepted;
    out.acceptance = make_proportion_estimate(total.accepted, cfg.replications);
    out.bias_bound = std::abs(out.acceptance.point - q_reference);
    out.acceptance_suspect = out.bias_bound > 5.0 * std::max(out.acceptance.stderr_, 1e-300);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        out.tail.push_back(make_proportion_estimate(total.cond[i], total.accepted));
        out.joint_tail.push_back(make_proportion_estimate(total.joint[i], cfg.replications));
    }
    return out;
}

// ---------- martingale mean ----------

MartingaleMean martingale_mean(const ModelSpec& model, const TailTable& table, int x,
                               int horizon, const SimConfig& cfg) {
    if (x < 1 || x > table.report_limit)
        throw ConfigError("martingale_mean: start x must lie in [1, N_rep]");
    const JumpDistribution reflected = model.jump.reflected();
    const DiscreteSampler steps = jump_sampler(reflected);
    const double m = model.offspring.mean();
    const double p0 = model.offspring.p(0);
    std::vector<double> mpow(horizon + 1, 1.0);
    for (int j = 1; j <= horizon; ++j) mpow[j] = mpow[j - 1] * m;
    // Walk positions stay within x + R*horizon; precompute u and the
    // 1 - H(u(w)) potential per site so the inner loop is table lookups.
    const int wmax = x + model.jump.left_range() * horizon;  // reflected right range = L
    std::vector<double> u_at(wmax + 1, 0.0), factor(wmax + 1, 1.0);
    for (int w = 1; w <= wmax; ++w) {
        u_at[w] = table.u(w);
        factor[w] = 1.0 - offspring_H(model.offspring, u_at[w]);
    }

    struct Partial {
        MeanAccum acc;
        long long exits = 0;
        void merge(const Partial& o) {
            acc.merge(o.acc);
            exits += o.exits;
        }
    };
    auto total = run_chunked<Partial>(cfg, [&](long long, Rng& rng, Partial& p) {
        int w = x;
        double prod = 1.0;
        double y = -1.0;
        for (int j = 1; j <= horizon; ++j) {
            w += steps.sample(rng);
            if (w <= 0) {
                y = mpow[j - 1] * (1.0 - p0) * prod;
                break;
            }
            if (w > table.report_limit) ++p.exits;
            prod *= factor[w];
        }
        if (y < 0.0) y = mpow[horizon] * u_at[w] * prod;
        p.acc.add(y);
    });
    MartingaleMean out;
    out.table_exits = total.exits;
    Estimate e;
    e.point = total.acc.mean();
    e.stderr_ = total.acc.stderr_();
    e.ci_low = e.point - 1.959963984540054 * e.stderr_;
    e.ci_high = e.point + 1.959963984540054 * e.stderr_;
    e.replications_used = total.acc.n;
    out.estimate = e;
    return out;
}

// ---------- tau pgf ----------

TauPgfEstimate estimate_tau_pgf(const JumpDistribution& jump, double s, int level,
                                const SimConfig& cfg) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("estimate_tau_pgf: s must lie in (0,1)");
    const DiscreteSampler steps = jump_sampler(jump);
    struct Partial {
        MeanAccum acc;
        long long reached = 0, censored = 0;
        void merge(const Partial& o) {
            acc.merge(o.acc);
            reached += o.reached;
            censored += o.censored;
        }
    };
    auto total = run_chunked<Partial>(cfg, [&](long long, Rng& rng, Partial& p) {
        if (level <= 0) {
            p.acc.add(1.0);
            ++p.reached;
            return;
        }
        int w = 0;
        double sp = 1.0;
        for (int t = 1; t <= cfg.max_generations; ++t) {
            w += steps.sample(rng);
            sp *= s;
            if (w >= level) {
                p.acc.add(sp);
                ++p.reached;
                return;
            }
        }
        p.acc.add(0.0);
        ++p.censored;
    });
    TauPgfEstimate out;
    out.truncation_bias_bound = std::pow(s, cfg.max_generations);
    out.censored_walks = total.censored;
    Estimate e;
    e.point = total.acc.mean();
    e.stderr_ = total.acc.stderr_();
    e.ci_low = e.point - 1.959963984540054 * e.stderr_;
    e.ci_high = e.point + 1.959963984540054 * e.stderr_ + out.truncation_bias_bound;
    e.replications_used = total.acc.n;
    e.successes = total.reached;
    out.estimate = e;
    return out;
}

}  // namespace brw
