#include "brw/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace brw {

namespace {

constexpr double kProbTol = 1e-12;
constexpr double kMeanTol = 1e-12;

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

// ---------- JumpDistribution ----------

std::vector<std::string> JumpDistribution::validate(const std::vector<JumpEntry>& entries,
                                                    MeanPolicy policy) {
    std::vector<std::string> issues;
    if (entries.empty()) {
        issues.push_back("jump: no entries");
        return issues;
    }
    double sum = 0.0, mean = 0.0;
    bool has_positive = false;
    std::set<int> seen;
    for (const auto& e : entries) {
        if (!(e.prob > 0.0) || e.prob > 1.0)
            issues.push_back("jump: probability for offset " + std::to_string(e.offset) +
                             " must lie in (0,1], got " + fmt(e.prob));
        if (!seen.insert(e.offset).second)
            issues.push_back("jump: duplicate offset " + std::to_string(e.offset));
        sum += e.prob;
        mean += e.offset * e.prob;
        if (e.offset > 0) has_positive = true;
    }
    if (std::abs(sum - 1.0) > kProbTol)
        issues.push_back("jump: probabilities sum to " + fmt(sum) + ", not 1 within 1e-12");
    if (policy == MeanPolicy::strict_zero && std::abs(mean) > kMeanTol)
        issues.push_back("jump: mean is " + fmt(mean) + ", not 0 within 1e-12 (mean-zero invariant)");
    if (!has_positive)
        issues.push_back("jump: needs at least one positive offset (right range >= 1)");
    return issues;
}

JumpDistribution JumpDistribution::create(std::vector<JumpEntry> entries, MeanPolicy policy) {
    auto issues = validate(entries, policy);
    if (!issues.empty()) throw ValidationError(std::move(issues));
    std::sort(entries.begin(), entries.end(),
              [](const JumpEntry& a, const JumpEntry& b) { return a.offset < b.offset; });
    JumpDistribution d;
    d.entries_ = std::move(entries);
    d.right_range_ = d.entries_.back().offset;
    d.left_range_ = std::max(0, -d.entries_.front().offset);
    d.mean_ = 0.0;
    for (const auto& e : d.entries_) d.mean_ += e.offset * e.prob;
    return d;
}

double JumpDistribution::prob_at(int offset) const {
    for (const auto& e : entries_)
        if (e.offset == offset) return e.prob;
    return 0.0;
}

bool JumpDistribution::nearly_right_continuous() const {
    for (int i = 1; i <= right_range_; ++i)
        if (prob_at(i) <= 0.0) return false;
    return true;
}

JumpDistribution JumpDistribution::reflected() const {
    std::vector<JumpEntry> rev;
    rev.reserve(entries_.size());
    for (const auto& e : entries_) rev.push_back({-e.offset, e.prob});
    // Reflection of a mean-zero law is mean-zero; validated relaxed anyway since
    // the reflected walk may have right range 0 when the original has L = 0.
    auto issues = validate(rev, MeanPolicy::relaxed);
    issues.erase(std::remove_if(issues.begin(), issues.end(),
                                [](const std::string& s) {
                                    return s.find("positive offset") != std::string::npos;
                                }),
                 issues.end());
    if (!issues.empty()) throw ValidationError(std::move(issues));
    std::sort(rev.begin(), rev.end(),
              [](const JumpEntry& a, const JumpEntry& b) { return a.offset < b.offset; });
    JumpDistribution d;
    d.entries_ = std::move(rev);
    d.right_range_ = d.entries_.back().offset;
    d.left_range_ = std::max(0, -d.entries_.front().offset);
    d.mean_ = 0.0;
    for (const auto& e : d.entries_) d.mean_ += e.offset * e.prob;
    return d;
}

// ---------- OffspringDistribution ----------

std::vector<std::string> OffspringDistribution::validate(const std::vector<double>& p) {
    std::vector<std::string> issues;
    if (p.empty()) {
        issues.push_back("offspring: no entries");
        return issues;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] < 0.0)
            issues.push_back("offspring: p_" + std::to_string(k) + " negative (" + fmt(p[k]) + ")");
        sum += p[k];
    }
    if (std::abs(sum - 1.0) > kProbTol)
        issues.push_back("offspring: probabilities sum to " + fmt(sum) + ", not 1 within 1e-12");
    return issues;
}

OffspringDistribution OffspringDistribution::create(std::vector<double> p) {
    auto issues = validate(p);
    if (!issues.empty()) throw ValidationError(std::move(issues));
    while (p.size() > 1 && p.back() == 0.0) p.pop_back();
    OffspringDistribution d;
    d.p_ = std::move(p);
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (std::size_t k = 0; k < d.p_.size(); ++k) {
        const double kk = static_cast<double>(k);
        m1 += kk * d.p_[k];
        m2 += kk * kk * d.p_[k];
        m3 += kk * kk * kk * d.p_[k];
    }
    d.mean_ = m1;
    d.variance_ = m2 - m1 * m1;
    d.third_moment_ = m3;
    return d;
}

ModelSpec ModelSpec::create(JumpDistribution jump, OffspringDistribution off,
                            Mode mode, std::string label) {
    std::vector<std::string> issues;
    const double m = off.mean();
    if (mode == Mode::subcritical) {
        if (!(m > 0.0 && m < 1.0))
            issues.push_back("model: subcritical mode requires 0 < mean < 1, got mean " + fmt(m));
    } else {
        if (!(m > 1.0))
            issues.push_back("model: supercritical mode requires mean > 1, got mean " + fmt(m));
        if (!(off.p(0) > 0.0))
            issues.push_back("model: supercritical mode requires p_0 > 0");
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
    return ModelSpec{std::move(jump), std::move(off), mode, std::move(label)};
}

// ---------- generating functions ----------

double jump_pgf(const JumpDistribution& jump, double theta) {
    if (theta < 1.0) throw DomainError("jump_pgf: theta must be >= 1");
    double s = 0.0;
    for (const auto& e : jump.entries()) s += e.prob * std::pow(theta, e.offset);
    return s;
}

double jump_pgf_derivative(const JumpDistribution& jump, double theta) {
    if (theta < 1.0) throw DomainError("jump_pgf_derivative: theta must be >= 1");
    double s = 0.0;
    for (const auto& e : jump.entries()) s += e.prob * e.offset * std::pow(theta, e.offset - 1);
    return s;
}

double rho(const JumpDistribution& jump, double gamma) {
    if (!(gamma > 1.0)) throw DomainError("rho: gamma must be > 1");
    // K is strictly increasing and convex on [1,inf) for mean-zero laws with R >= 1.
    double lo = 1.0;
    double hi = 2.0;
    int doublings = 0;
    while (jump_pgf(jump, hi) < gamma) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 1024)
            throw ConvergenceError("rho: bracket expansion exceeded 2^1024", hi);
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = jump_pgf(jump, x) - gamma;
        const double fp = jump_pgf_derivative(jump, x);
        if (f > 0.0) hi = x; else lo = x;
        double nx = (fp > 0.0) ? x - f / fp : x;
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);  // safeguard
        if (nx == x || (std::abs(f) <= 4e-16 * std::max(1.0, gamma) && it > 0)) break;
        x = nx;
    }
    return x;
}

double offspring_pgf(const OffspringDistribution& off, double s) {
    if (s < 0.0 || s > 1.0) throw DomainError("offspring_pgf: s must lie in [0,1]");
    double acc = 0.0;
    const auto& p = off.probabilities();
    for (std::size_t k = p.size(); k-- > 0;) acc = acc * s + p[k];
    return acc;
}

double offspring_pgf_derivative(const OffspringDistribution& off, double s) {
    if (s < 0.0 || s > 1.0) throw DomainError("offspring_pgf_derivative: s must lie in [0,1]");
    double acc = 0.0;
    const auto& p = off.probabilities();
    for (std::size_t k = p.size(); k-- > 1;) acc = acc * s + k * p[k];
    return acc;
}

std::vector<double> offspring_Q_coefficients(const OffspringDistribution& off) {
    // Q(s) = sum_k p_k (1 - (1-s)^k) = sum_{i>=1} (-1)^{i+1} [sum_k p_k C(k,i)] s^i
    const auto& p = off.probabilities();
    const int K = static_cast<int>(p.size()) - 1;
    std::vector<double> q(std::max(K, 1), 0.0);
    for (int k = 1; k <= K; ++k) {
        double binom = 1.0;  // C(k, i), built incrementally
        for (int i = 1; i <= k; ++i) {
            binom = binom * (k - i + 1) / i;
            q[i - 1] += ((i % 2 == 1) ? 1.0 : -1.0) * p[k] * binom;
        }
    }
    return q;
}

double offspring_Q(const OffspringDistribution& off, double s) {
    if (s < 0.0 || s > 1.0) throw DomainError("offspring_Q: s must lie in [0,1]");
    if (s > 0.5) return 1.0 - offspring_pgf(off, 1.0 - s);
    const auto q = offspring_Q_coefficients(off);
    double acc = 0.0;
    for (std::size_t i = q.size(); i-- > 0;) acc = acc * s + q[i];
    return acc * s;
}

double offspring_h(const OffspringDistribution& off, double s) {
    return off.mean() * s - offspring_Q(off, s);
}

double offspring_H(const OffspringDistribution& off, double s) {
    if (s < 0.0 || s > 1.0) throw DomainError("offspring_H: s must lie in [0,1]");
    if (s == 0.0) return 0.0;  // limit value
    if (s < 1e-7) {
        // H(s) = (q2 - q3 s + ...) s / m to leading orders, from the Q expansion.
        const auto q = offspring_Q_coefficients(off);
        double acc = 0.0;
        for (std::size_t i = q.size(); i-- > 1;) acc = acc * s + q[i];
        return -acc * s / off.mean();
    }
    return offspring_h(off, s) / (off.mean() * s);
}

double extinction_probability(const OffspringDistribution& off) {
    if (off.mean() <= 1.0) return 1.0;
    if (!(off.p(0) > 0.0)) return 0.0;
    // Smallest root of f(s) = s in [0,1); f is convex with f(0) = p0 > 0 and
    // f(1) = 1, so bisection on f(s) - s over [0, 1-eps] converges to q.
    double lo = 0.0, hi = 1.0 - 1e-9;
    if (offspring_pgf(off, hi) - hi > 0.0) {
        // Root lies within (1-1e-9, 1): mean barely above 1. Fall back to Newton.
        double x = 0.5;
        for (int it = 0; it < 200; ++it) {
            const double f = offspring_pgf(off, x) - x;
            const double fp = offspring_pgf_derivative(off, x) - 1.0;
            if (fp == 0.0) break;
            const double nx = x - f / fp;
            if (std::abs(nx - x) < 1e-15) return nx;
            x = std::clamp(nx, 0.0, 1.0);
        }
        return x;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (offspring_pgf(off, mid) - mid > 0.0) lo = mid; else hi = mid;
        if (hi - lo < 1e-14) break;
    }
    return 0.5 * (lo + hi);
}

OffspringDistribution dual_offspring(const OffspringDistribution& off) {
    if (!off.supercritical() || !(off.p(0) > 0.0))
        throw DomainError("dual_offspring: requires a supercritical law with p_0 > 0");
    const double q = extinction_probability(off);
    const auto& p = off.probabilities();
    std::vector<double> dual(p.size(), 0.0);
    for (std::size_t k = 0; k < p.size(); ++k)
        dual[k] = p[k] * std::pow(q, static_cast<double>(k) - 1.0);
    // f(q) = q makes these sum to 1 up to roundoff; renormalize the residue
    // so the constructed law passes its own 1e-12 gate.
    double sum = 0.0;
    for (double x : dual) sum += x;
    for (double& x : dual) x /= sum;
    return OffspringDistribution::create(std::move(dual));
}

}  // namespace brw
