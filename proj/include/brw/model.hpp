#pragma once

#include <string>
#include <vector>

#include "brw/errors.hpp"

namespace brw {

struct JumpEntry {
    int offset = 0;
    double prob = 0.0;
};

/// Finite-support integer step law {a_y} with mean zero.
///
/// Right range R = largest offset with positive probability (R >= 1 required),
/// left range L = -(smallest offset), 0 if the law has no negative offsets.
class JumpDistribution {
public:
    enum class MeanPolicy { strict_zero, relaxed };

    static JumpDistribution create(std::vector<JumpEntry> entries,
                                   MeanPolicy policy = MeanPolicy::strict_zero);

    // All invariant violations at once; empty means valid.
    static std::vector<std::string> validate(const std::vector<JumpEntry>& entries,
                                             MeanPolicy policy = MeanPolicy::strict_zero);

    const std::vector<JumpEntry>& entries() const { return entries_; }
    int right_range() const { return right_range_; }
    int left_range() const { return left_range_; }
    double mean() const { return mean_; }
    double prob_at(int offset) const;
    bool nearly_right_continuous() const;

    /// Step law of the reflected walk (a_{-y}).
    JumpDistribution reflected() const;

private:
    JumpDistribution() = default;
    std::vector<JumpEntry> entries_;  // sorted by offset
    int right_range_ = 0;
    int left_range_ = 0;
    double mean_ = 0.0;
};

/// Offspring law {p_k}, k = 0..K. Finite support, so all moments exist.
class OffspringDistribution {
public:
    static OffspringDistribution create(std::vector<double> probabilities);
    static std::vector<std::string> validate(const std::vector<double>& probabilities);

    const std::vector<double>& probabilities() const { return p_; }
    double p(int k) const { return k >= 0 && k < static_cast<int>(p_.size()) ? p_[k] : 0.0; }
    int max_children() const { return static_cast<int>(p_.size()) - 1; }
    double mean() const { return mean_; }
    double variance() const { return variance_; }
    double third_moment() const { return third_moment_; }
    bool subcritical() const { return mean_ < 1.0; }
    bool supercritical() const { return mean_ > 1.0; }

private:
    std::vector<double> p_;
    double mean_ = 0.0;
    double variance_ = 0.0;
    double third_moment_ = 0.0;
};

enum class Mode { subcritical, supercritical };

struct ModelSpec {
    JumpDistribution jump;
    OffspringDistribution offspring;
    Mode mode = Mode::subcritical;
    std::string label;

    static ModelSpec create(JumpDistribution jump, OffspringDistribution off,
                            Mode mode, std::string label);
};

// ---- generating-function primitives ----
// All pure functions of the immutable types above; thread-safe by construction.

/// K(theta) = sum_y a_y theta^y, theta >= 1.
double jump_pgf(const JumpDistribution& jump, double theta);

/// K'(theta) = sum_y y a_y theta^(y-1), theta > 1 (finite sum, valid at 1 too).
double jump_pgf_derivative(const JumpDistribution& jump, double theta);

/// Unique root theta > 1 of K(theta) = gamma, for gamma > 1.
/// Bracketing bisection refined by safeguarded Newton; |K(theta)-gamma| <= 1e-12.
double rho(const JumpDistribution& jump, double gamma);

/// f(s) = sum_k p_k s^k on [0,1].
double offspring_pgf(const OffspringDistribution& off, double s);
double offspring_pgf_derivative(const OffspringDistribution& off, double s);

/// Q(s) = 1 - f(1-s) = 1 - sum_k p_k (1-s)^k.
/// Evaluated through its expanded polynomial for s <= 1/2: the naive form loses
/// all precision once s drops below ~1e-16, and the tail solver feeds it values
/// down to 1e-300.
double offspring_Q(const OffspringDistribution& off, double s);

/// h(s) = m s - Q(s) >= 0.
double offspring_h(const OffspringDistribution& off, double s);

/// H(s) = h(s)/(m s), with H(0) = 0 by its limit. Nondecreasing,
/// bounded by (m-1+p0)/m.
double offspring_H(const OffspringDistribution& off, double s);

/// Coefficients q_i of Q(s) = sum_{i>=1} q_i s^i (exact finite expansion).
std::vector<double> offspring_Q_coefficients(const OffspringDistribution& off);

/// Smallest fixed point of f(s) = s in [0,1]; 1 for (sub)critical laws.
double extinction_probability(const OffspringDistribution& off);

/// Conjugate law p~_k = p_k q^(k-1) of a supercritical law with p0 > 0,
/// where q is its extinction probability. Subcritical, mean f'(q).
OffspringDistribution dual_offspring(const OffspringDistribution& off);

}  // namespace brw
