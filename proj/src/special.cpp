#include "brw/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace brw {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_sum_exp(const std::vector<double>& xs) {
    double mx = kNegInf;
    for (double x : xs) mx = std::max(mx, x);
    if (mx == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - mx);
    return mx + std::log(acc);
}

double nn_tau_log_pmf(int n, long long j) {
    if (n < 1) throw DomainError("nn_tau_log_pmf: n must be >= 1");
    if (j < n || ((j - n) & 1LL)) return kNegInf;
    const long long k = (j + n) / 2;  // number of +1 steps
    const double lj = static_cast<double>(j);
    return std::log(static_cast<double>(n)) - std::log(lj) + std::lgamma(lj + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(j - k) + 1.0) - lj * std::log(2.0);
}

double nn_tau_pmf(int n, long long j) { return std::exp(nn_tau_log_pmf(n, j)); }

double nn_tau_log_weighted_sum(int n, long long j_lo, long long j_hi, double w) {
    if (!(w > 0.0 && w <= 1.0)) throw DomainError("nn_tau_log_weighted_sum: w must lie in (0,1]");
    j_lo = std::max<long long>(j_lo, n);
    if ((j_lo - n) & 1LL) ++j_lo;
    const double logw = std::log(w);
    // Ascending j: terms j*logw + log pmf are eventually decreasing; accumulate
    // against the running max without materializing the list.
    double mx = kNegInf, acc = 0.0;
    for (long long j = j_lo; j <= j_hi; j += 2) {
        const double t = j * logw + nn_tau_log_pmf(n, j);
        if (t == kNegInf) continue;
        if (t <= mx) {
            acc += std::exp(t - mx);
        } else {
            acc = acc * std::exp(mx - t) + 1.0;
            mx = t;
        }
    }
    return mx == kNegInf ? kNegInf : mx + std::log(acc);
}

double special_Mn_log_tail(double m, long long k, int n) {
    if (!(m > 0.0 && m < 1.0)) throw DomainError("special_Mn_log_tail: m must lie in (0,1)");
    if (k < n) return kNegInf;
    return nn_tau_log_weighted_sum(n, n, k, m);
}

double special_Mn_tail(double m, long long k, int n) {
    return std::exp(special_Mn_log_tail(m, k, n));
}

double lambda_of_a(double a) {
    if (!(a > 1.0)) throw DomainError("lambda_of_a: a must be > 1");
    const double lg = 0.5 * (a + 1.0) * std::log(a + 1.0) +
                      0.5 * (a - 1.0) * std::log(a - 1.0) - a * std::log(a);
    return std::exp(lg);
}

double special_theta_star(double x) {
    if (!(x > 1.0)) throw DomainError("special_theta_star: x must be > 1");
    return std::sqrt((x + 1.0) / (x - 1.0));
}

double special_g(double m, double x) {
    if (!(x > 1.0)) throw DomainError("special_g: x must be > 1");
    if (!(m > 0.0 && m < 1.0)) throw DomainError("special_g: m must lie in (0,1)");
    const double lead = std::log((1.0 + std::sqrt(1.0 - m * m)) / m);
    return lead + x * std::log(m * x) - 0.5 * (x - 1.0) * std::log(x - 1.0) -
           0.5 * (x + 1.0) * std::log(x + 1.0);
}

double finite_range_theta_star(const JumpDistribution& jump, double x) {
    const int R = jump.right_range();
    if (!(x > 1.0 / R)) throw DomainError("finite_range_theta_star: x must exceed 1/R");
    const double target = 1.0 / x;  // in (0, R)
    auto hfun = [&](double th) {
        return th * jump_pgf_derivative(jump, th) / jump_pgf(jump, th);
    };
    // h increases from 0 at theta=1 to R at infinity.
    double lo = 1.0, hi = 2.0;
    while (hfun(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e200) throw ConvergenceError("finite_range_theta_star: bracket blew up", hi);
    }
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hfun(mid) < target) lo = mid; else hi = mid;
        if (hi - lo <= 1e-12 * std::max(1.0, lo)) break;
    }
    return 0.5 * (lo + hi);
}

double finite_range_g(const JumpDistribution& jump, double m, double x) {
    if (!(m > 0.0 && m < 1.0)) throw DomainError("finite_range_g: m must lie in (0,1)");
    const double th = finite_range_theta_star(jump, x);
    const double r = rho(jump, 1.0 / m);
    return std::log(r) - std::log(th) + x * std::log(m * jump_pgf(jump, th));
}

ChernoffBound chernoff_bound_Mn(const ModelSpec& model, double theta0, int n) {
    if (n < 0) throw DomainError("chernoff_bound_Mn: n must be >= 0");
    const double m = model.offspring.mean();
    const double mK = m * jump_pgf(model.jump, theta0);
    if (!(theta0 > 1.0) || !(mK < 1.0))
        throw DomainError("chernoff_bound_Mn: need 1 < theta0 < rho(jump, 1/m), so m K(theta0) < 1");
    const double log_summand = -std::log1p(-mK) - n * std::log(theta0);
    const double log_mn = n * std::log(m);
    const double log_total = log_sum_exp({log_mn, log_summand});
    return ChernoffBound{std::exp(log_total), std::exp(log_summand), log_total};
}

}  // namespace brw
