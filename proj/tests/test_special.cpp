#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "brw/builtin_models.hpp"
#include "brw/special.hpp"

using namespace brw;

namespace {

// Exact P(tau_n = j) for the simple walk by counting paths that stay below n
// until step j. Path counts fit comfortably in doubles for j <= 40.
double tau_pmf_by_counting(int n, int j) {
    std::map<int, double> alive{{0, 1.0}};
    double hit = 0.0;
    for (int step = 1; step <= j; ++step) {
        std::map<int, double> next;
        hit = 0.0;
        for (const auto& [pos, cnt] : alive) {
            for (int d : {-1, 1}) {
                const int q = pos + d;
                if (q >= n) hit += cnt;
                else next[q] += cnt;
            }
        }
        alive = std::move(next);
    }
    return hit * std::pow(0.5, j);
}

// P(M^s_3 >= 1) for the single-lineage model by enumerating the 8 jump paths;
// a path first hitting level 1 at step t contributes m^t (t survival draws).
double depth3_tail_oracle(double m) {
    double total = 0.0;
    for (int bits = 0; bits < 8; ++bits) {
        int pos = 0, t = 0;
        for (int step = 1; step <= 3; ++step) {
            pos += (bits >> (step - 1)) & 1 ? 1 : -1;
            if (pos >= 1) {
                t = step;
                break;
            }
        }
        if (t > 0) total += std::pow(m, t) / 8.0;
    }
    return total;
}

}  // namespace

TEST_CASE("nearest-neighbor tau pmf basics") {
    for (int n = 1; n <= 12; ++n)
        CHECK(nn_tau_pmf(n, n) == doctest::Approx(std::pow(2.0, -n)).epsilon(1e-13));
    CHECK(nn_tau_pmf(1, 3) == doctest::Approx(0.125).epsilon(1e-13));
    CHECK(nn_tau_pmf(1, 2) == 0.0);   // parity
    CHECK(nn_tau_pmf(4, 2) == 0.0);   // j < n
    CHECK_THROWS_AS(nn_tau_pmf(0, 2), DomainError);
}

TEST_CASE("tau pmf agrees with exhaustive path counting") {
    for (int n = 1; n <= 6; ++n)
        for (int j = n; j <= 14; ++j)
            CHECK(nn_tau_pmf(n, j) == doctest::Approx(tau_pmf_by_counting(n, j)).epsilon(1e-12));
}

TEST_CASE("lambda of a") {
    CHECK(lambda_of_a(3.0) == doctest::Approx(32.0 / 27.0).epsilon(1e-13));
    CHECK(lambda_of_a(1.0 + 1e-8) == doctest::Approx(2.0).epsilon(1e-6));
    double best = 0.0, best_a = 0.0;
    for (double a = 1.001; a < 12.0; a += 0.01) {
        const double v = lambda_of_a(a);
        CHECK(v <= 2.0 + 1e-12);
        if (v > best) {
            best = v;
            best_a = a;
        }
    }
    CHECK(best_a == doctest::Approx(1.001));  // supremum sits at the a -> 1 boundary
    CHECK_THROWS_AS(lambda_of_a(1.0), DomainError);
}

TEST_CASE("special theta star and g") {
    CHECK(special_theta_star(3.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(special_g(0.8, 1.0 / 0.6) == doctest::Approx(0.0).epsilon(1e-12));
    for (double m : {0.3, 0.6, 0.9})
        CHECK(special_g(m, 1.0 / std::sqrt(1.0 - m * m)) == doctest::Approx(0.0).epsilon(1e-12));
    // x -> 1+ limit: log(1 + sqrt(1-m^2)) - log 2
    CHECK(special_g(0.8, 1.0 + 1e-9) ==
          doctest::Approx(std::log(1.6) - std::log(2.0)).epsilon(1e-6));
    // increasing below the zero, decreasing above it
    CHECK(special_g(0.8, 1.2) < special_g(0.8, 1.5));
    CHECK(special_g(0.8, 2.0) > special_g(0.8, 3.0));
}

TEST_CASE("finite-range theta star matches the closed form on the simple walk") {
    const auto nn = builtin_model("special-binary-m08").jump;
    for (double x : {1.3, 2.0, 3.0, 6.0}) {
        CHECK(finite_range_theta_star(nn, x) ==
              doctest::Approx(special_theta_star(x)).epsilon(1e-10));
        CHECK(finite_range_g(nn, 0.8, x) == doctest::Approx(special_g(0.8, x)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(finite_range_theta_star(nn, 0.9), DomainError);
}

TEST_CASE("finite-range g near the 1/R edge") {
    const auto r2 = builtin_model("r2-geom-m07").jump;
    const double m = 0.7;
    // m rho^R a_R < 1 here, so g must start negative just above 1/R = 0.5.
    const double r = rho(r2, 1.0 / m);
    CHECK(m * r * r * 0.1 < 1.0);
    CHECK(finite_range_g(r2, m, 0.51) < 0.0);
    CHECK(finite_range_g(r2, m, 0.55) < 0.0);
    // boundary limit of the theta-dependent part:
    // log K'(theta*) + (x-1) log K(theta*) -> log R + log(a_R)/R
    const double x = 0.5 + 1e-7;
    const double th = finite_range_theta_star(r2, x);
    const double val = std::log(jump_pgf_derivative(r2, th)) +
                       (x - 1.0) * std::log(jump_pgf(r2, th));
    CHECK(val == doctest::Approx(std::log(2.0) + std::log(0.1) / 2.0).epsilon(1e-4));
}

TEST_CASE("single-lineage running-max tail") {
    // k = n boundary: survive n steps and march straight up
    for (int n = 1; n <= 10; ++n)
        CHECK(special_Mn_tail(0.8, n, n) == doctest::Approx(std::pow(0.4, n)).epsilon(1e-12));
    CHECK(special_Mn_tail(0.8, 3, 1) == doctest::Approx(0.464).epsilon(1e-12));
    CHECK(special_Mn_tail(0.8, 3, 1) == doctest::Approx(depth3_tail_oracle(0.8)).epsilon(1e-12));
    CHECK(special_Mn_tail(0.5, 3, 1) == doctest::Approx(depth3_tail_oracle(0.5)).epsilon(1e-12));
    // k -> infinity recovers the geometric law rho^-n
    for (int n : {1, 4, 8}) {
        const double lim = special_Mn_tail(0.8, 4000, n);
        CHECK(lim == doctest::Approx(std::pow(2.0, -n)).epsilon(1e-10));
    }
    CHECK(special_Mn_tail(0.8, 2, 5) == 0.0);
}

TEST_CASE("chernoff bound") {
    const ModelSpec m08 = builtin_model("special-binary-m08");
    const double theta0 = 1.5;
    const double K0 = jump_pgf(m08.jump, theta0);
    for (int n : {0, 1, 5, 20}) {
        const auto b = chernoff_bound_Mn(m08, theta0, n);
        const double expect =
            std::pow(0.8, n) + 1.0 / ((1.0 - 0.8 * K0) * std::pow(theta0, n));
        CHECK(b.total == doctest::Approx(expect).epsilon(1e-12));
        CHECK(b.summand == doctest::Approx(expect - std::pow(0.8, n)).epsilon(1e-12));
    }
    CHECK(chernoff_bound_Mn(m08, theta0, 0).total >= 1.0);
    CHECK_THROWS_AS(chernoff_bound_Mn(m08, 2.5, 3), DomainError);  // m K(theta0) >= 1
    CHECK_THROWS_AS(chernoff_bound_Mn(m08, 1.0, 3), DomainError);
}

TEST_CASE("log interval sums stay finite far below double range") {
    // P(tau_n in [3n +- w]) at n = 4000 is ~ exp(-680); only the log survives.
    const int n = 4000;
    const double w = 2.0 * std::sqrt(n * std::log(static_cast<double>(n)));
    const double lp = nn_tau_log_weighted_sum(n, static_cast<long long>(3 * n - w),
                                              static_cast<long long>(3 * n + w), 1.0);
    CHECK(std::isfinite(lp));
    CHECK(lp < -600.0);
    CHECK(lp / n == doctest::Approx(-std::log(lambda_of_a(3.0))).epsilon(0.05));
}

TEST_CASE("log_sum_exp") {
    CHECK(log_sum_exp({0.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(log_sum_exp({-1000.0, -1000.0}) == doctest::Approx(-1000.0 + std::log(2.0)));
    CHECK(std::isinf(log_sum_exp({})));
}
