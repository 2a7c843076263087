#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "brw/builtin_models.hpp"
#include "brw/first_passage.hpp"
#include "brw/special.hpp"

using namespace brw;

namespace {

const double kNNPhi08 = 0.5;  // E(0.8^tau_1) = (1 - sqrt(1 - 0.64))/0.8

// Same counting oracle as in test_special, kept local so each suite stands alone.
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

}  // namespace

TEST_CASE("nearest-neighbor closed forms") {
    const auto nn = builtin_model("special-binary-m08").jump;
    CHECK(first_passage_pgf(nn, 0.8, 1).value() == doctest::Approx(kNNPhi08).epsilon(1e-12));
    CHECK(first_passage_pgf(nn, 0.8, 0).value() == 1.0);
    CHECK(first_passage_pgf(nn, 0.8, 5).value() == doctest::Approx(0.03125).epsilon(1e-11));
    // multiplicativity E(s^tau_n) = E(s^tau_1)^n, exact for the simple walk
    for (int n : {2, 10, 25, 50}) {
        const double v = first_passage_pgf(nn, 0.8, n).value();
        CHECK(v == doctest::Approx(std::pow(kNNPhi08, n)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(first_passage_pgf(nn, 1.0, 3), DomainError);
    CHECK_THROWS_AS(first_passage_pgf(nn, 0.8, -1), DomainError);
}

TEST_CASE("deep levels keep relative accuracy") {
    const auto nn = builtin_model("special-binary-m08").jump;
    for (int n : {100, 200}) {
        const double v = first_passage_pgf(nn, 0.8, n, 1e-12).value();
        CHECK(std::abs(-std::log(v) / n - std::log(2.0)) <= 1e-9);
    }
}

TEST_CASE("triple agreement: pmf, DP transform, enumeration") {
    const auto nn = builtin_model("special-binary-m08").jump;
    for (int n = 1; n <= 6; ++n) {
        // transform of the enumerated pmf vs the DP; tail beyond 14 steps is
        // below s^15/(1-s) <= 8e-10 for s <= 0.25
        for (double s : {0.05, 0.10, 0.15, 0.20, 0.25}) {
            double partial = 0.0;
            for (int j = n; j <= 14; ++j) partial += std::pow(s, j) * tau_pmf_by_counting(n, j);
            const double dp = first_passage_pgf(nn, s, n, 1e-13).value();
            CHECK(dp == doctest::Approx(partial).epsilon(2e-9));
            CHECK(dp >= partial - 1e-15);
        }
        // pmf route vs DP route at s = 0.8 (spec scale)
        double weighted = 0.0;
        for (int j = n; j <= 400; ++j) weighted += std::pow(0.8, j) * nn_tau_pmf(n, j);
        CHECK(first_passage_pgf(nn, 0.8, n, 1e-12).value() ==
              doctest::Approx(weighted).epsilon(1e-9));
    }
}

TEST_CASE("phi is monotone in x and proper") {
    const auto r2 = builtin_model("r2-geom-m07").jump;
    const auto sol = first_passage_pgf(r2, 0.7, 12, 1e-12);
    double prev = -1.0;
    for (int x = -sol.depth; x < sol.level; ++x) {
        const double v = sol.phi_at(x);
        CHECK(v >= prev - 1e-15);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
    CHECK(sol.phi_at(sol.level) == 1.0);
    CHECK(sol.phi_at(-sol.depth - 1) == 0.0);
    CHECK(sol.truncation_bound <= 1e-13 * 10);
    CHECK(sol.max_rel_residual <= 1e-12);
}

TEST_CASE("overshoot law") {
    const auto nn = builtin_model("special-binary-m08").jump;
    const auto nn_law = overshoot_pgf(nn, 0.8, 1e-12);
    REQUIRE(nn_law.p.size() == 1);  // skip-free walk never overshoots
    CHECK(nn_law.p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(nn_law.weight_sum == doctest::Approx(1.0).epsilon(1e-11));

    const auto r2 = builtin_model("r2-geom-m07").jump;
    const auto law = overshoot_pgf(r2, 0.7, 1e-12);
    REQUIRE(law.p.size() == 2);
    CHECK(law.p[0] == doctest::Approx(0.2976229883997243).epsilon(1e-9));
    CHECK(law.p[1] == doctest::Approx(0.0968798290799519).epsilon(1e-9));
    CHECK(law.weight_sum == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(law.p[0] + law.p[1] <= 1.0);

    // small-s expansion: only single-step crossings survive to first order
    const double s = 1e-6;
    const auto tiny = overshoot_pgf(r2, s, 1e-13);
    CHECK(std::abs(tiny.p[0] - s * r2.prob_at(1)) <= 5 * s * s);
    CHECK(std::abs(tiny.p[1] - s * r2.prob_at(2)) <= 5 * s * s);
    CHECK(tiny.weight_sum == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("ell_bar: constant for the simple walk, bounded and settling for R=2") {
    const auto nn = builtin_model("special-binary-m08").jump;
    const auto t = ell_bar_table(nn, 0.8, 100, 1e-12);
    CHECK(t[0] == 1.0);
    for (int n = 1; n <= 100; ++n) CHECK(t[n] == doctest::Approx(1.0).epsilon(1e-10));

    const auto r2 = builtin_model("r2-geom-m07").jump;
    const auto lb = ell_bar_table(r2, 0.7, 120, 1e-12);
    double lo = 1e300, hi = 0.0;
    for (int n = 1; n <= 120; ++n) {
        lo = std::min(lo, lb[n]);
        hi = std::max(hi, lb[n]);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 10.0);
    for (int n = 20; n < 119; ++n)
        CHECK(std::abs(lb[n + 2] - lb[n + 1]) <= std::abs(lb[n + 1] - lb[n]) + 1e-12);

    // the renewal recursion reproduces the DP table
    const auto rec = ell_bar_table_recursive(r2, 0.7, 120, 1e-12);
    for (int n = 0; n <= 120; ++n) CHECK(rec[n] == doctest::Approx(lb[n]).epsilon(1e-8));
}

TEST_CASE("supermultiplicativity") {
    const auto nn = builtin_model("special-binary-m08").jump;
    std::vector<std::pair<int, int>> pairs = {{1, 1}, {2, 3}, {5, 7}, {0, 9}, {10, 10}};
    for (const auto& c : supermultiplicativity_check(nn, 0.7, pairs, 1e-10)) {
        CHECK(c.holds);
        CHECK(c.lhs == doctest::Approx(c.rhs).epsilon(1e-9));  // equality on the simple walk
    }
    const auto r2 = builtin_model("r2-geom-m07").jump;
    const auto res = supermultiplicativity_check(r2, 0.7, {{5, 7}}, 1e-10);
    CHECK(res[0].holds);
    CHECK(res[0].lhs > res[0].rhs + 1e-6);  // strict for a lattice with overshoot

    // (log E(gamma^tau_n))/n climbs toward its supremum
    double prev = -1e300;
    for (int n = 1; n <= 20; ++n) {
        const double v = std::log(first_passage_pgf(r2, 0.7, n, 1e-13).value()) / n;
        CHECK(v >= prev - 1e-11);
        prev = v;
    }
}
