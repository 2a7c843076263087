#include <doctest.h>

#include <cmath>

#include "brw/builtin_models.hpp"
#include "brw/model.hpp"

using namespace brw;

namespace {

JumpDistribution nn() { return JumpDistribution::create({{-1, 0.5}, {1, 0.5}}); }

JumpDistribution r2() {
    return JumpDistribution::create({{-2, 0.25}, {0, 0.35}, {1, 0.3}, {2, 0.1}});
}

}  // namespace

TEST_CASE("jump pgf closed forms") {
    CHECK(jump_pgf(nn(), 2.0) == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(jump_pgf(nn(), 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    // 0.25/1.5^2 + 0.35 + 0.3*1.5 + 0.1*1.5^2
    CHECK(jump_pgf(r2(), 1.5) == doctest::Approx(1.1361111111111111).epsilon(1e-14));
    CHECK_THROWS_AS(jump_pgf(nn(), 0.99), DomainError);
}

TEST_CASE("jump pgf derivative against central differences") {
    CHECK(jump_pgf_derivative(nn(), 2.0) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(jump_pgf_derivative(nn(), 1.0 + 1e-12) == doctest::Approx(0.0).epsilon(1e-9));
    const double h = 1e-6;
    const double fd = (jump_pgf(r2(), 1.5 + h) - jump_pgf(r2(), 1.5 - h)) / (2 * h);
    CHECK(jump_pgf_derivative(r2(), 1.5) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("rho closed forms and monotonicity") {
    CHECK(rho(nn(), 1.0 / 0.8) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(rho(nn(), 1.0 / 0.5) == doctest::Approx(2.0 + std::sqrt(3.0)).epsilon(1e-13));
    const double t = rho(nn(), 1.0 + 1e-9);
    CHECK(t > 1.0);
    CHECK(t < 1.001);
    CHECK(jump_pgf(nn(), t) == doctest::Approx(1.0 + 1e-9).epsilon(1e-12));
    // closed form on a grid of subcritical means
    for (double m : {0.3, 0.5, 0.7, 0.8, 0.9, 0.95}) {
        const double expect = (1.0 + std::sqrt(1.0 - m * m)) / m;
        CHECK(rho(nn(), 1.0 / m) == doctest::Approx(expect).epsilon(1e-12));
    }
    double prev = 0.0;
    for (double g : {1.1, 1.3, 1.7, 2.4, 4.0, 9.0}) {
        const double r = rho(r2(), g);
        CHECK(r > prev);
        prev = r;
    }
    CHECK_THROWS_AS(rho(nn(), 1.0), DomainError);
}

TEST_CASE("K is increasing and convex on a grid") {
    double prev = jump_pgf(r2(), 1.0);
    double prev_slope = 0.0;
    for (int i = 1; i <= 40; ++i) {
        const double th = 1.0 + 0.1 * i;
        const double v = jump_pgf(r2(), th);
        CHECK(v > prev);
        const double slope = (v - prev) / 0.1;
        CHECK(slope >= prev_slope - 1e-12);
        prev = v;
        prev_slope = slope;
    }
}

TEST_CASE("offspring pgf examples") {
    const auto quad = OffspringDistribution::create({0.25, 0.0, 0.75});
    CHECK(offspring_pgf(quad, 1.0 / 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(offspring_pgf(quad, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    const auto lin = OffspringDistribution::create({0.2, 0.8});
    CHECK(offspring_pgf(lin, 0.5) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK_THROWS_AS(offspring_pgf(lin, 1.5), DomainError);
}

TEST_CASE("Q examples and the f relation") {
    const auto bin = OffspringDistribution::create({0.2, 0.8});
    for (double s = 0.0; s <= 1.0; s += 0.125)
        CHECK(offspring_Q(bin, s) == doctest::Approx(0.8 * s).epsilon(1e-14));
    const auto tri = OffspringDistribution::create({0.3, 0.4, 0.3});
    CHECK(offspring_Q(tri, 0.5) == doctest::Approx(0.425).epsilon(1e-14));
    CHECK(offspring_Q(tri, 0.0) == 0.0);

    const auto geo = builtin_model("r2-geom-m07").offspring;
    for (int i = 0; i <= 1000; ++i) {
        const double s = i * 1e-3;
        CHECK(offspring_Q(geo, s) ==
              doctest::Approx(1.0 - offspring_pgf(geo, 1.0 - s)).epsilon(1e-12));
    }
}

TEST_CASE("Q stays relatively accurate at tiny arguments") {
    // The naive 1 - f(1-s) form loses everything below s ~ 1e-16.
    const auto geo = builtin_model("r2-geom-m07").offspring;
    const double m = geo.mean();
    for (double s : {1e-10, 1e-50, 1e-150, 1e-300}) {
        const double q = offspring_Q(geo, s);
        CHECK(q / (m * s) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(q <= m * s);
    }
}

TEST_CASE("Q derivative bounded by the mean") {
    const auto geo = builtin_model("r2-geom-m07").offspring;
    const double m = geo.mean();
    const double h = 1e-7;
    for (int i = 1; i < 100; ++i) {
        const double s = i * 0.01;
        const double qp = (offspring_Q(geo, s + h) - offspring_Q(geo, s - h)) / (2 * h);
        CHECK(qp <= m + 1e-9);
        CHECK(qp > 0.0);
    }
}

TEST_CASE("h and H") {
    const auto geo = builtin_model("r2-geom-m07").offspring;
    const double m = geo.mean();
    const double p0 = geo.p(0);
    CHECK(offspring_H(geo, 1.0) == doctest::Approx((m - 1.0 + p0) / m).epsilon(1e-13));
    CHECK(offspring_H(geo, 0.0) == 0.0);
    const auto bin = OffspringDistribution::create({0.2, 0.8});
    for (double s : {0.1, 0.5, 1.0}) {
        CHECK(offspring_h(bin, s) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(offspring_H(bin, s) == doctest::Approx(0.0).epsilon(1e-14));
    }
    // nondecreasing and bounded
    double prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
        const double s = i / 200.0;
        const double v = offspring_H(geo, s);
        CHECK(v >= prev - 1e-13);
        CHECK(v <= (m - 1.0 + p0) / m + 1e-12);
        CHECK(v >= -1e-15);
        prev = v;
    }
    CHECK(offspring_h(geo, 0.3) >= 0.0);
}

TEST_CASE("extinction probability") {
    CHECK(extinction_probability(OffspringDistribution::create({0.25, 0.0, 0.75})) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(extinction_probability(OffspringDistribution::create({0.2, 0.0, 0.8})) ==
          doctest::Approx(0.25).epsilon(1e-13));
    CHECK(extinction_probability(OffspringDistribution::create({0.2, 0.8})) == 1.0);
    CHECK(extinction_probability(builtin_model("r2-geom-m07").offspring) == 1.0);
}

TEST_CASE("dual offspring") {
    const auto a = OffspringDistribution::create({0.25, 0.0, 0.75});
    const auto da = dual_offspring(a);
    CHECK(da.p(0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(da.p(2) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(da.mean() == doctest::Approx(0.5).epsilon(1e-12));

    const auto b = OffspringDistribution::create({0.2, 0.0, 0.8});
    const auto db = dual_offspring(b);
    CHECK(db.p(0) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(db.p(2) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(db.mean() == doctest::Approx(0.4).epsilon(1e-12));

    // conjugation invariants: sum 1, mean = f'(q)
    const double q = extinction_probability(a);
    double sum = 0.0;
    for (double p : da.probabilities()) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(da.mean() == doctest::Approx(offspring_pgf_derivative(a, q)).epsilon(1e-12));

    // involution: conjugating back by the dual's fixed point 1/q recovers the law
    for (int k = 0; k <= 2; ++k)
        CHECK(da.p(k) * std::pow(q, 1.0 - k) == doctest::Approx(a.p(k)).epsilon(1e-12));

    CHECK_THROWS_AS(dual_offspring(OffspringDistribution::create({0.2, 0.8})), DomainError);
}

TEST_CASE("validation collects every violation") {
    auto issues = JumpDistribution::validate({{1, 0.6}, {1, 0.3}});
    // duplicate offset + bad sum + nonzero mean
    CHECK(issues.size() >= 3);

    CHECK_THROWS_AS(JumpDistribution::create({{-1, 0.4}, {1, 0.6}}), ValidationError);
    CHECK_THROWS_AS(JumpDistribution::create({{-1, 0.5}, {-2, 0.5}}), ValidationError);
    CHECK_NOTHROW(JumpDistribution::create({{-1, 0.4}, {1, 0.6}},
                                           JumpDistribution::MeanPolicy::relaxed));

    CHECK_THROWS_AS(OffspringDistribution::create({0.5, 0.49}), ValidationError);
    CHECK_THROWS_AS(OffspringDistribution::create({-0.1, 1.1}), ValidationError);

    // supercritical mode needs p0 > 0 and mean > 1
    CHECK_THROWS_AS(ModelSpec::create(nn(), OffspringDistribution::create({0.0, 0.0, 1.0}),
                                      Mode::supercritical, "x"),
                    ValidationError);
    CHECK_THROWS_AS(ModelSpec::create(nn(), OffspringDistribution::create({0.2, 0.8}),
                                      Mode::supercritical, "x"),
                    ValidationError);
    CHECK_THROWS_AS(ModelSpec::create(nn(), OffspringDistribution::create({0.25, 0.0, 0.75}),
                                      Mode::subcritical, "x"),
                    ValidationError);
}

TEST_CASE("ranges and reflection") {
    const auto j = r2();
    CHECK(j.right_range() == 2);
    CHECK(j.left_range() == 2);
    CHECK(j.nearly_right_continuous());
    const auto p2 = JumpDistribution::create({{-2, 0.5}, {2, 0.5}});
    CHECK_FALSE(p2.nearly_right_continuous());
    const auto r = j.reflected();
    CHECK(r.prob_at(2) == doctest::Approx(0.25));
    CHECK(r.prob_at(-1) == doctest::Approx(0.3));
    CHECK(r.mean() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("builtin moments") {
    const auto geo = builtin_model("r2-geom-m07").offspring;
    CHECK(geo.mean() == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(geo.variance() == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(geo.third_moment() == doctest::Approx(3.04).epsilon(1e-12));
}
