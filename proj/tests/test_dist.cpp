#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pubshare/dist.hpp"

using namespace pubshare;

namespace {

const char* kAllSpecs[] = {
    "uniform",
    "normal:0.5,0.1",
    "exponential:1",
    "logistic:0.5,0.1",
    "twopeak:0.1,0.1,0.9,0.1,0.5",
    "kumaraswamy:0.1,0.354",
};

} // namespace

TEST_SUITE("dist") {

TEST_CASE("spec strings round-trip through the parser") {
    for (const char* spec : kAllSpecs) {
        Dist d = parse_dist(spec);
        CHECK(d.spec() == spec);
        CHECK(parse_dist(d.spec()).kind == d.kind);
    }
}

TEST_CASE("malformed specs are rejected") {
    CHECK_THROWS_AS(parse_dist("triangular"), std::invalid_argument);
    CHECK_THROWS_AS(parse_dist("normal:0.5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_dist("normal:0.5,0.1,7"), std::invalid_argument);
    CHECK_THROWS_AS(parse_dist("normal:abc,0.1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_dist("normal:0.5,0.1junk"), std::invalid_argument);
    CHECK_THROWS_AS(parse_dist(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_dist("uniform:1"), std::invalid_argument);
}

TEST_CASE("density integrates to one") {
    for (const char* spec : kAllSpecs) {
        Dist d = parse_dist(spec);
        CHECK(std::abs(integrate_density(d, 0.0, 1.0) - 1.0) < 1e-6);
    }
}

TEST_CASE("cdf matches integrated density on a grid") {
    for (const char* spec : kAllSpecs) {
        Dist d = parse_dist(spec);
        double worst = 0;
        for (int i = 1; i < 100; ++i) {
            double x = i / 100.0;
            worst = std::max(worst, std::abs(integrate_density(d, 0.0, x) - d.cdf(x)));
        }
        INFO(spec);
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("evaluation triple is consistent and bounded") {
    for (const char* spec : kAllSpecs) {
        Dist d = parse_dist(spec);
        double prev_cdf = 0;
        for (int i = 0; i <= 50; ++i) {
            double x = i / 50.0;
            EvalResult r = distribution_eval(d, x);
            CHECK(r.density >= 0.0);
            CHECK(r.cdf >= prev_cdf - 1e-12);
            CHECK(r.cdf <= 1.0 + 1e-12);
            CHECK(r.reliability == doctest::Approx(1.0 - r.cdf).epsilon(1e-12));
            prev_cdf = r.cdf;
        }
        CHECK(d.cdf(0.0) == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(d.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(distribution_eval(parse_dist("uniform"), -0.01), std::domain_error);
    CHECK_THROWS_AS(distribution_eval(parse_dist("uniform"), 1.01), std::domain_error);
}

TEST_CASE("uniform conditional welfare has the closed form (1-c)/2") {
    Dist d = parse_dist("uniform");
    for (double c : {0.0, 0.1, 0.25, 0.5, 0.77, 0.99}) {
        CHECK(conditional_welfare(d, c) == doctest::Approx((1.0 - c) / 2.0).epsilon(1e-9));
    }
}

TEST_CASE("conditional welfare reference values") {
    Dist ex = parse_dist("exponential:1");
    CHECK(conditional_welfare(ex, 0.5) == doctest::Approx(0.22925295873160095).epsilon(1e-8));
    CHECK(conditional_welfare(ex, 0.0) == doctest::Approx(0.41802329313067366).epsilon(1e-8));
    Dist tp = parse_dist("twopeak:0.2,0.1,0.6,0.1,0.5");
    CHECK(conditional_welfare(tp, 0.0) == doctest::Approx(0.4027557017145229).epsilon(1e-8));
}

TEST_CASE("conditional welfare vanishes at the top") {
    for (const char* spec : kAllSpecs)
        CHECK(conditional_welfare(parse_dist(spec), 1.0) == 0.0);
}

TEST_CASE("conditional welfare is nonincreasing exactly for log-concave kinds") {
    // Log-concavity implies a decreasing mean residual life; the bimodal and
    // bathtub-shaped kinds genuinely violate it (removing a low mass lump
    // raises the conditional mean faster than the threshold grows).
    auto max_increase = [](const Dist& d) {
        double prev = conditional_welfare(d, 0.0);
        double worst = 0;
        for (int i = 1; i <= 1000; ++i) {
            double w = conditional_welfare(d, i / 1000.0);
            worst = std::max(worst, w - prev);
            prev = w;
        }
        return worst;
    };
    for (const char* spec : {"uniform", "normal:0.5,0.1", "exponential:1", "logistic:0.5,0.1"}) {
        INFO(std::string(spec));
        CHECK(max_increase(parse_dist(spec)) <= 1e-9);
    }
    CHECK(max_increase(parse_dist("twopeak:0.1,0.1,0.9,0.1,0.5")) > 1e-4);
    CHECK(max_increase(parse_dist("kumaraswamy:0.1,0.354")) > 1e-2);
}

TEST_CASE("welfare derivative matches finite differences") {
    const double h = 1e-4;
    for (const char* spec : {"uniform", "normal:0.5,0.1", "twopeak:0.2,0.1,0.6,0.1,0.5"}) {
        Dist d = parse_dist(spec);
        for (double c : {0.1, 0.4, 0.65}) {
            double fd = (conditional_welfare(d, c + h) - conditional_welfare(d, c - h)) / (2 * h);
            INFO(spec << " at " << c);
            CHECK(conditional_welfare_derivative(d, c) == doctest::Approx(fd).epsilon(1e-4));
        }
    }
    CHECK(conditional_welfare_derivative(parse_dist("uniform"), 0.3) ==
          doctest::Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("sampling is deterministic with consistent prefixes") {
    for (const char* spec : kAllSpecs) {
        Dist d = parse_dist(spec);
        std::vector<double> a = sample(d, 42, 100);
        std::vector<double> b = sample(d, 42, 300);
        for (int i = 0; i < 100; ++i) {
            CHECK(a[i] == b[i]);
            CHECK(a[i] == draw_one(d, 42, i));
            CHECK(a[i] >= 0.0);
            CHECK(a[i] <= 1.0);
        }
        CHECK(sample(d, 43, 1)[0] != a[0]);
    }
}

TEST_CASE("probability transform of draws is uniform on average") {
    // E[F(X)] = 1/2 for a continuous F; 4-sigma band with Var = 1/12.
    const int kDraws = 50000;
    const double band = 4.0 / std::sqrt(12.0 * kDraws);
    for (const char* spec : kAllSpecs) {
        Dist d = parse_dist(spec);
        double total = 0;
        for (double v : sample(d, 7, kDraws)) total += d.cdf(v);
        INFO(spec);
        CHECK(std::abs(total / kDraws - 0.5) < band);
    }
}

TEST_CASE("profile draws depend only on the sample index") {
    Dist d = parse_dist("twopeak:0.1,0.1,0.9,0.1,0.5");
    double p1[5], p2[5];
    draw_profile(d, 9, 123, 5, p1);
    draw_profile(d, 9, 123, 5, p2);
    for (int i = 0; i < 5; ++i) CHECK(p1[i] == p2[i]);
    draw_profile(d, 9, 124, 5, p2);
    CHECK(p1[0] != p2[0]);
}

TEST_CASE("shape verdicts reflect the densities") {
    ShapeReport uni = shape_report(parse_dist("uniform"), 200);
    CHECK(uni.log_concave);
    CHECK(uni.welfare_concave);
    CHECK(uni.nonincreasing);
    CHECK(uni.grid_size == 200);

    ShapeReport ex = shape_report(parse_dist("exponential:1"), 200);
    CHECK(ex.log_concave);
    CHECK(ex.welfare_concave);
    CHECK(ex.nonincreasing);

    ShapeReport nm = shape_report(parse_dist("normal:0.5,0.1"), 200);
    CHECK(nm.log_concave);
    CHECK_FALSE(nm.nonincreasing);

    ShapeReport tp = shape_report(parse_dist("twopeak:0.1,0.1,0.9,0.1,0.5"), 200);
    CHECK_FALSE(tp.log_concave);

    ShapeReport ku = shape_report(parse_dist("kumaraswamy:0.1,0.354"), 200);
    CHECK_FALSE(ku.log_concave);
    CHECK_FALSE(ku.nonincreasing);
    CHECK(ku.monotonicity_violation > 0.0);
}

}
