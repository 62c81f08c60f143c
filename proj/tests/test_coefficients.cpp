#include <doctest.h>

#include <cmath>

#include "spdelab/coefficients.hpp"
#include "spdelab/errors.hpp"

using namespace spdelab;

TEST_CASE("burgers preset") {
  const CoefficientSet c = preset("burgers");
  CHECK(c.g2(0.3, 2.0) == 2.0);
  CHECK(c.f(0.1, 0.2, 5.0) == 0.0);
  CHECK(c.sigma(0.0, 0.5, 0.0) == 1.0);
  CHECK(c.K == 0.5);
  CHECK(c.K_prime == 1.0);
  for (double r = -10; r <= 10; r += 0.25) {
    CHECK(std::abs(c.g2(0.0, r)) <= 0.5 * (1 + r * r));
    CHECK(c.g_prime(0.0, 0.3, r) == doctest::Approx(r));
  }
  const AssumptionReport rep = check_assumptions(c);
  CHECK(rep.all_pass());
  CHECK(rep.r_min == -10.0);
  CHECK(rep.r_max == 10.0);
  CHECK(rep.sigma_min_abs >= 0.5);
}

TEST_CASE("reaction-diffusion preset") {
  const CoefficientSet c = preset("reaction_diffusion");
  CHECK(c.f(0, 0.5, 2.0) == doctest::Approx(2.0 - 8.0));
  CHECK(c.g(0, 0.5, 3.0) == 0.0);
  // linear growth far outside the cap
  const double slope = (c.f(0, 0.5, 200.0) - c.f(0, 0.5, 100.0)) / 100.0;
  CHECK(c.f(0, 0.5, 300.0) - c.f(0, 0.5, 200.0) == doctest::Approx(100.0 * slope));
  AssumptionPlan wide;
  wide.r_min = -60;
  wide.r_max = 60;
  wide.r_points = 481;
  CHECK(check_assumptions(c, wide).all_pass());
  CHECK(check_assumptions(c).all_pass());
}

TEST_CASE("derivatives match centered differences") {
  const double h = 1e-5;
  for (const char* name : {"burgers", "reaction_diffusion", "heat"}) {
    const CoefficientSet c = preset(name);
    for (double r = -30; r <= 30; r += 0.7) {
      const double t = 0.4, x = 0.6;
      CHECK(c.f_prime(t, x, r) == doctest::Approx((c.f(t, x, r + h) - c.f(t, x, r - h)) / (2 * h)).epsilon(1e-6));
      CHECK(c.g_prime(t, x, r) == doctest::Approx((c.g(t, x, r + h) - c.g(t, x, r - h)) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("derivative growth consequence |f'| <= L(1 + 2|r|)") {
  for (const char* name : {"burgers", "reaction_diffusion"}) {
    const CoefficientSet c = preset(name);
    for (double r = -10; r <= 10; r += 0.1) {
      CHECK(std::abs(c.f_prime(0, 0.5, r)) <= c.L * (1 + 2 * std::abs(r)) + 1e-9);
      CHECK(std::abs(c.g_prime(0, 0.5, r)) <= c.L * (1 + 2 * std::abs(r)) + 1e-9);
    }
  }
}

TEST_CASE("g2 carries no x-dependence") {
  CustomSpec spec;
  spec.g1 = "x * r";
  spec.g2 = "r^2/2";
  const CoefficientSet c = custom(spec);
  CHECK(c.g(0, 0.2, 1.0) - c.g(0, 0.7, 1.0) == doctest::Approx(c.g1(0, 0.2, 1.0) - c.g1(0, 0.7, 1.0)));
  spec.g2 = "x * r";
  CHECK_THROWS_AS(custom(spec), ConfigError);
}

TEST_CASE("audit catches violations") {
  CustomSpec spec;
  spec.sigma = "r";
  spec.L = 1.0;
  spec.sigma_bound = 5.0;
  const AssumptionReport rep = check_assumptions(custom(spec));
  CHECK_FALSE(rep.passes("H3"));
  CHECK(rep.passes("H1"));

  CustomSpec zero;
  zero.K = 1e-6;
  CHECK(check_assumptions(custom(zero)).passes("H1"));
}

TEST_CASE("unknown preset") {
  try {
    preset("kdv");
    FAIL("accepted unknown preset");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "preset");
  }
}
