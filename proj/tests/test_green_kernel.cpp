#include <doctest.h>

#include <cmath>
#include <random>

#include "spdelab/errors.hpp"
#include "spdelab/green_kernel.hpp"

using namespace spdelab;

TEST_CASE("Dirichlet boundary and symmetry") {
  KernelConfig cfg;
  for (double t : {1e-3, 0.03, 0.1, 0.7}) {
    for (double y : {0.0, 0.2, 0.5, 0.9}) {
      CHECK(green(t, 0.0, y, cfg) == 0.0);
      CHECK(green(t, 1.0, y, cfg) == 0.0);
    }
    for (double x : {0.1, 0.37, 0.8})
      for (double y : {0.05, 0.5, 0.93}) CHECK(green(t, x, y, cfg) == doctest::Approx(green(t, y, x, cfg)).epsilon(1e-13));
  }
}

TEST_CASE("reference values") {
  // Oracle: high-precision direct summation of both series.
  CHECK(green(0.1, 0.5, 0.5) == doctest::Approx(0.745693231264826).epsilon(1e-13));
  CHECK(green(0.01, 0.3, 0.4) == doctest::Approx(2.196942948771669).epsilon(1e-13));
  CHECK(green_dx(0.01, 0.3, 0.4) == doctest::Approx(10.98525468653601).epsilon(1e-12));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(green(0.0, 0.5, 0.5), DomainError);
  CHECK_THROWS_AS(green(-1.0, 0.5, 0.5), DomainError);
  CHECK_THROWS_AS(green(0.1, 1.5, 0.5), DomainError);
  CHECK_THROWS_AS(green_dx(0.1, 0.5, -0.1), DomainError);
  KernelConfig bad;
  bad.series_terms = 0;
  CHECK_THROWS_AS(bad.validate(1.0), ContractViolation);
  bad = KernelConfig{};
  bad.crossover_time = 2.0;
  CHECK_THROWS_AS(bad.validate(1.0), ContractViolation);
}

TEST_CASE("branch agreement on a 33 x 33 lattice") {
  double worst = 0.0;
  for (double t : {1e-3, 3e-3, 1e-2, 0.03, 0.05, 0.1, 0.25, 0.5})
    for (int i = 0; i <= 32; ++i)
      for (int j = 0; j <= 32; ++j) {
        const double x = i / 32.0, y = j / 32.0;
        worst = std::max(worst, std::abs(green_spectral(t, x, y, 1e-12) - green_images(t, x, y, 1e-12)));
        worst = std::max(worst, 1e-3 * std::abs(green_dx_spectral(t, x, y, 1e-12) - green_dx_images(t, x, y, 1e-12)));
      }
  CHECK(worst <= 1e-8);
}

TEST_CASE("positivity") {
  for (double t : {1e-3, 0.02, 0.2, 1.0})
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j) CHECK(green(t, i / 20.0, j / 20.0) >= -1e-12);
}

TEST_CASE("derivative antisymmetry and finite differences") {
  for (double t : {0.004, 0.05, 0.3})
    for (double a : {0.05, 0.2, 0.4})
      CHECK(green_dx(t, 0.5, 0.5 - a) == doctest::Approx(-green_dx(t, 0.5, 0.5 + a)).epsilon(1e-10));

  // Centered differences converge at second order.
  for (double t : {0.01, 0.2}) {
    const double x = 0.31, y = 0.47;
    auto fd = [&](double h) { return (green(t, x + h, y) - green(t, x - h, y)) / (2 * h); };
    const double e1 = std::abs(fd(1e-2) - green_dx(t, x, y));
    const double e2 = std::abs(fd(5e-3) - green_dx(t, x, y));
    CHECK(e2 < 0.3 * e1);
    CHECK(green_dy(t, x, y) == doctest::Approx(green_dx(t, y, x)));
    auto fdt = (green(t + 1e-5, x, y) - green(t - 1e-5, x, y)) / 2e-5;
    CHECK(green_dt(t, x, y) == doctest::Approx(fdt).epsilon(1e-5));
  }
  // Small t, x < y: the leading image term has positive slope.
  CHECK(green_dx(1e-3, 0.4, 0.45) > 0.0);
}

TEST_CASE("semigroup property") {
  KernelConfig cfg;
  const GridSpec quad(256, 1, 1.0);
  const double d = semigroup_defect(0.1, 0.1, cfg, quad);
  CHECK(d < 1e-6);
  CHECK(semigroup_defect(0.05, 0.15, cfg, quad) == doctest::Approx(semigroup_defect(0.15, 0.05, cfg, quad)).epsilon(1e-6));
  CHECK_THROWS_AS(semigroup_defect(0.0, 0.1, cfg, quad), DomainError);
}

TEST_CASE("mass is at most one and decays") {
  KernelConfig cfg;
  const GridSpec quad(400, 1, 1.0);
  for (double x : {0.1, 0.5, 0.8}) {
    double prev = 2.0;
    for (double t : {0.005, 0.01, 0.05, 0.1, 0.3, 1.0}) {
      const double m = kernel_mass(t, x, cfg, quad);
      CHECK(m <= 1.0 + 1e-9);
      CHECK(m <= prev + 1e-12);
      prev = m;
    }
  }
}

TEST_CASE("apply_J is linear") {
  const GridSpec g(15, 20, 0.5);
  PathField v(g), w(g);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (std::size_t n = 0; n < v.frames(); ++n) {
    for (double& a : v.interior(n)) a = nd(rng);
    for (double& a : w.interior(n)) a = nd(rng);
  }
  for (KernelKind kind : {KernelKind::G, KernelKind::GSquared, KernelKind::DyG}) {
    CHECK(sup_l2_norm(apply_J(PathField(g), kind), g) == 0.0);
    const PathField lhs = apply_J(2.0 * v + (-3.0) * w, kind);
    const PathField rhs = 2.0 * apply_J(v, kind) + (-3.0) * apply_J(w, kind);
    CHECK(sup_l2_distance(lhs, rhs) <= 1e-12 * (1.0 + sup_l2_norm(rhs, g)));
  }
}

TEST_CASE("bounded operator estimate with rho = 2, q = 1") {
  // ||J(v)(t)||_2 <= C int_0^t (t - r)^{-3/4} ||v(r)||_1 dr over random v: the
  // fitted C stays bounded as the inputs vary.
  const GridSpec g(31, 40, 0.5);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    PathField v(g);
    for (std::size_t n = 0; n < v.frames(); ++n)
      for (double& a : v.interior(n)) a = nd(rng) * (trial % 2 ? 1.0 : 10.0);
    const PathField j = apply_J(v, KernelKind::G);
    for (std::size_t n = 1; n < j.frames(); ++n) {
      double rhs = 0.0;
      for (std::size_t m = 0; m < n; ++m) rhs += g.dt() * std::pow(g.t(n) - g.t(m), -0.75) * l1_norm(v.interior(m), g);
      worst = std::max(worst, l2_norm(j.interior(n), g) / rhs);
    }
  }
  CHECK(std::isfinite(worst));
  CHECK(worst < 10.0);
}

TEST_CASE("audit plan validation") {
  AuditPlan plan = default_audit_plan();
  plan.p_values_4 = {1.2};
  CHECK_THROWS_AS(audit_bounds(KernelConfig{}, plan), ContractViolation);
  plan = default_audit_plan();
  plan.p_values_56 = {3.0};
  CHECK_THROWS_AS(audit_bounds(KernelConfig{}, plan), ContractViolation);
  plan = default_audit_plan();
  plan.gammas = {1.0};
  CHECK_THROWS_AS(audit_bounds(KernelConfig{}, plan), ContractViolation);
}

TEST_CASE("estimate 6 exponent at p = 2") {
  const AuditPlan plan = default_audit_plan();
  const std::vector<double> xs{0.3, 0.5};
  std::vector<double> lx, ly;
  for (double gap : {1e-4, 1e-3, 1e-2}) {
    lx.push_back(std::log(gap));
    ly.push_back(std::log(kernel_power_integral(0.0, gap, 2.0, xs, KernelConfig{}, plan)));
  }
  CHECK((ly[2] - ly[0]) / (lx[2] - lx[0]) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("audit reports degenerate pairs") {
  const BoundAuditReport rep = audit_bounds(KernelConfig{}, default_audit_plan());
  REQUIRE(rep.records.size() == 7);
  CHECK(rep.records[6].degenerate_skipped > 0);
  CHECK(rep.all_pass());
  const auto& r1 = rep.records[0];
  CHECK(r1.fitted_constant > 0.0);
  CHECK(std::isfinite(r1.fitted_constant));
}
