#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spdelab/errors.hpp"
#include "spdelab/rate_function.hpp"

using namespace spdelab;

namespace {

struct Fixture {
  GridSpec grid{16, 64, 0.5};
  SimParams params{grid, burgers(), SpaceField(grid, [](double x) { return std::sin(std::numbers::pi * x); })};
  PathField base = solve_deterministic(params).path;
  SkeletonOperator op{params.coefficients, base};
  std::mt19937_64 rng{2024};
  std::normal_distribution<double> nd;

  Control random_control() {
    Control h(grid);
    for (double& v : h.raw()) v = nd(rng);
    return h;
  }
  PathField random_path() {
    PathField p(grid);
    for (std::size_t n = 0; n < p.frames(); ++n)
      for (double& v : p.interior(n)) v = nd(rng);
    return p;
  }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "zero maps to zero") {
  CHECK(sup_l2_norm(op.forward(Control(grid)), grid) == 0.0);
  CHECK(h_norm_sq(op.adjoint(PathField(grid)), grid) == 0.0);
  CHECK(sup_l2_norm(forward_map(Control(grid), base, params), grid) == 0.0);
  const RateCertificate c = evaluate_rate(PathField(grid), op);
  CHECK(c.value == 0.0);
  CHECK(c.residual == 0.0);
  CHECK(h_norm_sq(c.minimizer, grid) == 0.0);
  CHECK(rate_lower_bound_functional(random_path(), op, PathField(grid)) == 0.0);
}

TEST_CASE_FIXTURE(Fixture, "discrete adjoint duality on random pairs") {
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Control h = random_control();
    const PathField mu = random_path();
    const PathField ah = op.forward(h);
    const Control amu = adjoint_map(mu, base, params);
    const double lhs = path_inner(ah, mu);
    const double rhs = control_inner(h, amu);
    const double scale = std::sqrt(path_inner(ah, ah) * path_inner(mu, mu));
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
    // roles swapped: <A* mu, h> = <mu, A h>
    CHECK(control_inner(amu, h) == doctest::Approx(path_inner(mu, ah)).epsilon(1e-10));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE_FIXTURE(Fixture, "recovers the energy of a min-norm control") {
  // The Gram operator has eigenvalues far below 1e-6 on this grid, so reg = 1e-6
  // biases the value by several percent; 1e-10 leaves a 1e-5 relative bias.
  for (int k = 0; k < 10; ++k) {
    const Control h0 = op.adjoint(random_path());
    const PathField target = op.forward(h0);
    const RateCertificate c =
        evaluate_rate(target, op, {.regularization = 1e-10, .tolerance = 1e-12, .max_iterations = 20000});
    CHECK(c.value == doctest::Approx(0.5 * h_norm_sq(h0, grid)).epsilon(0.01));
    CHECK(c.value == doctest::Approx(0.5 * h_norm_sq(c.minimizer, grid)).epsilon(1e-15));
    CHECK(c.dual_lower_bound == doctest::Approx(c.value).epsilon(0.02));
    CHECK(rate_lower_bound_functional(target, op, c.multiplier) == doctest::Approx(c.dual_lower_bound).epsilon(1e-9));
  }
}

TEST_CASE_FIXTURE(Fixture, "feasible controls bound the rate from above") {
  for (int k = 0; k < 20; ++k) {
    const Control h = random_control();
    const PathField target = op.forward(h);
    const RateCertificate c = evaluate_rate(target, op, {.regularization = 1e-6, .tolerance = 1e-10});
    CHECK(c.value <= 0.5 * h_norm_sq(h, grid) + 1e-6);
    // weak duality for an arbitrary multiplier
    CHECK(rate_lower_bound_functional(target, op, random_path()) <= 0.5 * h_norm_sq(h, grid) + 1e-12);
  }
}

TEST_CASE_FIXTURE(Fixture, "value increases toward I as the regularization shrinks") {
  const PathField target = op.forward(op.adjoint(random_path()));
  double prev = -1.0;
  for (double reg : {1e-2, 1e-4, 1e-6}) {
    const RateCertificate c = evaluate_rate(target, op, {.regularization = reg, .tolerance = 1e-10});
    CHECK(c.value >= prev);
    prev = c.value;
  }
}

TEST_CASE_FIXTURE(Fixture, "quadratic scaling") {
  const PathField target = op.forward(op.adjoint(random_path()));
  const RateOptions o{.regularization = 1e-8, .tolerance = 1e-11};
  const double v1 = evaluate_rate(target, op, o).value;
  const double v3 = evaluate_rate(3.0 * target, op, o).value;
  CHECK(v3 == doctest::Approx(9.0 * v1).epsilon(1e-6));
}

TEST_CASE_FIXTURE(Fixture, "rate ladder flags unattainable targets") {
  const PathField good = op.forward(op.adjoint(random_path()));
  const RateLadder ok = evaluate_rate_ladder(good, op, {1e-2, 1e-4, 1e-6});
  CHECK(ok.entries.size() == 3);
  CHECK(ok.entries.front().regularization == 1e-2);
  CHECK_FALSE(ok.residual_stalled);
  CHECK(ok.extrapolated_value >= ok.entries.back().value);
  REQUIRE(ok.finest.has_value());

  // X^h(0) = 0 for every h, so a nonzero initial frame is out of range.
  PathField bad = good;
  for (double& v : bad.interior(0)) v = 1.0;
  const RateLadder stalled = evaluate_rate_ladder(bad, op, {1e-6, 1e-2, 1e-4});
  CHECK(stalled.residual_stalled);
}

TEST_CASE_FIXTURE(Fixture, "errors and diagnostics") {
  const PathField target = op.forward(random_control());
  CHECK_THROWS_AS(evaluate_rate(target, op, {.regularization = 1e-8, .tolerance = 1e-12, .max_iterations = 1}),
                  ConvergenceError);
  CHECK_THROWS_AS(evaluate_rate(target, op, {.regularization = 0.0}), ContractViolation);
  PathField nan = target;
  nan.interior(3)[2] = std::nan("");
  CHECK_THROWS_AS(evaluate_rate(nan, op), ConfigError);
  CHECK_THROWS_AS(evaluate_rate(PathField(GridSpec(16, 32, 0.5)), op), ContractViolation);

  CustomSpec weak;
  weak.sigma = "1e-4";
  const SkeletonOperator small(custom(weak), base);
  const RateCertificate c = evaluate_rate(small.forward(random_control()), small, {.regularization = 1e-4});
  CHECK(c.sigma_degenerate);
  CHECK_FALSE(evaluate_rate(target, op).sigma_degenerate);
}
