#include <doctest.h>

#include <cmath>

#include "spdelab/errors.hpp"
#include "spdelab/experiments.hpp"

using namespace spdelab;

namespace {

StudyConfig small_config() {
  StudyConfig c;
  c.grid = GridSpec(16, 256, 0.5);
  c.paths = 16;
  c.master_seed = 99;
  return c;
}

bool same_rows(const std::vector<StudyRow>& a, const std::vector<StudyRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto& x = a[k];
    const auto& y = b[k];
    auto eq = [](double u, double v) { return (std::isnan(u) && std::isnan(v)) || u == v; };
    if (x.statistic != y.statistic || !eq(x.epsilon, y.epsilon) || !eq(x.value, y.value) ||
        !eq(x.std_error, y.std_error) || !eq(x.ci_low, y.ci_low) || !eq(x.ci_high, y.ci_high) || x.paths != y.paths)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("config validation") {
  StudyConfig c = small_config();
  c.epsilon_ladder = {1e-3, 1e-2};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.epsilon_ladder = {};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.epsilon_ladder = {1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.require_moderate_regime = false;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("contraction study: shape and localization consistency") {
  const StudyConfig c = small_config();
  const StudyResult r = contraction_study(c);
  REQUIRE(r.ladder.size() == 3);
  REQUIRE(r.regression.has_value());
  CHECK_FALSE(r.degenerate);
  for (const auto& p : r.ladder) CHECK(p.exceedance_fraction == 0.0);
  // with no exceedance the filtered and unfiltered estimates coincide
  for (std::size_t k = 0; k + 1 < r.rows.size(); ++k)
    if (r.rows[k].statistic == "mean_sup_sq") CHECK(r.rows[k].value == r.rows[k + 1].value);
  CHECK(r.regression->slope == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("contraction study without noise is degenerate") {
  StudyConfig c = small_config();
  c.coefficients.sigma = [](double, double, double) { return 0.0; };
  const StudyResult r = contraction_study(c);
  CHECK(r.degenerate);
  CHECK_FALSE(r.regression.has_value());
  for (const auto& p : r.ladder) CHECK(p.estimate == 0.0);
}

TEST_CASE("every path exceeding the cap is a study error") {
  StudyConfig c = small_config();
  c.amplitude_cap = 1e-3;
  CHECK_THROWS_AS(contraction_study(c), StudyError);
}

TEST_CASE("results do not depend on the worker count") {
  StudyConfig c = small_config();
  c.threads = 1;
  const StudyResult a = clt_study(c);
  c.threads = 8;
  const StudyResult b = clt_study(c);
  CHECK(same_rows(a.rows, b.rows));
}

TEST_CASE("clt study: coupled gap shrinks, uncoupled gap does not") {
  const StudyResult r = clt_study(small_config());
  double prev = 1e300;
  for (const auto& p : r.ladder) {
    CHECK(p.estimate < prev);
    prev = p.estimate;
  }
  double uncoupled = 0.0;
  for (const auto& row : r.rows)
    if (row.statistic == "uncoupled_mean_sup_gap") uncoupled = row.value;
  CHECK(uncoupled > 5.0 * r.ladder.back().estimate);
}

TEST_CASE("mdp: zero shift reproduces the naive estimator") {
  StudyConfig c = small_config();
  c.event_threshold = 0.15;
  c.epsilon_ladder = {1e-2};
  MdpOptions o;
  o.is_control = Control(c.grid);
  const MdpResult r = mdp_tail_study(c, o);
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].is_estimate == r.points[0].naive_estimate);
  CHECK(r.points[0].effective_sample_size == doctest::Approx(static_cast<double>(c.paths)));
}

TEST_CASE("mdp: unreachable threshold gives a one-sided interval") {
  StudyConfig c = small_config();
  c.event_threshold = 50.0;
  c.epsilon_ladder = {1e-2};
  MdpOptions o;
  o.importance_sampling = false;
  const MdpResult r = mdp_tail_study(c, o);
  CHECK(r.points[0].hits == 0);
  CHECK(r.points[0].naive_ci.low == 0.0);
  CHECK(r.points[0].naive_ci.high > 0.0);
  CHECK(std::isinf(r.points[0].naive_speed_normalized));
  CHECK_FALSE(r.study.warnings.empty());
}

TEST_CASE("mdp: control outside S_N is rejected") {
  StudyConfig c = small_config();
  c.epsilon_ladder = {1e-2};
  MdpOptions o;
  Control big(c.grid);
  for (double& v : big.raw()) v = 100.0;
  o.is_control = big;
  o.control_radius = 1.0;
  CHECK_THROWS_AS(mdp_tail_study(c, o), ContractViolation);
}

TEST_CASE("refinement study") {
  RefinementConfig rc;
  rc.base = small_config();
  rc.base.grid = GridSpec(7, 32, 0.25);
  rc.base.paths = 8;
  rc.levels = 2;
  rc.spatial_nx = {7, 15, 31};
  rc.spatial_nt = 8192;
  rc.temporal_nt = {16, 32, 64};
  rc.temporal_nx = 127;
  const RefinementResult r = grid_refinement_study(rc);
  CHECK(r.spatial_order == doctest::Approx(2.0).epsilon(0.1));
  CHECK(r.temporal_order == doctest::Approx(1.0).epsilon(0.15));
  CHECK(r.refine_consistent);
  REQUIRE(r.stochastic_gaps.size() == 2);
  CHECK(r.stochastic_gaps[1] < r.stochastic_gaps[0]);
}
