#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/rate_function.hpp"
#include "spdelab/solvers.hpp"
#include "spdelab/statistics.hpp"

namespace spdelab {

struct StudyConfig {
  GridSpec grid{64, 4096, 1.0};
  CoefficientSet coefficients = burgers();
  std::function<double(double)> initial_profile;  // defaults to sin(pi x)
  std::vector<double> epsilon_ladder{1e-2, 1e-3, 1e-4};
  std::size_t paths = 64;
  DeviationScale deviation_scale = default_deviation_scale;
  double event_threshold = 1.0;  // delta, for the tail study
  double amplitude_cap = 1e300;  // M
  std::uint64_t master_seed = 1;
  unsigned threads = 1;
  /// Check sqrt(eps) lambda(eps) < 1 < lambda(eps) at every ladder point.
  bool require_moderate_regime = true;

  SpaceField initial_condition() const;
  /// Ladder must be non-empty, positive and strictly decreasing.
  void validate() const;
};

/// Stream offset for noises that must be independent of the main stream of
/// the same path.
inline constexpr std::uint64_t kIndependentStream = std::uint64_t{1} << 62;
/// Stream offset for pilot runs.
inline constexpr std::uint64_t kPilotStream = std::uint64_t{3} << 61;

struct StudyRow {
  double epsilon = 0.0;  // NaN for ladder-wide rows
  double lambda = 0.0;
  std::string statistic;
  double value = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t paths = 0;
  double exceedance_fraction = 0.0;
};

struct LadderPoint {
  double epsilon = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t paths_used = 0;
  double exceedance_fraction = 0.0;
};

struct StudyResult {
  std::string study;
  std::vector<LadderPoint> ladder;
  std::optional<LineFit> regression;  // log estimate vs log epsilon
  bool degenerate = false;            // some estimate is zero: slope undefined
  std::vector<StudyRow> rows;
  std::vector<std::string> warnings;
};

/// E[sup_t ||U^eps - U^0||_2^2] over paths that never reach the amplitude
/// cap, regressed on eps in log-log. Throws StudyError if every path of some
/// ladder point exceeded the cap.
StudyResult contraction_study(const StudyConfig& cfg);

/// E[sup_t ||(U^eps - U^0)/sqrt(eps) - V||_2] with V driven by the same noise
/// (coupled), plus the same statistic with V driven by an independent noise.
StudyResult clt_study(const StudyConfig& cfg);

struct MdpOptions {
  bool importance_sampling = true;
  /// Shift for the Girsanov estimator, used at every ladder point. When absent
  /// the shift is the reference control rescaled per epsilon so that its
  /// skeleton reaches sqrt(delta^2 - rho^2), rho^2 being a pilot estimate of
  /// E[sup_t ||X^eps(t)||^2] on an independent stream.
  std::optional<Control> is_control;
  /// A path inside the event used for the reference value of the rate
  /// function; defaults to delta sinh(pi^2 t)/sinh(pi^2 T) sin(pi x)/||sin||_2,
  /// the cheapest way for the heat equation to reach the sphere at T.
  std::optional<PathField> candidate;
  std::size_t pilot_paths = 64;
  double control_radius = 1e6;  // N of S_N
  RateOptions rate_options{.regularization = 1e-6, .tolerance = 1e-9, .max_iterations = 5000};
};

struct MdpLadderPoint {
  double epsilon = 0.0;
  double lambda = 0.0;
  std::size_t hits = 0;
  double naive_estimate = 0.0;
  Interval naive_ci;
  double is_estimate = 0.0;
  double is_std_error = 0.0;
  Interval is_ci;
  double effective_sample_size = 0.0;
  double shift_scale = 1.0;    // shift / reference control
  double control_energy = 0.0;  // h_norm_sq of the reference control used here
  double naive_speed_normalized = 0.0;  // -log(p) / lambda^2, +inf if no hits
  double is_speed_normalized = 0.0;
};

struct MdpResult {
  StudyResult study;
  std::vector<MdpLadderPoint> points;
  double reference_rate = 0.0;  // I(candidate), an upper bound on inf over the event
  double reference_residual = 0.0;
  double control_energy = 0.0;  // h_norm_sq of the reference control
};

/// P(sup_t ||X^eps||_2 >= delta) along the ladder by plain Monte Carlo on
/// X^{eps,0} and, optionally, by Girsanov importance sampling with weights
/// exp(-lambda sum vdot dW - lambda^2 |v|^2 / 2).
MdpResult mdp_tail_study(const StudyConfig& cfg, const MdpOptions& opts = {});

struct RefinementRow {
  std::string kind;  // spatial_error, temporal_error, stochastic_gap, coarse_bitwise_consistent, *_order
  std::size_t level = 0;
  std::size_t nx = 0;
  std::size_t nt = 0;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
};

struct RefinementConfig {
  StudyConfig base;  // base.grid is the coarsest grid of the stochastic ladder
  unsigned levels = 3;
  double epsilon = 1e-2;
  std::vector<std::size_t> spatial_nx{7, 15, 31, 63};
  std::size_t spatial_nt = 1 << 16;
  std::vector<std::size_t> temporal_nt{16, 32, 64, 128};
  std::size_t temporal_nx = 255;
  double heat_horizon = 0.1;
};

struct RefinementResult {
  std::vector<RefinementRow> rows;
  double spatial_order = 0.0;
  double temporal_order = 0.0;
  bool refine_consistent = false;
  std::vector<double> stochastic_gaps;
};

RefinementResult grid_refinement_study(const RefinementConfig& cfg);

}  // namespace spdelab
