#pragma once

#include <optional>
#include <vector>

#include "spdelab/grid.hpp"
#include "spdelab/solvers.hpp"

namespace spdelab {

/// The skeleton map A: hdot -> X^h around a fixed base path, and its exact
/// discrete transpose. Both directions use the same sampled coefficients so
/// that <A h, mu>_path = <h, A* mu>_control holds to rounding.
class SkeletonOperator {
 public:
  SkeletonOperator(const CoefficientSet& c, const PathField& base);

  const GridSpec& grid() const noexcept { return lin_.grid; }
  const LinearizedCoefficients& coefficients() const noexcept { return lin_; }

  PathField forward(const Control& h) const;
  /// Reverse-time recursion with transposed tridiagonal solves and transposed
  /// difference operators.
  Control adjoint(const PathField& mu) const;

 private:
  LinearizedCoefficients lin_;
};

PathField forward_map(const Control& h, const PathField& base, const SimParams& p);
Control adjoint_map(const PathField& mu, const PathField& base, const SimParams& p);

struct RateOptions {
  double regularization = 1e-6;
  double tolerance = 1e-10;  // relative CG residual
  int max_iterations = 5000;
};

struct RateCertificate {
  double value = 0.0;  // h_norm_sq(minimizer) / 2
  Control minimizer;
  PathField multiplier;  // mu solving (A A* + reg) mu = target
  double residual = 0.0;  // sup_l2 of A minimizer - target
  double dual_lower_bound = 0.0;
  int cg_iterations = 0;
  double cg_relative_residual = 0.0;
  double regularization = 0.0;
  double sigma_min_abs = 0.0;
  bool sigma_degenerate = false;  // sampled |sigma(U^0)| fell below 1e-3
};

/// Tikhonov path to the min-norm control: solve (A A* + reg) mu = target by
/// conjugate gradient, minimizer = A* mu. Throws ConvergenceError if the
/// iteration cap is hit and ConfigError on NaN input.
RateCertificate evaluate_rate(const PathField& target, const SkeletonOperator& op, const RateOptions& opts = {});
RateCertificate evaluate_rate(const PathField& target, const PathField& base, const SimParams& p,
                              const RateOptions& opts = {});

/// <target, mu> - |A* mu|^2 / 2: a lower bound on I(target) for every mu.
double rate_lower_bound_functional(const PathField& target, const SkeletonOperator& op, const PathField& mu);
double rate_lower_bound_functional(const PathField& target, const PathField& base, const SimParams& p,
                                   const PathField& mu);

struct RateLadderEntry {
  double regularization = 0.0;
  double value = 0.0;
  double residual = 0.0;
  double dual_lower_bound = 0.0;
  int cg_iterations = 0;
};

struct RateLadder {
  std::vector<RateLadderEntry> entries;
  /// Linear extrapolation of value(reg) to reg = 0 from the two smallest regs.
  double extrapolated_value = 0.0;
  /// Residual failed to shrink along the ladder: the target looks unattainable.
  bool residual_stalled = false;
  std::optional<RateCertificate> finest;
};

RateLadder evaluate_rate_ladder(const PathField& target, const SkeletonOperator& op, std::vector<double> regs,
                                const RateOptions& opts = {});

}  // namespace spdelab
