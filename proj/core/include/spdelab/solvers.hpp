#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/noise.hpp"

namespace spdelab {

/// Factored (I - dt * Laplacian_h) on the interior nodes with Dirichlet rows
/// eliminated. The matrix is symmetric and strictly diagonally dominant, so
/// the Thomas sweep never divides by zero.
class ImplicitDiffusion {
 public:
  explicit ImplicitDiffusion(const GridSpec& grid);

  /// Solves (I - dt Laplacian_h) x = rhs; `rhs` and `x` may alias.
  void solve(std::span<const double> rhs, std::span<double> x) const;
  /// max_i |(I - dt Laplacian_h) x - rhs|_i
  double residual(std::span<const double> x, std::span<const double> rhs) const;

 private:
  double off_;  // -dt/dx^2
  double diag_;
  std::vector<double> upper_;      // modified super-diagonal c'_i
  std::vector<double> inv_pivot_;  // 1 / (diag - off * c'_{i-1})
};

using DeviationScale = std::function<double(double epsilon)>;

/// lambda(eps) = eps^(-1/4).
double default_deviation_scale(double epsilon);

/// Throws ConfigError (field "deviation_scale") unless lambda(eps) > 1 and
/// sqrt(eps) lambda(eps) < 1.
void check_moderate_regime(const DeviationScale& scale, double epsilon);

struct SimParams {
  GridSpec grid;
  CoefficientSet coefficients;
  SpaceField initial;
  double epsilon = 0.0;
  DeviationScale deviation_scale = default_deviation_scale;
  double amplitude_cap = 1e300;

  SimParams(GridSpec g, CoefficientSet c, SpaceField eta)
      : grid(g), coefficients(std::move(c)), initial(std::move(eta)) {}

  /// Structural checks: epsilon >= 0, initial condition on the grid, cap > 0.
  void validate() const;
};

struct SolveOutput {
  PathField path;
  /// First level n with ||state(t_n)||_2 >= amplitude_cap.
  std::optional<std::size_t> exceedance_level;
  std::vector<double> max_abs;             // per level
  std::vector<double> tridiagonal_residual;  // per step

  std::optional<double> exceedance_time() const {
    if (!exceedance_level) return std::nullopt;
    return path.grid().t(*exceedance_level);
  }
};

/// Coefficients of the equation linearized around a base path U^0, sampled at
/// interior nodes: g'(t_n, x_i, U^0), f'(t_n, x_i, U^0), sigma(t_n, x_i, U^0).
struct LinearizedCoefficients {
  GridSpec grid;
  std::vector<double> g_prime;  // nt x nx
  std::vector<double> f_prime;
  std::vector<double> sigma;

  LinearizedCoefficients(const CoefficientSet& c, const PathField& base);

  std::span<const double> g_prime_at(std::size_t n) const { return {g_prime.data() + n * grid.nx(), grid.nx()}; }
  std::span<const double> f_prime_at(std::size_t n) const { return {f_prime.data() + n * grid.nx(), grid.nx()}; }
  std::span<const double> sigma_at(std::size_t n) const { return {sigma.data() + n * grid.nx(), grid.nx()}; }
};

/// U^0: semi-implicit Euler for the deterministic equation.
SolveOutput solve_deterministic(const SimParams& p);

/// U^eps: as solve_deterministic plus sqrt(eps) sigma(u) sqrt(dt/dx) xi.
/// epsilon = 0 skips the noise term and reproduces solve_deterministic bitwise.
SolveOutput solve_spde(const SimParams& p, const NoiseRealization& noise);

/// V: linearized equation around `base` driven by sigma(U^0) sqrt(dt/dx) xi, V(0) = 0.
SolveOutput solve_linearized(const SimParams& p, const PathField& base, const NoiseRealization& noise);
SolveOutput solve_linearized(const LinearizedCoefficients& lin, const NoiseRealization& noise,
                             double amplitude_cap = 1e300);

/// X^h: linearized equation with forcing sigma(U^0) hdot in place of the noise.
SolveOutput solve_skeleton(const SimParams& p, const PathField& base, const Control& h);
SolveOutput solve_skeleton(const LinearizedCoefficients& lin, const Control& h, double amplitude_cap = 1e300);

/// X^{eps,v}: the rescaled fluctuation (U^eps - U^0) / (sqrt(eps) lambda(eps))
/// of the shifted noise W + lambda(eps) v, with exact difference quotients of
/// f and g. Throws ConfigError if sqrt(eps) lambda(eps) >= 1 or eps <= 0.
SolveOutput solve_controlled(const SimParams& p, const PathField& base, const NoiseRealization& noise,
                             const Control& v);

}  // namespace spdelab
