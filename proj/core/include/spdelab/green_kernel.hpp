#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spdelab/grid.hpp"

namespace spdelab {

/// Truncation and branch selection for the Dirichlet heat kernel on [0,1].
///
/// Below `crossover_time` the method-of-images sum is used, at or above it the
/// sine series. Both series are summed adaptively until the remaining tail is
/// bounded by `tail_tolerance`; `series_terms` is a floor on the number of
/// modes (spectral) or image pairs (images) that are always summed.
struct KernelConfig {
  int series_terms = 1;
  double crossover_time = 0.05;
  double tail_tolerance = 1e-12;

  /// Throws ContractViolation unless series_terms >= 1, tail_tolerance > 0 and
  /// crossover_time lies in (0, horizon].
  void validate(double horizon) const;
};

// Both representations, exposed for cross-checking.
double green_spectral(double t, double x, double y, double tol, int min_terms = 1);
double green_images(double t, double x, double y, double tol, int min_terms = 1);
double green_dx_spectral(double t, double x, double y, double tol, int min_terms = 1);
double green_dx_images(double t, double x, double y, double tol, int min_terms = 1);

/// G_t(x,y). Throws DomainError for t <= 0 or x, y outside [0,1].
double green(double t, double x, double y, const KernelConfig& cfg = {});
/// d/dx G_t(x,y).
double green_dx(double t, double x, double y, const KernelConfig& cfg = {});
/// d/dy G_t(x,y), obtained from green_dx through the symmetry G_t(x,y) = G_t(y,x).
double green_dy(double t, double x, double y, const KernelConfig& cfg = {});
/// d/dt G_t(x,y) (equal to the second x-derivative).
double green_dt(double t, double x, double y, const KernelConfig& cfg = {});

/// Trapezoid approximation of the integral of G_t(x,.) over [0,1] on the
/// nodes of `quad`.
double kernel_mass(double t, double x, const KernelConfig& cfg, const GridSpec& quad);

/// max over a (samples x samples) lattice of (x,y) in [0,1]^2 of
/// |int_0^1 G_t(x,z) G_s(z,y) dz - G_{t+s}(x,y)|, trapezoid rule on `quad`.
double semigroup_defect(double t, double s, const KernelConfig& cfg, const GridSpec& quad,
                        std::size_t samples = 17);

enum class KernelKind { G, GSquared, DyG };

/// J(v)(t_n, x_i) = sum_{m<n} sum_j H(t_n - t_m; x_i, y_j) v(t_m, y_j) dx dt.
PathField apply_J(const PathField& v, KernelKind kind, const KernelConfig& cfg = {});

// --- Audit of the seven kernel estimates ---------------------------------

struct AuditPlan {
  double horizon = 1.0;

  // Estimates (1)-(3): pointwise, over tau = t - s and an (x,y) lattice.
  std::vector<double> time_gaps;
  std::vector<double> space_points;
  double gaussian_a = 0.125;
  double gaussian_b = 0.125;
  double gaussian_d = 0.125;

  // Estimate (4): exponents p in (3/2, 3) and (x,y) pairs.
  std::vector<double> p_values_4;
  std::vector<std::pair<double, double>> space_pairs_4;

  // Estimates (5) and (6): exponents p in (1, 3), gaps t - s, base times s,
  // points x (the sup over x is taken over this set).
  std::vector<double> p_values_56;
  std::vector<double> gaps_56;
  std::vector<double> base_times_5;
  std::vector<double> base_times_6;
  std::vector<double> sup_points_56;

  // Estimate (7): gamma > 1, alpha = (gamma - 1)/(2 gamma) - alpha_margin,
  // over (t, s, x, y) tuples.
  std::vector<double> gammas;
  double alpha_margin = 0.02;
  std::vector<std::pair<double, double>> time_pairs_7;
  std::vector<std::pair<double, double>> space_pairs_7;

  // Quadrature resolution.
  std::size_t time_nodes = 240;
  std::size_t base_space_nodes = 257;
  std::size_t local_space_nodes = 97;
};

AuditPlan default_audit_plan();

struct ExponentCheck {
  double p = 0.0;
  double predicted = 0.0;
  double observed = 0.0;
};

struct EstimateRecord {
  int id = 0;
  std::string inequality;
  std::size_t samples = 0;
  std::size_t degenerate_skipped = 0;
  double fitted_constant = 0.0;
  // Sample attaining the fitted constant (t, s, x, y, p); unused slots are 0.
  double worst_t = 0.0;
  double worst_s = 0.0;
  double worst_x = 0.0;
  double worst_y = 0.0;
  double worst_p = 0.0;
  std::vector<ExponentCheck> exponents;
  std::vector<std::pair<std::string, double>> parameters;
  bool pass = false;
};

struct BoundAuditReport {
  std::vector<EstimateRecord> records;
  bool all_pass() const;
};

/// Fits, for each inequality, the smallest constant making it hold on every
/// sample. Throws ContractViolation if a plan exponent is outside its range.
BoundAuditReport audit_bounds(const KernelConfig& cfg, const AuditPlan& plan);

/// sup over x of int_s^t int_0^1 |G_u(x,z)|^p dz du, as used by estimate (6).
double kernel_power_integral(double s, double t, double p, const std::vector<double>& xs,
                             const KernelConfig& cfg, const AuditPlan& plan);

}  // namespace spdelab
