#pragma once

#include <functional>
#include <string>
#include <vector>

namespace spdelab {

using FieldFn = std::function<double(double t, double x, double r)>;
using SpaceFreeFn = std::function<double(double t, double r)>;

/// Coefficients (f, g = g1 + g2, sigma) of the semilinear equation together
/// with r-derivatives of f and g and the declared hypothesis constants.
///
/// Every callable must be pure. g2 takes no x argument, so the structural part
/// of the g decomposition holds by construction.
struct CoefficientSet {
  std::string name;
  FieldFn f;
  FieldFn g1;
  SpaceFreeFn g2;
  FieldFn sigma;
  FieldFn f_prime;
  FieldFn g1_prime;
  SpaceFreeFn g2_prime;

  double K = 1.0;            // growth (H1), (H2)
  double L = 1.0;            // Lipschitz (H3)
  double K_prime = 1.0;      // derivative Lipschitz (H4)
  double sigma_bound = 1.0;  // sup |sigma| (H3)

  double g(double t, double x, double r) const { return g1(t, x, r) + g2(t, r); }
  double g_prime(double t, double x, double r) const { return g1_prime(t, x, r) + g2_prime(t, r); }
};

struct BurgersParams {
  double c0 = 0.5;
  double c1 = 0.5;
};

struct ReactionDiffusionParams {
  double c0 = 0.5;
  double c1 = 0.5;
  double r_cap = 20.0;
};

/// Expressions in (t, x, r); g2 only in (t, r). Constants are declared by the
/// user and audited, never inferred.
struct CustomSpec {
  std::string f = "0";
  std::string g1 = "0";
  std::string g2 = "0";
  std::string sigma = "1";
  double K = 1.0;
  double L = 1.0;
  double K_prime = 1.0;
  double sigma_bound = 1.0;
};

/// sigma(r) = c0 / (1 + r^2) + c1, g2 = r^2 / 2, f = g1 = 0.
CoefficientSet burgers(const BurgersParams& p = {});
/// f = r - r^3 inside |r| <= r_cap, continued with a C^2 blend to linear growth
/// on [r_cap, 2 r_cap] and linear beyond; g = 0.
CoefficientSet reaction_diffusion(const ReactionDiffusionParams& p = {});
/// f = g = 0, sigma = constant. Used for kernel cross-checks and refinement studies.
CoefficientSet pure_heat(double sigma = 1.0);
CoefficientSet custom(const CustomSpec& spec);

/// Named presets: "burgers", "reaction_diffusion", "heat". Throws ConfigError
/// (field "preset") for anything else; "custom" must go through custom().
CoefficientSet preset(const std::string& name);

struct AssumptionPlan {
  std::vector<double> t_points{0.0, 0.5, 1.0};
  std::vector<double> x_points{0.0, 0.25, 0.5, 0.75, 1.0};
  double r_min = -10.0;
  double r_max = 10.0;
  std::size_t r_points = 161;
};

struct HypothesisRecord {
  std::string hypothesis;  // "H1" .. "H4"
  std::string check;
  double sampled_max = 0.0;
  double declared = 0.0;
  bool pass = false;
};

struct AssumptionReport {
  std::vector<HypothesisRecord> records;
  double r_min = 0.0;
  double r_max = 0.0;
  double sigma_min_abs = 0.0;  // smallest sampled |sigma|

  bool passes(const std::string& hypothesis) const;
  bool all_pass() const;
};

/// Sample-based audit of (H1)-(H4) on the window of `plan`. Failures are
/// recorded, not thrown.
AssumptionReport check_assumptions(const CoefficientSet& c, const AssumptionPlan& plan = {});

}  // namespace spdelab
