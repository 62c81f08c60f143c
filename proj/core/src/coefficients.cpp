#include "spdelab/coefficients.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "spdelab/errors.hpp"
#include "spdelab/expression.hpp"

namespace spdelab {

namespace {

double bounded_sigma(double c0, double c1, double r) { return c0 / (1.0 + r * r) + c1; }

// Lipschitz constant of c0 / (1 + r^2): max |2 c0 r / (1 + r^2)^2| at r = 1/sqrt(3).
double bounded_sigma_lipschitz(double c0) { return std::abs(c0) * 9.0 / (8.0 * std::sqrt(3.0)); }

// Odd cubic r^3 for |r| <= R, second derivative ramped linearly from 6R to 0
// on [R, 2R], linear with slope 6R^2 beyond.
struct CappedCubic {
  double R;

  double value(double r) const {
    const double a = std::abs(r);
    double v;
    if (a <= R) {
      v = a * a * a;
    } else if (a <= 2.0 * R) {
      const double s = a - R;
      v = R * R * R + 3.0 * R * R * s + 3.0 * R * s * s - s * s * s;
    } else {
      v = 6.0 * R * R * a - 6.0 * R * R * R;
    }
    return std::copysign(v, r);
  }

  double slope(double r) const {
    const double a = std::abs(r);
    if (a <= R) return 3.0 * a * a;
    if (a <= 2.0 * R) {
      const double s = a - R;
      return 3.0 * R * R + 6.0 * R * s - 3.0 * s * s;
    }
    return 6.0 * R * R;
  }
};

}  // namespace

CoefficientSet burgers(const BurgersParams& p) {
  CoefficientSet c;
  c.name = "burgers";
  c.f = [](double, double, double) { return 0.0; };
  c.f_prime = [](double, double, double) { return 0.0; };
  c.g1 = [](double, double, double) { return 0.0; };
  c.g1_prime = [](double, double, double) { return 0.0; };
  c.g2 = [](double, double r) { return 0.5 * r * r; };
  c.g2_prime = [](double, double r) { return r; };
  c.sigma = [c0 = p.c0, c1 = p.c1](double, double, double r) { return bounded_sigma(c0, c1, r); };
  // |r^2/2| <= (1/2)(1 + r^2); |p^2 - q^2|/2 <= (1/2)(|p| + |q|)|p - q|.
  c.K = 0.5;
  c.L = std::max(0.5, bounded_sigma_lipschitz(p.c0));
  c.K_prime = 1.0;
  c.sigma_bound = std::abs(p.c0) + std::abs(p.c1);
  return c;
}

CoefficientSet reaction_diffusion(const ReactionDiffusionParams& p) {
  if (!(p.r_cap > 0.0)) throw ConfigError("r_cap", "must be positive");
  const CappedCubic cubic{p.r_cap};
  const double R = p.r_cap;
  CoefficientSet c;
  c.name = "reaction_diffusion";
  c.f = [cubic](double, double, double r) { return r - cubic.value(r); };
  c.f_prime = [cubic](double, double, double r) { return 1.0 - cubic.slope(r); };
  c.g1 = [](double, double, double) { return 0.0; };
  c.g1_prime = [](double, double, double) { return 0.0; };
  c.g2 = [](double, double) { return 0.0; };
  c.g2_prime = [](double, double) { return 0.0; };
  c.sigma = [c0 = p.c0, c1 = p.c1](double, double, double r) { return bounded_sigma(c0, c1, r); };
  // The capped cubic is convex on r > 0 with slope <= 6R^2, so |f| / (1 + |r|) < 6R^2.
  c.K = 6.0 * R * R;
  // sup slope(r) / |r| is (12 - 6 sqrt 2) R, attained inside the blend; hence
  // |f(p) - f(q)| <= (1 + c max(|p|,|q|)) |p - q| <= c (1 + |p| + |q|) |p - q|.
  c.L = std::max({1.0, (12.0 - 6.0 * std::numbers::sqrt2) * R, bounded_sigma_lipschitz(p.c0)});
  c.K_prime = 6.0 * R;
  c.sigma_bound = std::abs(p.c0) + std::abs(p.c1);
  return c;
}

CoefficientSet pure_heat(double sigma) {
  CoefficientSet c;
  c.name = "heat";
  auto zero = [](double, double, double) { return 0.0; };
  auto zero2 = [](double, double) { return 0.0; };
  c.f = zero;
  c.f_prime = zero;
  c.g1 = zero;
  c.g1_prime = zero;
  c.g2 = zero2;
  c.g2_prime = zero2;
  c.sigma = [sigma](double, double, double) { return sigma; };
  c.K = 1.0;
  c.L = 1.0;
  c.K_prime = 1.0;
  c.sigma_bound = std::abs(sigma);
  return c;
}

CoefficientSet custom(const CustomSpec& spec) {
  const std::vector<std::string> txr{"t", "x", "r"};
  const std::vector<std::string> tr{"t", "r"};
  auto wrap = [](const std::string& text, const std::vector<std::string>& vars, const char* field) {
    try {
      return Expression::parse(text, vars);
    } catch (const ConfigError& e) {
      throw ConfigError(field, e.what());
    }
  };
  const Expression f = wrap(spec.f, txr, "f");
  const Expression g1 = wrap(spec.g1, txr, "g1");
  const Expression g2 = wrap(spec.g2, tr, "g2");
  const Expression sigma = wrap(spec.sigma, txr, "sigma");

  CoefficientSet c;
  c.name = "custom";
  c.f = [f](double t, double x, double r) { return f(std::array{t, x, r}); };
  c.f_prime = [f](double t, double x, double r) { return f.value_and_derivative(std::array{t, x, r}, 2).second; };
  c.g1 = [g1](double t, double x, double r) { return g1(std::array{t, x, r}); };
  c.g1_prime = [g1](double t, double x, double r) {
    return g1.value_and_derivative(std::array{t, x, r}, 2).second;
  };
  c.g2 = [g2](double t, double r) { return g2(std::array{t, r}); };
  c.g2_prime = [g2](double t, double r) { return g2.value_and_derivative(std::array{t, r}, 1).second; };
  c.sigma = [sigma](double t, double x, double r) { return sigma(std::array{t, x, r}); };
  c.K = spec.K;
  c.L = spec.L;
  c.K_prime = spec.K_prime;
  c.sigma_bound = spec.sigma_bound;
  return c;
}

CoefficientSet preset(const std::string& name) {
  if (name == "burgers") return burgers();
  if (name == "reaction_diffusion") return reaction_diffusion();
  if (name == "heat") return pure_heat();
  throw ConfigError("preset", "unknown preset '" + name + "' (expected burgers, reaction_diffusion, heat or custom)");
}

bool AssumptionReport::passes(const std::string& hypothesis) const {
  bool any = false;
  for (const auto& r : records) {
    if (r.hypothesis != hypothesis) continue;
    any = true;
    if (!r.pass) return false;
  }
  return any;
}

bool AssumptionReport::all_pass() const {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.pass; });
}

AssumptionReport check_assumptions(const CoefficientSet& c, const AssumptionPlan& plan) {
  if (plan.r_points < 2 || !(plan.r_max > plan.r_min))
    throw ContractViolation("check_assumptions: empty r window");
  std::vector<double> rs(plan.r_points);
  for (std::size_t k = 0; k < plan.r_points; ++k)
    rs[k] = plan.r_min + (plan.r_max - plan.r_min) * static_cast<double>(k) / static_cast<double>(plan.r_points - 1);

  double h1 = 0.0, h2_g1 = 0.0, h2_g2 = 0.0, sig_sup = 0.0, sig_min = INFINITY;
  double sig_lip = 0.0, f_lip = 0.0, g_lip = 0.0, fp_lip = 0.0, gp_lip = 0.0;

  for (double t : plan.t_points) {
    for (double x : plan.x_points) {
      std::vector<double> fv(rs.size()), gv(rs.size()), sv(rs.size()), fpv(rs.size()), gpv(rs.size());
      for (std::size_t k = 0; k < rs.size(); ++k) {
        const double r = rs[k];
        fv[k] = c.f(t, x, r);
        gv[k] = c.g(t, x, r);
        sv[k] = c.sigma(t, x, r);
        fpv[k] = c.f_prime(t, x, r);
        gpv[k] = c.g_prime(t, x, r);
        h1 = std::max(h1, std::abs(fv[k]) / (1.0 + std::abs(r)));
        h2_g1 = std::max(h2_g1, std::abs(c.g1(t, x, r)) / (1.0 + std::abs(r)));
        h2_g2 = std::max(h2_g2, std::abs(c.g2(t, r)) / (1.0 + r * r));
        sig_sup = std::max(sig_sup, std::abs(sv[k]));
        sig_min = std::min(sig_min, std::abs(sv[k]));
      }
      for (std::size_t a = 0; a < rs.size(); ++a) {
        for (std::size_t b = a + 1; b < rs.size(); ++b) {
          const double d = std::abs(rs[a] - rs[b]);
          const double grow = 1.0 + std::abs(rs[a]) + std::abs(rs[b]);
          sig_lip = std::max(sig_lip, std::abs(sv[a] - sv[b]) / d);
          f_lip = std::max(f_lip, std::abs(fv[a] - fv[b]) / (d * grow));
          g_lip = std::max(g_lip, std::abs(gv[a] - gv[b]) / (d * grow));
          fp_lip = std::max(fp_lip, std::abs(fpv[a] - fpv[b]) / d);
          gp_lip = std::max(gp_lip, std::abs(gpv[a] - gpv[b]) / d);
        }
      }
    }
  }

  auto rec = [](std::string hyp, std::string check, double sampled, double declared) {
    const bool ok = std::isfinite(sampled) && sampled <= declared * (1.0 + 1e-9) + 1e-9;
    return HypothesisRecord{std::move(hyp), std::move(check), sampled, declared, ok};
  };

  AssumptionReport report;
  report.r_min = plan.r_min;
  report.r_max = plan.r_max;
  report.sigma_min_abs = sig_min;
  report.records = {
      rec("H1", "|f| <= K(1+|r|)", h1, c.K),
      rec("H2", "|g1| <= K(1+|r|)", h2_g1, c.K),
      rec("H2", "|g2| <= K(1+r^2)", h2_g2, c.K),
      rec("H3", "sigma bounded", sig_sup, c.sigma_bound),
      rec("H3", "|sigma(p)-sigma(q)| <= L|p-q|", sig_lip, c.L),
      rec("H3", "|f(p)-f(q)| <= L(1+|p|+|q|)|p-q|", f_lip, c.L),
      rec("H3", "|g(p)-g(q)| <= L(1+|p|+|q|)|p-q|", g_lip, c.L),
      rec("H4", "|f'(p)-f'(q)| <= K'|p-q|", fp_lip, c.K_prime),
      rec("H4", "|g'(p)-g'(q)| <= K'|p-q|", gp_lip, c.K_prime),
  };
  return report;
}

}  // namespace spdelab
