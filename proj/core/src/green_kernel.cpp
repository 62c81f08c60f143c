#include "spdelab/green_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spdelab/errors.hpp"
#include "spdelab/statistics.hpp"

namespace spdelab {

namespace {

constexpr double kPi = std::numbers::pi;

enum class Order { Value, DX, DT };

void check_domain(double t, double x, double y) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("green kernel: t must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("green kernel: x outside [0,1]");
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("green kernel: y outside [0,1]");
}

double spectral_sum(double t, double x, double y, double tol, int min_terms, Order order) {
  const int power = order == Order::Value ? 0 : (order == Order::DX ? 1 : 2);
  double sum = 0.0;
  for (int n = 1; n < 1000000; ++n) {
    const double w = n * kPi;
    const double decay = std::exp(-w * w * t);
    switch (order) {
      case Order::Value:
        sum += 2.0 * std::sin(w * x) * std::sin(w * y) * decay;
        break;
      case Order::DX:
        sum += 2.0 * w * std::cos(w * x) * std::sin(w * y) * decay;
        break;
      case Order::DT:
        sum -= 2.0 * w * w * std::sin(w * x) * std::sin(w * y) * decay;
        break;
    }
    if (n < min_terms) continue;
    // Bound the remaining terms m > n by a geometric series.
    const double m = n + 1.0;
    const double ratio = std::exp(-(2.0 * m + 1.0) * kPi * kPi * t) * std::pow((m + 1.0) / m, power);
    if (ratio >= 1.0) continue;
    const double next = 2.0 * std::pow(m * kPi, power) * std::exp(-m * m * kPi * kPi * t);
    if (next / (1.0 - ratio) < tol) break;
  }
  return sum;
}

// phi_t(z) = (4 pi t)^{-1/2} exp(-z^2 / 4t) and its first two z-derivatives.
double heat_gaussian(double t, double z, Order order) {
  const double phi = std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
  switch (order) {
    case Order::Value: return phi;
    case Order::DX: return -z / (2.0 * t) * phi;
    case Order::DT: return (z * z / (4.0 * t * t) - 1.0 / (2.0 * t)) * phi;
  }
  return phi;
}

double image_sum(double t, double x, double y, double tol, int min_terms, Order order) {
  auto pair = [&](int k) {
    return heat_gaussian(t, x - y + 2.0 * k, order) - heat_gaussian(t, x + y + 2.0 * k, order);
  };
  double sum = pair(0);
  for (int j = 1; j < 100000; ++j) {
    sum += pair(j) + pair(-j);
    if (j < min_terms) continue;
    // Every remaining argument has |z| >= 2j.
    const double z = 2.0 * j;
    if (z * z < 8.0 * t) continue;
    double poly = 1.0;
    if (order == Order::DX) poly = (z + 2.0) / (2.0 * t);
    if (order == Order::DT) poly = (z + 2.0) * (z + 2.0) / (4.0 * t * t) + 1.0 / (2.0 * t);
    const double bound = 8.0 * poly * std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
    if (bound < tol) break;
  }
  return sum;
}

bool on_boundary(double v) { return v == 0.0 || v == 1.0; }

}  // namespace

void KernelConfig::validate(double horizon) const {
  if (series_terms < 1) throw ContractViolation("KernelConfig: series_terms must be >= 1");
  if (!(tail_tolerance > 0.0)) throw ContractViolation("KernelConfig: tail_tolerance must be positive");
  if (!(crossover_time > 0.0) || crossover_time > horizon)
    throw ContractViolation("KernelConfig: crossover_time must lie in (0, horizon]");
}

double green_spectral(double t, double x, double y, double tol, int min_terms) {
  check_domain(t, x, y);
  if (on_boundary(x) || on_boundary(y)) return 0.0;
  return spectral_sum(t, x, y, tol, min_terms, Order::Value);
}

double green_images(double t, double x, double y, double tol, int min_terms) {
  check_domain(t, x, y);
  if (on_boundary(x) || on_boundary(y)) return 0.0;
  return image_sum(t, x, y, tol, min_terms, Order::Value);
}

double green_dx_spectral(double t, double x, double y, double tol, int min_terms) {
  check_domain(t, x, y);
  if (on_boundary(y)) return 0.0;
  return spectral_sum(t, x, y, tol, min_terms, Order::DX);
}

double green_dx_images(double t, double x, double y, double tol, int min_terms) {
  check_domain(t, x, y);
  if (on_boundary(y)) return 0.0;
  return image_sum(t, x, y, tol, min_terms, Order::DX);
}

double green(double t, double x, double y, const KernelConfig& cfg) {
  return t >= cfg.crossover_time ? green_spectral(t, x, y, cfg.tail_tolerance, cfg.series_terms)
                                  : green_images(t, x, y, cfg.tail_tolerance, cfg.series_terms);
}

double green_dx(double t, double x, double y, const KernelConfig& cfg) {
  return t >= cfg.crossover_time ? green_dx_spectral(t, x, y, cfg.tail_tolerance, cfg.series_terms)
                                  : green_dx_images(t, x, y, cfg.tail_tolerance, cfg.series_terms);
}

double green_dy(double t, double x, double y, const KernelConfig& cfg) { return green_dx(t, y, x, cfg); }

double green_dt(double t, double x, double y, const KernelConfig& cfg) {
  check_domain(t, x, y);
  if (on_boundary(x) || on_boundary(y)) return 0.0;
  return t >= cfg.crossover_time ? spectral_sum(t, x, y, cfg.tail_tolerance, cfg.series_terms, Order::DT)
                                  : image_sum(t, x, y, cfg.tail_tolerance, cfg.series_terms, Order::DT);
}

double kernel_mass(double t, double x, const KernelConfig& cfg, const GridSpec& quad) {
  double s = 0.0;
  for (std::size_t j = 1; j <= quad.nx(); ++j) s += green(t, x, quad.x(j), cfg);
  return quad.dx() * s;
}

double semigroup_defect(double t, double s, const KernelConfig& cfg, const GridSpec& quad,
                        std::size_t samples) {
  if (samples < 2) throw ContractViolation("semigroup_defect: need at least 2 samples per axis");
  const std::size_t nz = quad.nx();
  std::vector<double> pts(samples);
  for (std::size_t a = 0; a < samples; ++a) pts[a] = static_cast<double>(a) / static_cast<double>(samples - 1);

  // Endpoint nodes carry zero kernel values, so the trapezoid rule reduces to
  // an interior sum.
  std::vector<double> left(samples * nz), right(samples * nz);
  for (std::size_t a = 0; a < samples; ++a) {
    for (std::size_t j = 0; j < nz; ++j) {
      left[a * nz + j] = green(t, pts[a], quad.x(j + 1), cfg);
      right[a * nz + j] = green(s, quad.x(j + 1), pts[a], cfg);
    }
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < samples; ++a) {
    for (std::size_t b = 0; b < samples; ++b) {
      double acc = 0.0;
      for (std::size_t j = 0; j < nz; ++j) acc += left[a * nz + j] * right[b * nz + j];
      acc *= quad.dx();
      worst = std::max(worst, std::abs(acc - green(t + s, pts[a], pts[b], cfg)));
    }
  }
  return worst;
}

PathField apply_J(const PathField& v, KernelKind kind, const KernelConfig& cfg) {
  const GridSpec& grid = v.grid();
  const std::size_t nx = grid.nx();
  const std::size_t nt = grid.nt();
  const double weight = grid.dx() * grid.dt();
  PathField out(grid);
  std::vector<double> kernel(nx * nx);
  for (std::size_t lag = 1; lag <= nt; ++lag) {
    const double tau = static_cast<double>(lag) * grid.dt();
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < nx; ++j) {
        const double x = grid.x(i + 1);
        const double y = grid.x(j + 1);
        double h = 0.0;
        switch (kind) {
          case KernelKind::G: h = green(tau, x, y, cfg); break;
          case KernelKind::GSquared: {
            const double g = green(tau, x, y, cfg);
            h = g * g;
            break;
          }
          case KernelKind::DyG: h = green_dy(tau, x, y, cfg); break;
        }
        kernel[i * nx + j] = h * weight;
      }
    }
    for (std::size_t n = lag; n <= nt; ++n) {
      auto src = v.interior(n - lag);
      auto dst = out.interior(n);
      for (std::size_t i = 0; i < nx; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < nx; ++j) acc += kernel[i * nx + j] * src[j];
        dst[i] += acc;
      }
    }
  }
  return out;
}

// --- audit -----------------------------------------------------------------

namespace {

struct Bump {
  double center;
  double width;
};

// Trapezoid rule on [0,1] over a uniform base grid merged with local grids
// resolving each bump over +-12 widths.
template <class F>
double integrate_space(F&& f, std::initializer_list<Bump> bumps, const AuditPlan& plan) {
  std::vector<double> nodes;
  nodes.reserve(plan.base_space_nodes + bumps.size() * plan.local_space_nodes);
  for (std::size_t k = 0; k < plan.base_space_nodes; ++k)
    nodes.push_back(static_cast<double>(k) / static_cast<double>(plan.base_space_nodes - 1));
  for (const Bump& b : bumps) {
    const double half = 12.0 * b.width;
    for (std::size_t k = 0; k < plan.local_space_nodes; ++k) {
      const double z = b.center - half + 2.0 * half * static_cast<double>(k) /
                                             static_cast<double>(plan.local_space_nodes - 1);
      if (z > 0.0 && z < 1.0) nodes.push_back(z);
    }
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  double acc = 0.0;
  double prev_z = nodes.front();
  double prev_f = f(prev_z);
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    const double fz = f(nodes[k]);
    acc += 0.5 * (nodes[k] - prev_z) * (fz + prev_f);
    prev_z = nodes[k];
    prev_f = fz;
  }
  return acc;
}

// int_0^length f(w) dw with w = length * s^grade, trapezoid in s. The s = 0
// node contributes nothing: grade is chosen so that f(w) * dw/ds -> 0.
template <class F>
double integrate_graded(F&& f, double length, double grade, std::size_t nodes) {
  double acc = 0.0;
  const double h = 1.0 / static_cast<double>(nodes);
  for (std::size_t k = 1; k <= nodes; ++k) {
    const double s = static_cast<double>(k) * h;
    const double w = length * std::pow(s, grade);
    const double jac = length * grade * std::pow(s, grade - 1.0);
    const double weight = (k == nodes) ? 0.5 * h : h;
    acc += weight * f(w) * jac;
  }
  return acc;
}

double grade_for(double p) { return std::max(2.0, 2.0 / (3.0 - p) + 1.0); }

void require_range(const std::vector<double>& ps, double lo, double hi, const char* what) {
  for (double p : ps)
    if (!(p > lo && p < hi))
      throw ContractViolation(std::string("audit plan: ") + what + " exponent " + std::to_string(p) +
                              " outside its admissible open interval");
}

struct Tracker {
  EstimateRecord& rec;
  void offer(double ratio, double t, double s, double x, double y, double p) {
    ++rec.samples;
    if (std::isnan(ratio)) ratio = std::numeric_limits<double>::infinity();
    if (ratio > rec.fitted_constant || rec.samples == 1) {
      rec.fitted_constant = std::max(rec.fitted_constant, ratio);
      rec.worst_t = t;
      rec.worst_s = s;
      rec.worst_x = x;
      rec.worst_y = y;
      rec.worst_p = p;
    }
  }
};

// lhs / rhs with the convention 0/0 = 0 (both sides underflowed).
double safe_ratio(double lhs, double rhs) {
  if (rhs == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

void finish(EstimateRecord& rec) {
  rec.pass = rec.samples > 0 && std::isfinite(rec.fitted_constant);
}

}  // namespace

double kernel_power_integral(double s, double t, double p, const std::vector<double>& xs,
                             const KernelConfig& cfg, const AuditPlan& plan) {
  double best = 0.0;
  for (double x : xs) {
    auto inner = [&](double w) {
      const double u = s + w;
      if (u <= 0.0) return 0.0;
      return integrate_space([&](double z) { return std::pow(std::abs(green(u, x, z, cfg)), p); },
                             {{x, std::sqrt(u)}}, plan);
    };
    best = std::max(best, integrate_graded(inner, t - s, grade_for(p), plan.time_nodes));
  }
  return best;
}

AuditPlan default_audit_plan() {
  AuditPlan plan;
  for (double tau = 1e-4; tau <= 1.0 + 1e-12; tau *= std::sqrt(10.0)) plan.time_gaps.push_back(tau);
  for (int k = 0; k <= 10; ++k) plan.space_points.push_back(k / 10.0);
  plan.p_values_4 = {1.75, 2.0, 2.5};
  plan.space_pairs_4 = {{0.49, 0.51}, {0.48, 0.52}, {0.46, 0.54}, {0.42, 0.58}, {0.34, 0.66}, {0.1, 0.3}};
  plan.p_values_56 = {1.5, 2.0, 2.5};
  plan.gaps_56 = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  plan.base_times_5 = {0.5};
  plan.base_times_6 = {0.0, 0.2};
  plan.sup_points_56 = {0.3, 0.5};
  plan.gammas = {2.0, 4.0, 8.0};
  plan.time_pairs_7 = {{0.5, 0.499}, {0.5, 0.49}, {0.5, 0.4}, {0.9, 0.3}, {0.3, 0.3}};
  plan.space_pairs_7 = {{0.5, 0.5}, {0.5, 0.51}, {0.5, 0.6}, {0.2, 0.7}, {0.05, 0.95}};
  return plan;
}

bool BoundAuditReport::all_pass() const {
  return !records.empty() && std::all_of(records.begin(), records.end(), [](const auto& r) { return r.pass; });
}

BoundAuditReport audit_bounds(const KernelConfig& cfg, const AuditPlan& plan) {
  cfg.validate(plan.horizon);
  require_range(plan.p_values_4, 1.5, 3.0, "estimate (4)");
  require_range(plan.p_values_56, 1.0, 3.0, "estimates (5)-(6)");
  for (double g : plan.gammas)
    if (!(g > 1.0)) throw ContractViolation("audit plan: gamma must exceed 1");
  if (!(plan.alpha_margin > 0.0)) throw ContractViolation("audit plan: alpha_margin must be positive");
  if (plan.base_space_nodes < 2 || plan.local_space_nodes < 2 || plan.time_nodes < 2)
    throw ContractViolation("audit plan: quadrature node counts must be >= 2");

  BoundAuditReport report;

  // (1)-(3): pointwise Gaussian envelopes.
  {
    EstimateRecord r1{.id = 1, .inequality = "|G_{t-s}(x,y)| <= K (t-s)^{-1/2} exp(-a (x-y)^2/(t-s))"};
    EstimateRecord r2{.id = 2, .inequality = "|d/dx G_{t-s}(x,y)| <= K (t-s)^{-3/2} exp(-b (x-y)^2/(t-s))"};
    EstimateRecord r3{.id = 3, .inequality = "|d/dt G_{t-s}(x,y)| <= K (t-s)^{-2} exp(-d (x-y)^2/(t-s))"};
    r1.parameters = {{"a", plan.gaussian_a}};
    r2.parameters = {{"b", plan.gaussian_b}};
    r3.parameters = {{"d", plan.gaussian_d}};
    Tracker k1{r1}, k2{r2}, k3{r3};
    for (double tau : plan.time_gaps) {
      if (!(tau > 0.0)) {
        ++r1.degenerate_skipped;
        ++r2.degenerate_skipped;
        ++r3.degenerate_skipped;
        continue;
      }
      for (double x : plan.space_points) {
        for (double y : plan.space_points) {
          const double d2 = (x - y) * (x - y) / tau;
          k1.offer(safe_ratio(std::abs(green(tau, x, y, cfg)), std::exp(-plan.gaussian_a * d2) / std::sqrt(tau)),
                   tau, 0.0, x, y, 0.0);
          k2.offer(safe_ratio(std::abs(green_dx(tau, x, y, cfg)), std::exp(-plan.gaussian_b * d2) / std::pow(tau, 1.5)),
                   tau, 0.0, x, y, 0.0);
          k3.offer(safe_ratio(std::abs(green_dt(tau, x, y, cfg)), std::exp(-plan.gaussian_d * d2) / (tau * tau)),
                   tau, 0.0, x, y, 0.0);
        }
      }
    }
    for (auto* r : {&r1, &r2, &r3}) {
      finish(*r);
      report.records.push_back(std::move(*r));
    }
  }

  // (4): spatial increments, sup over t attained at t = T.
  {
    EstimateRecord rec{.id = 4, .inequality = "sup_t int_0^t int_0^1 |G_u(x,z)-G_u(y,z)|^p dz du <= K |x-y|^{3-p}"};
    Tracker tr{rec};
    for (double p : plan.p_values_4) {
      std::vector<double> lx, ly;
      for (auto [x, y] : plan.space_pairs_4) {
        if (x == y) {
          ++rec.degenerate_skipped;
          continue;
        }
        auto inner = [&](double u) {
          if (u <= 0.0) return 0.0;
          const double w = std::sqrt(u);
          return integrate_space(
              [&](double z) { return std::pow(std::abs(green(u, x, z, cfg) - green(u, y, z, cfg)), p); },
              {{x, w}, {y, w}}, plan);
        };
        const double lhs = integrate_graded(inner, plan.horizon, grade_for(p), plan.time_nodes);
        const double gap = std::abs(x - y);
        tr.offer(safe_ratio(lhs, std::pow(gap, 3.0 - p)), plan.horizon, 0.0, x, y, p);
        lx.push_back(std::log(gap));
        ly.push_back(std::log(lhs));
      }
      if (lx.size() >= 2) rec.exponents.push_back({p, 3.0 - p, fit_line(lx, ly).slope});
    }
    finish(rec);
    report.records.push_back(std::move(rec));
  }

  // (5): time increments of the kernel.
  {
    EstimateRecord rec{.id = 5, .inequality = "sup_x int_0^s int_0^1 |G_{t-u}(x,z)-G_{s-u}(x,z)|^p dz du <= K |t-s|^{(3-p)/2}"};
    Tracker tr{rec};
    for (double p : plan.p_values_56) {
      for (double s : plan.base_times_5) {
        std::vector<double> lx, ly;
        for (double tau : plan.gaps_56) {
          if (!(tau > 0.0)) {
            ++rec.degenerate_skipped;
            continue;
          }
          double lhs = 0.0;
          double arg_x = 0.0;
          for (double x : plan.sup_points_56) {
            auto inner = [&](double w) {
              if (w <= 0.0) return 0.0;
              return integrate_space(
                  [&](double z) { return std::pow(std::abs(green(w + tau, x, z, cfg) - green(w, x, z, cfg)), p); },
                  {{x, std::sqrt(w)}, {x, std::sqrt(w + tau)}}, plan);
            };
            const double v = integrate_graded(inner, s, grade_for(p), plan.time_nodes);
            if (v >= lhs) {
              lhs = v;
              arg_x = x;
            }
          }
          tr.offer(safe_ratio(lhs, std::pow(tau, 0.5 * (3.0 - p))), s + tau, s, arg_x, arg_x, p);
          if (tau <= 1e-2) {
            lx.push_back(std::log(tau));
            ly.push_back(std::log(lhs));
          }
        }
        if (lx.size() >= 2) rec.exponents.push_back({p, 0.5 * (3.0 - p), fit_line(lx, ly).slope});
      }
    }
    finish(rec);
    report.records.push_back(std::move(rec));
  }

  // (6): kernel mass in L^p over short time windows.
  {
    EstimateRecord rec{.id = 6, .inequality = "sup_x int_s^t int_0^1 |G_u(x,z)|^p dz du <= K |t-s|^{(3-p)/2}"};
    Tracker tr{rec};
    for (double p : plan.p_values_56) {
      for (double s : plan.base_times_6) {
        std::vector<double> lx, ly;
        for (double tau : plan.gaps_56) {
          if (!(tau > 0.0)) {
            ++rec.degenerate_skipped;
            continue;
          }
          const double lhs = kernel_power_integral(s, s + tau, p, plan.sup_points_56, cfg, plan);
          tr.offer(safe_ratio(lhs, std::pow(tau, 0.5 * (3.0 - p))), s + tau, s, 0.0, 0.0, p);
          if (s == 0.0 && tau <= 1e-2) {
            lx.push_back(std::log(tau));
            ly.push_back(std::log(lhs));
          }
        }
        if (lx.size() >= 2) rec.exponents.push_back({p, 0.5 * (3.0 - p), fit_line(lx, ly).slope});
      }
    }
    finish(rec);
    report.records.push_back(std::move(rec));
  }

  // (7): joint space-time Hoelder bound, p = 2.
  {
    EstimateRecord rec{.id = 7, .inequality = "int_0^T int_0^1 |G_{t-u}(x,z)-G_{s-u}(y,z)|^2 dz du <= K(alpha) rho^{2 alpha}"};
    std::vector<double> per_gamma(plan.gammas.size(), 0.0);
    Tracker tr{rec};
    for (auto [t, s] : plan.time_pairs_7) {
      if (!(s < t) || !(s > 0.0) || !(t < plan.horizon + 1e-15)) {
        ++rec.degenerate_skipped;
        continue;
      }
      const double tau = t - s;
      for (auto [x, y] : plan.space_pairs_7) {
        auto overlap = [&](double w) {
          if (w <= 0.0) return 0.0;
          return integrate_space(
              [&](double z) {
                const double d = green(w + tau, x, z, cfg) - green(w, y, z, cfg);
                return d * d;
              },
              {{x, std::sqrt(w + tau)}, {y, std::sqrt(w)}}, plan);
        };
        auto tail = [&](double r) {
          if (r <= 0.0) return 0.0;
          return integrate_space(
              [&](double z) {
                const double g = green(r, x, z, cfg);
                return g * g;
              },
              {{x, std::sqrt(r)}}, plan);
        };
        const double lhs = integrate_graded(overlap, s, 3.0, plan.time_nodes) +
                           integrate_graded(tail, tau, 3.0, plan.time_nodes);
        const double rho = std::hypot(tau, x - y);
        double worst = 0.0;
        for (std::size_t g = 0; g < plan.gammas.size(); ++g) {
          const double gamma = plan.gammas[g];
          const double alpha = (gamma - 1.0) / (2.0 * gamma) - plan.alpha_margin;
          const double ratio = safe_ratio(lhs, std::pow(rho, 2.0 * alpha));
          per_gamma[g] = std::max(per_gamma[g], ratio);
          worst = std::max(worst, ratio);
        }
        tr.offer(worst, t, s, x, y, 2.0);
      }
    }
    for (std::size_t g = 0; g < plan.gammas.size(); ++g) {
      const double alpha = (plan.gammas[g] - 1.0) / (2.0 * plan.gammas[g]) - plan.alpha_margin;
      rec.parameters.push_back({"gamma=" + std::to_string(plan.gammas[g]).substr(0, 4) + " alpha", alpha});
      rec.parameters.push_back({"gamma=" + std::to_string(plan.gammas[g]).substr(0, 4) + " K", per_gamma[g]});
    }
    finish(rec);
    report.records.push_back(std::move(rec));
  }

  return report;
}

}  // namespace spdelab
