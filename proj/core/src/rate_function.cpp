#include "spdelab/rate_function.hpp"

#include <algorithm>
#include <cmath>

#include "spdelab/errors.hpp"

namespace spdelab {

SkeletonOperator::SkeletonOperator(const CoefficientSet& c, const PathField& base) : lin_(c, base) {}

PathField SkeletonOperator::forward(const Control& h) const { return solve_skeleton(lin_, h).path; }

Control SkeletonOperator::adjoint(const PathField& mu) const {
  const GridSpec& grid = lin_.grid;
  if (!(mu.grid() == grid)) throw ContractViolation("adjoint: grid mismatch");
  const std::size_t nx = grid.nx();
  const double dt = grid.dt();
  const double dx = grid.dx();
  ImplicitDiffusion diffusion(grid);

  Control out(grid);
  std::vector<double> q(mu.interior(grid.nt()).begin(), mu.interior(grid.nt()).end());
  std::vector<double> r(nx), w(nx + 2, 0.0);
  for (std::size_t m = grid.nt(); m-- > 0;) {
    diffusion.solve(q, r);
    auto sigma = lin_.sigma_at(m);
    auto level = out.level(m);
    for (std::size_t i = 0; i < nx; ++i) level[i] = dt * sigma[i] * r[i];
    if (m == 0) break;
    // q_m = mu_m + (I + dt (D B_m + F_m))^T r
    auto gp = lin_.g_prime_at(m);
    auto fp = lin_.f_prime_at(m);
    auto mu_m = mu.interior(m);
    std::copy(r.begin(), r.end(), w.begin() + 1);
    for (std::size_t i = 0; i < nx; ++i)
      q[i] = mu_m[i] + r[i] + dt * (gp[i] * (w[i] - w[i + 2]) / (2.0 * dx) + fp[i] * r[i]);
  }
  return out;
}

PathField forward_map(const Control& h, const PathField& base, const SimParams& p) {
  return SkeletonOperator(p.coefficients, base).forward(h);
}

Control adjoint_map(const PathField& mu, const PathField& base, const SimParams& p) {
  return SkeletonOperator(p.coefficients, base).adjoint(mu);
}

namespace {

double dot(const PathField& a, const PathField& b) {
  auto x = a.raw();
  auto y = b.raw();
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

PathField normal_operator(const SkeletonOperator& op, const PathField& mu, double reg) {
  PathField y = op.forward(op.adjoint(mu));
  y += reg * mu;
  return y;
}

}  // namespace

double rate_lower_bound_functional(const PathField& target, const SkeletonOperator& op, const PathField& mu) {
  const Control h = op.adjoint(mu);
  return path_inner(target, mu) - 0.5 * h_norm_sq(h, op.grid());
}

double rate_lower_bound_functional(const PathField& target, const PathField& base, const SimParams& p,
                                   const PathField& mu) {
  return rate_lower_bound_functional(target, SkeletonOperator(p.coefficients, base), mu);
}

RateCertificate evaluate_rate(const PathField& target, const SkeletonOperator& op, const RateOptions& opts) {
  const GridSpec& grid = op.grid();
  if (!(target.grid() == grid)) throw ContractViolation("evaluate_rate: grid mismatch");
  if (!(opts.regularization > 0.0)) throw ContractViolation("evaluate_rate: regularization must be positive");
  for (double v : target.raw())
    if (!std::isfinite(v)) throw ConfigError("target", "non-finite entry");

  RateCertificate cert{.minimizer = Control(grid), .multiplier = PathField(grid)};
  cert.regularization = opts.regularization;
  const auto& sig = op.coefficients().sigma;
  cert.sigma_min_abs = sig.empty() ? 0.0 : std::abs(*std::min_element(sig.begin(), sig.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  }));
  cert.sigma_degenerate = cert.sigma_min_abs < 1e-3;

  const double target_norm = std::sqrt(dot(target, target));
  if (target_norm == 0.0) return cert;

  // Conjugate gradient on the symmetric positive definite (A A* + reg).
  PathField& mu = cert.multiplier;
  PathField residual = target;
  PathField direction = residual;
  double rr = dot(residual, residual);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (std::sqrt(rr) <= opts.tolerance * target_norm) break;
    const PathField ad = normal_operator(op, direction, opts.regularization);
    const double curvature = dot(direction, ad);
    if (!(curvature > 0.0) || !std::isfinite(curvature))
      throw ConfigError("target", "conjugate gradient lost positive curvature");
    const double alpha = rr / curvature;
    mu += alpha * direction;
    residual -= alpha * ad;
    const double rr_next = dot(residual, residual);
    direction *= rr_next / rr;
    direction += residual;
    rr = rr_next;
  }
  cert.cg_iterations = it;
  cert.cg_relative_residual = std::sqrt(rr) / target_norm;
  if (cert.cg_relative_residual > opts.tolerance)
    throw ConvergenceError(cert.cg_relative_residual, it, "evaluate_rate: conjugate gradient did not converge");

  cert.minimizer = op.adjoint(mu);
  cert.value = 0.5 * h_norm_sq(cert.minimizer, grid);
  cert.residual = sup_l2_distance(op.forward(cert.minimizer), target);
  cert.dual_lower_bound = path_inner(target, mu) - cert.value;
  return cert;
}

RateCertificate evaluate_rate(const PathField& target, const PathField& base, const SimParams& p,
                              const RateOptions& opts) {
  return evaluate_rate(target, SkeletonOperator(p.coefficients, base), opts);
}

RateLadder evaluate_rate_ladder(const PathField& target, const SkeletonOperator& op, std::vector<double> regs,
                                const RateOptions& opts) {
  if (regs.empty()) throw ContractViolation("evaluate_rate_ladder: empty ladder");
  std::sort(regs.begin(), regs.end(), std::greater<>());
  RateLadder ladder;
  for (double reg : regs) {
    RateOptions o = opts;
    o.regularization = reg;
    RateCertificate cert = evaluate_rate(target, op, o);
    ladder.entries.push_back({reg, cert.value, cert.residual, cert.dual_lower_bound, cert.cg_iterations});
    ladder.finest = std::move(cert);
  }
  const auto& e = ladder.entries;
  if (e.size() >= 2) {
    const auto& a = e[e.size() - 2];
    const auto& b = e.back();
    ladder.extrapolated_value = b.value + (b.value - a.value) * b.regularization / (a.regularization - b.regularization);
    ladder.residual_stalled = e.front().residual > 1e-12 && b.residual > 0.5 * e.front().residual;
  } else {
    ladder.extrapolated_value = e.back().value;
  }
  return ladder;
}

}  // namespace spdelab
