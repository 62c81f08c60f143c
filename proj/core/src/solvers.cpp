#include "spdelab/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdelab/errors.hpp"

namespace spdelab {

ImplicitDiffusion::ImplicitDiffusion(const GridSpec& grid)
    : off_(-grid.dt() / (grid.dx() * grid.dx())),
      diag_(1.0 + 2.0 * grid.dt() / (grid.dx() * grid.dx())),
      upper_(grid.nx()),
      inv_pivot_(grid.nx()) {
  double prev = 0.0;
  for (std::size_t i = 0; i < grid.nx(); ++i) {
    const double pivot = diag_ - off_ * prev;
    inv_pivot_[i] = 1.0 / pivot;
    prev = off_ * inv_pivot_[i];
    upper_[i] = prev;
  }
}

void ImplicitDiffusion::solve(std::span<const double> rhs, std::span<double> x) const {
  const std::size_t n = upper_.size();
  double carry = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    carry = (rhs[i] - off_ * carry) * inv_pivot_[i];
    x[i] = carry;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= upper_[i] * x[i + 1];
}

double ImplicitDiffusion::residual(std::span<const double> x, std::span<const double> rhs) const {
  const std::size_t n = x.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ax = diag_ * x[i];
    if (i > 0) ax += off_ * x[i - 1];
    if (i + 1 < n) ax += off_ * x[i + 1];
    worst = std::max(worst, std::abs(ax - rhs[i]));
  }
  return worst;
}

double default_deviation_scale(double epsilon) { return std::pow(epsilon, -0.25); }

void check_moderate_regime(const DeviationScale& scale, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon", "moderate regime needs epsilon > 0");
  const double lambda = scale(epsilon);
  if (!(lambda > 1.0))
    throw ConfigError("deviation_scale", "lambda(" + std::to_string(epsilon) + ") = " + std::to_string(lambda) +
                                             " is not > 1");
  if (!(std::sqrt(epsilon) * lambda < 1.0))
    throw ConfigError("deviation_scale",
                      "sqrt(eps) lambda(eps) = " + std::to_string(std::sqrt(epsilon) * lambda) + " is not < 1");
}

void SimParams::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ContractViolation("SimParams: epsilon must be >= 0");
  if (initial.nx() != grid.nx()) throw ContractViolation("SimParams: initial condition does not match grid");
  if (!(amplitude_cap > 0.0)) throw ContractViolation("SimParams: amplitude_cap must be positive");
}

LinearizedCoefficients::LinearizedCoefficients(const CoefficientSet& c, const PathField& base)
    : grid(base.grid()),
      g_prime(base.grid().nt() * base.grid().nx()),
      f_prime(g_prime.size()),
      sigma(g_prime.size()) {
  const std::size_t nx = grid.nx();
  for (std::size_t n = 0; n < grid.nt(); ++n) {
    const double t = grid.t(n);
    auto u = base.interior(n);
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = grid.x(i + 1);
      g_prime[n * nx + i] = c.g_prime(t, x, u[i]);
      f_prime[n * nx + i] = c.f_prime(t, x, u[i]);
      sigma[n * nx + i] = c.sigma(t, x, u[i]);
    }
  }
}

namespace {

void require_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ContractViolation(std::string(what) + ": grid mismatch");
}

// Shared bookkeeping: output path, diagnostics, blow-up and exceedance checks.
class Recorder {
 public:
  Recorder(const GridSpec& grid, double cap) : out_{PathField(grid), std::nullopt, {}, {}}, cap_(cap) {
    out_.max_abs.reserve(grid.nt() + 1);
    out_.tridiagonal_residual.reserve(grid.nt());
  }

  PathField& path() { return out_.path; }

  void level_done(std::size_t n) {
    auto u = out_.path.interior(n);
    double m = 0.0;
    for (double v : u) {
      if (!std::isfinite(v)) throw BlowUpError(n, "non-finite state");
      m = std::max(m, std::abs(v));
    }
    out_.max_abs.push_back(m);
    if (!out_.exceedance_level && l2_norm(u, out_.path.grid()) >= cap_) out_.exceedance_level = n;
  }

  void residual(double r) { out_.tridiagonal_residual.push_back(r); }

  SolveOutput finish() { return std::move(out_); }

 private:
  SolveOutput out_;
  double cap_;
};

// Semi-implicit Euler for U^eps (eps = 0 gives U^0).
SolveOutput run_nonlinear(const SimParams& p, const NoiseRealization* noise, double eps) {
  p.validate();
  const GridSpec& grid = p.grid;
  const CoefficientSet& c = p.coefficients;
  const std::size_t nx = grid.nx();
  const double dt = grid.dt();
  const double dx = grid.dx();
  const double noise_scale = std::sqrt(eps) * std::sqrt(dt / dx);
  const bool noisy = noise != nullptr && eps > 0.0;

  ImplicitDiffusion diffusion(grid);
  Recorder rec(grid, p.amplitude_cap);
  rec.path().set_frame(0, p.initial);
  rec.level_done(0);

  std::vector<double> flux(nx + 2), rhs(nx);
  for (std::size_t n = 0; n < grid.nt(); ++n) {
    const double t = grid.t(n);
    auto u = rec.path().frame(n);
    for (std::size_t k = 0; k < nx + 2; ++k) flux[k] = c.g(t, grid.x(k), u[k]);
    for (std::size_t i = 1; i <= nx; ++i) {
      const double drift = (flux[i + 1] - flux[i - 1]) / (2.0 * dx) + c.f(t, grid.x(i), u[i]);
      rhs[i - 1] = u[i] + dt * drift;
    }
    if (noisy) {
      auto xi = noise->level(n);
      for (std::size_t i = 1; i <= nx; ++i) rhs[i - 1] += noise_scale * c.sigma(t, grid.x(i), u[i]) * xi[i - 1];
    }
    auto next = rec.path().interior(n + 1);
    diffusion.solve(rhs, next);
    rec.residual(diffusion.residual(next, rhs));
    rec.level_done(n + 1);
  }
  return rec.finish();
}

// Linear stepper X^{n+1} = R [X^n + dt (D(g' X^n) + f' X^n) + forcing_n],
// shared by V and X^h. `forcing(n, sigma_n, rhs)` adds the source term.
template <class Forcing>
SolveOutput run_linear(const LinearizedCoefficients& lin, double cap, Forcing&& forcing) {
  const GridSpec& grid = lin.grid;
  const std::size_t nx = grid.nx();
  const double dt = grid.dt();
  const double dx = grid.dx();
  ImplicitDiffusion diffusion(grid);
  Recorder rec(grid, cap);
  rec.level_done(0);

  std::vector<double> w(nx + 2, 0.0), rhs(nx);
  for (std::size_t n = 0; n < grid.nt(); ++n) {
    auto x = rec.path().interior(n);
    auto gp = lin.g_prime_at(n);
    auto fp = lin.f_prime_at(n);
    for (std::size_t i = 0; i < nx; ++i) w[i + 1] = gp[i] * x[i];
    for (std::size_t i = 0; i < nx; ++i) rhs[i] = x[i] + dt * ((w[i + 2] - w[i]) / (2.0 * dx) + fp[i] * x[i]);
    forcing(n, lin.sigma_at(n), std::span<double>(rhs));
    auto next = rec.path().interior(n + 1);
    diffusion.solve(rhs, next);
    rec.residual(diffusion.residual(next, rhs));
    rec.level_done(n + 1);
  }
  return rec.finish();
}

}  // namespace

SolveOutput solve_deterministic(const SimParams& p) { return run_nonlinear(p, nullptr, 0.0); }

SolveOutput solve_spde(const SimParams& p, const NoiseRealization& noise) {
  require_grid(p.grid, noise.grid(), "solve_spde");
  return run_nonlinear(p, &noise, p.epsilon);
}

SolveOutput solve_linearized(const LinearizedCoefficients& lin, const NoiseRealization& noise, double cap) {
  require_grid(lin.grid, noise.grid(), "solve_linearized");
  const double scale = std::sqrt(lin.grid.dt() / lin.grid.dx());
  return run_linear(lin, cap, [&](std::size_t n, std::span<const double> sigma, std::span<double> rhs) {
    auto xi = noise.level(n);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += sigma[i] * scale * xi[i];
  });
}

SolveOutput solve_linearized(const SimParams& p, const PathField& base, const NoiseRealization& noise) {
  p.validate();
  require_grid(p.grid, base.grid(), "solve_linearized");
  return solve_linearized(LinearizedCoefficients(p.coefficients, base), noise, p.amplitude_cap);
}

SolveOutput solve_skeleton(const LinearizedCoefficients& lin, const Control& h, double cap) {
  require_grid(lin.grid, h.grid(), "solve_skeleton");
  const double dt = lin.grid.dt();
  return run_linear(lin, cap, [&](std::size_t n, std::span<const double> sigma, std::span<double> rhs) {
    auto hd = h.level(n);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += dt * sigma[i] * hd[i];
  });
}

SolveOutput solve_skeleton(const SimParams& p, const PathField& base, const Control& h) {
  p.validate();
  require_grid(p.grid, base.grid(), "solve_skeleton");
  return solve_skeleton(LinearizedCoefficients(p.coefficients, base), h, p.amplitude_cap);
}

SolveOutput solve_controlled(const SimParams& p, const PathField& base, const NoiseRealization& noise,
                             const Control& v) {
  p.validate();
  require_grid(p.grid, base.grid(), "solve_controlled");
  require_grid(p.grid, noise.grid(), "solve_controlled");
  require_grid(p.grid, v.grid(), "solve_controlled");
  check_moderate_regime(p.deviation_scale, p.epsilon);
  const double lambda = p.deviation_scale(p.epsilon);
  const double theta = std::sqrt(p.epsilon) * lambda;

  const GridSpec& grid = p.grid;
  const CoefficientSet& c = p.coefficients;
  const std::size_t nx = grid.nx();
  const double dt = grid.dt();
  const double dx = grid.dx();
  const double noise_scale = std::sqrt(dt / dx) / lambda;

  ImplicitDiffusion diffusion(grid);
  Recorder rec(grid, p.amplitude_cap);
  rec.level_done(0);

  std::vector<double> dflux(nx + 2, 0.0), shifted(nx + 2, 0.0), rhs(nx);
  for (std::size_t n = 0; n < grid.nt(); ++n) {
    const double t = grid.t(n);
    auto x = rec.path().frame(n);
    auto u0 = base.frame(n);
    for (std::size_t k = 0; k < nx + 2; ++k) {
      shifted[k] = u0[k] + theta * x[k];
      dflux[k] = c.g(t, grid.x(k), shifted[k]) - c.g(t, grid.x(k), u0[k]);
    }
    auto xi = noise.level(n);
    auto vd = v.level(n);
    for (std::size_t i = 1; i <= nx; ++i) {
      const double xv = grid.x(i);
      const double df = c.f(t, xv, shifted[i]) - c.f(t, xv, u0[i]);
      const double drift = (dflux[i + 1] - dflux[i - 1]) / (2.0 * dx * theta) + df / theta;
      const double sig = c.sigma(t, xv, shifted[i]);
      rhs[i - 1] = x[i] + dt * drift + noise_scale * sig * xi[i - 1] + dt * sig * vd[i - 1];
    }
    auto next = rec.path().interior(n + 1);
    diffusion.solve(rhs, next);
    rec.residual(diffusion.residual(next, rhs));
    rec.level_done(n + 1);
  }
  return rec.finish();
}

}  // namespace spdelab
