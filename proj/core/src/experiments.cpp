#include "spdelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spdelab/errors.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/parallel.hpp"

namespace spdelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// sup_n || (a_n - b_n) / scale - c_n ||_2 without materializing the difference.
double sup_scaled_gap(const PathField& a, const PathField& b, double scale, const PathField& c) {
  const GridSpec& g = a.grid();
  double best = 0.0;
  for (std::size_t n = 0; n < a.frames(); ++n) {
    auto ua = a.interior(n);
    auto ub = b.interior(n);
    auto uc = c.interior(n);
    double s = 0.0;
    for (std::size_t i = 0; i < ua.size(); ++i) {
      const double d = (ua[i] - ub[i]) / scale - uc[i];
      s += d * d;
    }
    best = std::max(best, std::sqrt(g.dx() * s));
  }
  return best;
}

LadderPoint summarize_point(double eps, const std::vector<double>& values, const std::vector<char>& exceeded) {
  std::vector<double> kept;
  std::size_t n_exceeded = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (exceeded[k]) ++n_exceeded;
    else kept.push_back(values[k]);
  }
  const double frac = static_cast<double>(n_exceeded) / static_cast<double>(values.size());
  if (kept.empty())
    throw StudyError("every path reached the amplitude cap at epsilon = " + std::to_string(eps) +
                     " (raise the cap or lower epsilon)");
  const SampleSummary s = summarize(kept);
  return {eps, s.mean, s.std_error, kept.size(), frac};
}

StudyRow row(double eps, double lambda, std::string stat, double value, double se, std::size_t paths, double exc) {
  const Interval ci = normal_interval(value, se);
  return {eps, lambda, std::move(stat), value, se, ci.low, ci.high, paths, exc};
}

void add_regression(StudyResult& r) {
  std::vector<double> lx, ly;
  for (const auto& p : r.ladder) {
    if (!(p.estimate > 0.0)) {
      r.degenerate = true;
      r.warnings.push_back("estimate is zero at some ladder point; slope undefined");
      return;
    }
    lx.push_back(std::log(p.epsilon));
    ly.push_back(std::log(p.estimate));
  }
  if (lx.size() < 2) return;
  r.regression = fit_line(lx, ly);
  const LineFit& f = *r.regression;
  r.rows.push_back({kNaN, kNaN, "slope", f.slope, f.slope_std_error, f.slope_ci_low, f.slope_ci_high, 0, 0.0});
  r.rows.push_back({kNaN, kNaN, "intercept", f.intercept, 0.0, f.intercept, f.intercept, 0, 0.0});
  r.rows.push_back({kNaN, kNaN, "r_squared", f.r_squared, 0.0, f.r_squared, f.r_squared, 0, 0.0});
}

SimParams base_params(const StudyConfig& cfg) {
  SimParams p(cfg.grid, cfg.coefficients, cfg.initial_condition());
  p.deviation_scale = cfg.deviation_scale;
  p.amplitude_cap = cfg.amplitude_cap;
  return p;
}

}  // namespace

SpaceField StudyConfig::initial_condition() const {
  if (initial_profile) return SpaceField(grid, initial_profile);
  return SpaceField(grid, [](double x) { return std::sin(std::numbers::pi * x); });
}

void StudyConfig::validate() const {
  if (epsilon_ladder.empty()) throw ConfigError("epsilon_ladder", "must not be empty");
  for (std::size_t k = 0; k < epsilon_ladder.size(); ++k) {
    if (!(epsilon_ladder[k] > 0.0)) throw ConfigError("epsilon_ladder", "entries must be positive");
    if (k > 0 && !(epsilon_ladder[k] < epsilon_ladder[k - 1]))
      throw ConfigError("epsilon_ladder", "must be strictly decreasing");
    if (require_moderate_regime) check_moderate_regime(deviation_scale, epsilon_ladder[k]);
  }
  if (paths == 0) throw ConfigError("paths", "must be positive");
  if (!(event_threshold > 0.0)) throw ConfigError("delta", "must be positive");
  if (!(amplitude_cap > 0.0)) throw ConfigError("amplitude_cap", "must be positive");
}

StudyResult contraction_study(const StudyConfig& cfg) {
  cfg.validate();
  const SimParams p0 = base_params(cfg);
  const PathField u0 = solve_deterministic(p0).path;
  const std::size_t ne = cfg.epsilon_ladder.size();

  std::vector<std::vector<double>> sup_sq(ne, std::vector<double>(cfg.paths));
  std::vector<std::vector<char>> exceeded(ne, std::vector<char>(cfg.paths));
  parallel_for(cfg.paths, cfg.threads, [&](std::size_t k) {
    const NoiseRealization noise = sample_sheet({cfg.master_seed, k}, cfg.grid);
    SimParams p = p0;
    for (std::size_t e = 0; e < ne; ++e) {
      p.epsilon = cfg.epsilon_ladder[e];
      const SolveOutput out = solve_spde(p, noise);
      const double d = sup_l2_distance(out.path, u0);
      sup_sq[e][k] = d * d;
      exceeded[e][k] = out.exceedance_level.has_value();
    }
  });

  StudyResult r;
  r.study = "contraction";
  for (std::size_t e = 0; e < ne; ++e) {
    const double eps = cfg.epsilon_ladder[e];
    const double lambda = cfg.deviation_scale(eps);
    const LadderPoint pt = summarize_point(eps, sup_sq[e], exceeded[e]);
    const SampleSummary all = summarize(sup_sq[e]);
    r.ladder.push_back(pt);
    r.rows.push_back(row(eps, lambda, "mean_sup_sq", pt.estimate, pt.std_error, pt.paths_used, pt.exceedance_fraction));
    r.rows.push_back(
        row(eps, lambda, "mean_sup_sq_unfiltered", all.mean, all.std_error, cfg.paths, pt.exceedance_fraction));
  }
  add_regression(r);
  return r;
}

StudyResult clt_study(const StudyConfig& cfg) {
  cfg.validate();
  const SimParams p0 = base_params(cfg);
  const PathField u0 = solve_deterministic(p0).path;
  const LinearizedCoefficients lin(cfg.coefficients, u0);
  const std::size_t ne = cfg.epsilon_ladder.size();

  std::vector<std::vector<double>> coupled(ne, std::vector<double>(cfg.paths));
  std::vector<std::vector<double>> uncoupled(ne, std::vector<double>(cfg.paths));
  std::vector<std::vector<char>> exceeded(ne, std::vector<char>(cfg.paths));
  parallel_for(cfg.paths, cfg.threads, [&](std::size_t k) {
    const NoiseRealization noise = sample_sheet({cfg.master_seed, k}, cfg.grid);
    const NoiseRealization other = sample_sheet({cfg.master_seed, k + kIndependentStream}, cfg.grid);
    const PathField v = solve_linearized(lin, noise).path;
    const PathField v_other = solve_linearized(lin, other).path;
    SimParams p = p0;
    for (std::size_t e = 0; e < ne; ++e) {
      p.epsilon = cfg.epsilon_ladder[e];
      const SolveOutput out = solve_spde(p, noise);
      const double scale = std::sqrt(p.epsilon);
      coupled[e][k] = sup_scaled_gap(out.path, u0, scale, v);
      uncoupled[e][k] = sup_scaled_gap(out.path, u0, scale, v_other);
      exceeded[e][k] = out.exceedance_level.has_value();
    }
  });

  StudyResult r;
  r.study = "clt";
  for (std::size_t e = 0; e < ne; ++e) {
    const double eps = cfg.epsilon_ladder[e];
    const double lambda = cfg.deviation_scale(eps);
    const LadderPoint pt = summarize_point(eps, coupled[e], exceeded[e]);
    const LadderPoint un = summarize_point(eps, uncoupled[e], exceeded[e]);
    r.ladder.push_back(pt);
    r.rows.push_back(
        row(eps, lambda, "coupled_mean_sup_gap", pt.estimate, pt.std_error, pt.paths_used, pt.exceedance_fraction));
    r.rows.push_back(
        row(eps, lambda, "uncoupled_mean_sup_gap", un.estimate, un.std_error, un.paths_used, un.exceedance_fraction));
  }
  add_regression(r);
  return r;
}

MdpResult mdp_tail_study(const StudyConfig& cfg, const MdpOptions& opts) {
  cfg.validate();
  for (double eps : cfg.epsilon_ladder) check_moderate_regime(cfg.deviation_scale, eps);
  const GridSpec& grid = cfg.grid;
  const SimParams p0 = base_params(cfg);
  const PathField u0 = solve_deterministic(p0).path;
  const SkeletonOperator op(cfg.coefficients, u0);
  const double delta = cfg.event_threshold;

  MdpResult result;
  result.study.study = "mdp";

  // Reference value: a feasible control whose skeleton path just reaches the
  // event boundary gives an upper bound on the infimum of I over the event.
  PathField candidate(grid);
  if (opts.candidate) {
    candidate = *opts.candidate;
  } else {
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    const SpaceField shape(grid, [](double x) { return std::sin(std::numbers::pi * x); });
    const double norm = l2_norm(shape, grid);
    for (std::size_t n = 0; n < candidate.frames(); ++n) {
      auto dst = candidate.interior(n);
      auto src = shape.interior();
      const double w = delta * std::sinh(pi2 * grid.t(n)) / std::sinh(pi2 * grid.horizon()) / norm;
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = w * src[i];
    }
  }
  const RateCertificate cert = evaluate_rate(candidate, op, opts.rate_options);
  Control reference = cert.minimizer;
  const double reach = sup_l2_norm(op.forward(reference), grid);
  if (!(reach > 0.0)) throw StudyError("mdp: candidate path yields a zero skeleton response");
  reference *= delta / reach;
  result.reference_rate = 0.5 * h_norm_sq(reference, grid);
  result.reference_residual = cert.residual;
  result.control_energy = h_norm_sq(reference, grid);

  const Control& v = opts.is_control ? *opts.is_control : reference;
  if (!(v.grid() == grid)) throw ContractViolation("mdp: control grid mismatch");
  const double v_energy = h_norm_sq(v, grid);
  const Control zero(grid);
  const std::size_t ne = cfg.epsilon_ladder.size();

  // Per-epsilon shift scale. The noise alone already carries the state a
  // distance rho from U^0, so the shift only has to supply the remainder.
  std::vector<double> scale(ne, 1.0);
  if (opts.importance_sampling && !opts.is_control && opts.pilot_paths > 0) {
    std::vector<std::vector<double>> floor_sq(ne, std::vector<double>(opts.pilot_paths));
    parallel_for(opts.pilot_paths, cfg.threads, [&](std::size_t k) {
      const NoiseRealization noise = sample_sheet({cfg.master_seed, kPilotStream + k}, grid);
      SimParams p = p0;
      for (std::size_t e = 0; e < ne; ++e) {
        p.epsilon = cfg.epsilon_ladder[e];
        const double nrm = sup_l2_norm(solve_controlled(p, u0, noise, zero).path, grid);
        floor_sq[e][k] = nrm * nrm;
      }
    });
    for (std::size_t e = 0; e < ne; ++e) {
      const double rho_sq = summarize(floor_sq[e]).mean;
      scale[e] = std::sqrt(std::max(0.0, delta * delta - rho_sq)) / delta;
    }
  }
  for (std::size_t e = 0; e < ne; ++e)
    if (!(std::sqrt(scale[e] * scale[e] * v_energy) <= opts.control_radius))
      throw ContractViolation("mdp: importance-sampling control lies outside S_N");

  std::vector<std::vector<double>> naive_hit(ne, std::vector<double>(cfg.paths));
  std::vector<std::vector<double>> is_term(ne, std::vector<double>(cfg.paths));
  std::vector<std::vector<double>> is_weight(ne, std::vector<double>(cfg.paths));
  const double cell = std::sqrt(grid.dt() * grid.dx());

  parallel_for(cfg.paths, cfg.threads, [&](std::size_t k) {
    const NoiseRealization noise = sample_sheet({cfg.master_seed, k}, grid);
    double v_dot_dw = 0.0;
    {
      auto vr = v.raw();
      auto xr = noise.raw();
      for (std::size_t c = 0; c < vr.size(); ++c) v_dot_dw += vr[c] * cell * xr[c];
    }
    SimParams p = p0;
    for (std::size_t e = 0; e < ne; ++e) {
      p.epsilon = cfg.epsilon_ladder[e];
      const double lambda = cfg.deviation_scale(p.epsilon);
      const SolveOutput plain = solve_controlled(p, u0, noise, zero);
      naive_hit[e][k] = sup_l2_norm(plain.path, grid) >= delta ? 1.0 : 0.0;
      if (opts.importance_sampling) {
        const Control shift = scale[e] == 1.0 ? v : scale[e] * v;
        const SolveOutput shifted = solve_controlled(p, u0, noise, shift);
        const double a = lambda * scale[e];
        const double w = std::exp(-a * v_dot_dw - 0.5 * a * a * v_energy);
        is_weight[e][k] = w;
        is_term[e][k] = sup_l2_norm(shifted.path, grid) >= delta ? w : 0.0;
      }
    }
  });

  StudyResult& r = result.study;
  std::vector<double> lam_sq, neg_log;
  for (std::size_t e = 0; e < ne; ++e) {
    const double eps = cfg.epsilon_ladder[e];
    const double lambda = cfg.deviation_scale(eps);
    MdpLadderPoint pt;
    pt.epsilon = eps;
    pt.lambda = lambda;
    pt.shift_scale = scale[e];
    pt.control_energy = scale[e] * scale[e] * v_energy;
    pt.hits = static_cast<std::size_t>(pairwise_sum(naive_hit[e]));
    pt.naive_estimate = static_cast<double>(pt.hits) / static_cast<double>(cfg.paths);
    pt.naive_ci = binomial_interval(pt.hits, cfg.paths);
    pt.naive_speed_normalized =
        pt.hits > 0 ? -std::log(pt.naive_estimate) / (lambda * lambda) : std::numeric_limits<double>::infinity();
    const SampleSummary ns = summarize(naive_hit[e]);
    r.rows.push_back({eps, lambda, "naive_probability", pt.naive_estimate, ns.std_error, pt.naive_ci.low,
                      pt.naive_ci.high, cfg.paths, 0.0});
    // With no hits the interval is one-sided; its upper end bounds the rate from below.
    const double naive_bound = pt.hits > 0 ? pt.naive_speed_normalized : -std::log(pt.naive_ci.high) / (lambda * lambda);
    r.rows.push_back({eps, lambda, pt.hits > 0 ? "naive_neg_log_p_over_lambda_sq" : "naive_neg_log_p_over_lambda_sq_lower_bound",
                      naive_bound, 0.0, naive_bound, naive_bound, cfg.paths, 0.0});
    if (pt.hits == 0)
      r.warnings.push_back("no naive hits at epsilon = " + std::to_string(eps) + "; reporting one-sided interval");

    if (opts.importance_sampling) {
      const SampleSummary s = summarize(is_term[e]);
      pt.is_estimate = s.mean;
      pt.is_std_error = s.std_error;
      pt.is_ci = normal_interval(s.mean, s.std_error);
      pt.is_ci.low = std::max(0.0, pt.is_ci.low);
      std::vector<double> w2(cfg.paths);
      for (std::size_t k = 0; k < cfg.paths; ++k) w2[k] = is_weight[e][k] * is_weight[e][k];
      const double sw = pairwise_sum(is_weight[e]);
      const double sw2 = pairwise_sum(w2);
      pt.effective_sample_size = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
      pt.is_speed_normalized =
          pt.is_estimate > 0.0 ? -std::log(pt.is_estimate) / (lambda * lambda) : std::numeric_limits<double>::infinity();
      r.rows.push_back({eps, lambda, "is_probability", pt.is_estimate, pt.is_std_error, pt.is_ci.low, pt.is_ci.high,
                        cfg.paths, 0.0});
      r.rows.push_back(row(eps, lambda, "is_effective_sample_size", pt.effective_sample_size, 0.0, cfg.paths, 0.0));
      r.rows.push_back(row(eps, lambda, "is_shift_scale", pt.shift_scale, 0.0, cfg.paths, 0.0));
      r.rows.push_back({eps, lambda, "is_neg_log_p_over_lambda_sq", pt.is_speed_normalized, 0.0,
                        pt.is_speed_normalized, pt.is_speed_normalized, cfg.paths, 0.0});
      if (pt.effective_sample_size < 10.0)
        r.warnings.push_back("importance weights have effective sample size " +
                             std::to_string(pt.effective_sample_size) + " < 10 at epsilon = " + std::to_string(eps));
      if (pt.is_estimate > 0.0) {
        lam_sq.push_back(lambda * lambda);
        neg_log.push_back(-std::log(pt.is_estimate));
      }
    }
    r.ladder.push_back({eps, opts.importance_sampling ? pt.is_estimate : pt.naive_estimate,
                        opts.importance_sampling ? pt.is_std_error : ns.std_error, cfg.paths, 0.0});
    result.points.push_back(pt);
  }
  r.rows.push_back({kNaN, kNaN, "reference_rate_upper_bound", result.reference_rate, 0.0, result.reference_rate,
                    result.reference_rate, 0, 0.0});
  r.rows.push_back({kNaN, kNaN, "reference_control_energy", result.control_energy, 0.0, result.control_energy,
                    result.control_energy, 0, 0.0});
  if (lam_sq.size() >= 2) {
    const LineFit f = fit_line(lam_sq, neg_log);
    r.regression = f;
    r.rows.push_back({kNaN, kNaN, "neg_log_p_vs_lambda_sq_slope", f.slope, f.slope_std_error, f.slope_ci_low,
                      f.slope_ci_high, 0, 0.0});
  }
  return result;
}

namespace {

double heat_mode_error(std::size_t nx, std::size_t nt, double horizon) {
  const GridSpec g(nx, nt, horizon);
  SimParams p(g, pure_heat(0.0), SpaceField(g, [](double x) { return std::sin(std::numbers::pi * x); }));
  const PathField u = solve_deterministic(p).path;
  double worst = 0.0;
  for (std::size_t n = 0; n < u.frames(); ++n) {
    const double amp = std::exp(-std::numbers::pi * std::numbers::pi * g.t(n));
    auto row = u.interior(n);
    double s = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double d = row[i] - amp * std::sin(std::numbers::pi * g.x(i + 1));
      s += d * d;
    }
    worst = std::max(worst, std::sqrt(g.dx() * s));
  }
  return worst;
}

// sup over coarse levels of || fine restricted to coarse nodes - coarse ||_2.
double coarse_fine_gap(const PathField& coarse, const PathField& fine, unsigned factor) {
  const GridSpec& cg = coarse.grid();
  double worst = 0.0;
  for (std::size_t n = 0; n < coarse.frames(); ++n) {
    auto c = coarse.frame(n);
    auto f = fine.frame(n * factor);
    double s = 0.0;
    for (std::size_t i = 1; i <= cg.nx(); ++i) {
      const double d = f[i * factor] - c[i];
      s += d * d;
    }
    worst = std::max(worst, std::sqrt(cg.dx() * s));
  }
  return worst;
}

}  // namespace

RefinementResult grid_refinement_study(const RefinementConfig& cfg) {
  if (cfg.spatial_nx.size() < 2 || cfg.temporal_nt.size() < 2)
    throw ConfigError("refinement", "need at least two spatial and two temporal levels");
  if (cfg.levels < 1) throw ConfigError("levels", "must be at least 1");
  if (!(cfg.epsilon >= 0.0)) throw ConfigError("epsilon", "must be non-negative");
  RefinementResult res;

  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < cfg.spatial_nx.size(); ++k) {
    const std::size_t nx = cfg.spatial_nx[k];
    const double err = heat_mode_error(nx, cfg.spatial_nt, cfg.heat_horizon);
    res.rows.push_back({"spatial_error", k, nx, cfg.spatial_nt, err, 0.0, 0});
    lx.push_back(std::log(1.0 / static_cast<double>(nx + 1)));
    ly.push_back(std::log(err));
  }
  res.spatial_order = fit_line(lx, ly).slope;
  res.rows.push_back({"spatial_order", 0, 0, 0, res.spatial_order, 0.0, 0});

  lx.clear();
  ly.clear();
  for (std::size_t k = 0; k < cfg.temporal_nt.size(); ++k) {
    const std::size_t nt = cfg.temporal_nt[k];
    const double err = heat_mode_error(cfg.temporal_nx, nt, cfg.heat_horizon);
    res.rows.push_back({"temporal_error", k, cfg.temporal_nx, nt, err, 0.0, 0});
    lx.push_back(std::log(cfg.heat_horizon / static_cast<double>(nt)));
    ly.push_back(std::log(err));
  }
  res.temporal_order = fit_line(lx, ly).slope;
  res.rows.push_back({"temporal_order", 0, 0, 0, res.temporal_order, 0.0, 0});

  // Stochastic ladder on consistently refined noise.
  const StudyConfig& base = cfg.base;
  const std::size_t paths = base.paths;
  std::vector<std::vector<double>> gaps(cfg.levels, std::vector<double>(paths));
  std::vector<char> consistent(paths, 1);
  parallel_for(paths, base.threads, [&](std::size_t k) {
    NoiseRealization noise = sample_sheet({base.master_seed, k}, base.grid);
    auto solve_on = [&](const NoiseRealization& nz) {
      StudyConfig c = base;
      c.grid = nz.grid();
      SimParams p(c.grid, c.coefficients, c.initial_condition());
      p.epsilon = cfg.epsilon;
      return solve_spde(p, nz).path;
    };
    PathField coarse = solve_on(noise);
    for (unsigned level = 0; level < cfg.levels; ++level) {
      NoiseRealization fine_noise = refine(noise, 2);
      if (level == 0) {
        const PathField again = solve_on(aggregate(fine_noise, 2));
        consistent[k] = again == coarse;
      }
      PathField fine = solve_on(fine_noise);
      gaps[level][k] = coarse_fine_gap(coarse, fine, 2);
      noise = std::move(fine_noise);
      coarse = std::move(fine);
    }
  });
  res.refine_consistent = std::all_of(consistent.begin(), consistent.end(), [](char c) { return c != 0; });
  res.rows.push_back({"coarse_bitwise_consistent", 0, base.grid.nx(), base.grid.nt(),
                      res.refine_consistent ? 1.0 : 0.0, 0.0, paths});
  GridSpec g = base.grid;
  for (unsigned level = 0; level < cfg.levels; ++level) {
    const SampleSummary s = summarize(gaps[level]);
    res.stochastic_gaps.push_back(s.mean);
    res.rows.push_back({"stochastic_gap", level, g.nx(), g.nt(), s.mean, s.std_error, paths});
    g = refined_grid(g, 2);
  }
  return res;
}

}  // namespace spdelab
