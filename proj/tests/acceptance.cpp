// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "spdelab/experiments.hpp"
#include "spdelab/green_kernel.hpp"
#include "spdelab/rate_function.hpp"
#include "spdelab/solvers.hpp"

using namespace spdelab;

namespace {

constexpr double kPi = std::numbers::pi;

// Criterion 1
constexpr double kBranchTol = 1e-8;
constexpr double kSemigroupTol = 1e-6;
constexpr double kBudget1 = 5.0;
// Criterion 2
constexpr double kSlope6Tol = 0.05;
constexpr double kBudget2 = 30.0;
// Criterion 3
constexpr double kHeatTol = 0.01;
constexpr double kPicardRelTol = 0.05;
constexpr double kBudget3 = 10.0;
// Criterion 4
constexpr double kContractionSlope = 1.0;
constexpr double kContractionTol = 0.2;
constexpr double kBudget4 = 900.0;
// Criterion 5
constexpr double kCltSlope = 0.5;
constexpr double kCltTol = 0.2;
constexpr double kUncoupledRatio = 5.0;
constexpr double kBudget5 = 900.0;
// Criterion 6
constexpr double kLinearityTol = 1e-10;
constexpr double kDualityTol = 1e-10;
constexpr double kRecoveryTol = 0.01;
constexpr double kUpperSlack = 1e-6;
constexpr double kDualGapTol = 0.02;
constexpr double kBudget6 = 120.0;
// Criterion 7
constexpr double kMdpDelta = 0.2;
constexpr std::size_t kMdpPaths = 512;
constexpr double kBudget7 = 900.0;

constexpr std::uint64_t kSeed = 1;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

StudyConfig study_config(GridSpec grid, std::size_t paths) {
  StudyConfig c;
  c.grid = grid;
  c.coefficients = burgers();
  c.paths = paths;
  c.master_seed = kSeed;
  c.threads = 1;
  return c;
}

Verdict kernel_correctness() {
  double worst = 0.0;
  for (double t : {1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 0.05, 0.1, 0.2, 0.3, 0.5})
    for (int i = 0; i <= 32; ++i)
      for (int j = 0; j <= 32; ++j) {
        const double x = i / 32.0, y = j / 32.0;
        worst = std::max(worst, std::abs(green_spectral(t, x, y, 1e-12) - green_images(t, x, y, 1e-12)));
      }
  const double defect = semigroup_defect(0.1, 0.1, KernelConfig{}, GridSpec(256, 1, 1.0));
  return {worst <= kBranchTol && defect <= kSemigroupTol,
          "spectral vs images max " + fmt(worst) + " (tol " + fmt(kBranchTol) + "), semigroup defect " + fmt(defect) +
              " (tol " + fmt(kSemigroupTol) + ")"};
}

Verdict kernel_audit() {
  const BoundAuditReport rep = audit_bounds(KernelConfig{}, default_audit_plan());
  bool ok = rep.records.size() == 7;
  std::string d = "constants";
  for (const auto& r : rep.records) {
    ok = ok && std::isfinite(r.fitted_constant) && r.pass;
    d += " " + fmt(r.fitted_constant);
  }
  int checked = 0;
  for (const auto& r : rep.records) {
    if (r.id != 6) continue;
    for (double p : {1.5, 2.0, 2.5}) {
      double worst = -1.0;
      for (const auto& e : r.exponents)
        if (e.p == p) worst = std::max(worst, std::abs(e.observed - e.predicted));
      ok = ok && worst >= 0.0 && worst <= kSlope6Tol;
      d += "; p=" + fmt(p) + " slope err " + fmt(worst);
      ++checked;
    }
  }
  return {ok && checked == 3, d + " (tol " + fmt(kSlope6Tol) + ")"};
}

Verdict stepper() {
  const GridSpec g(128, 4096, 0.1);
  const SpaceField sine(g, [](double x) { return std::sin(kPi * x); });
  const PathField u = solve_deterministic(SimParams(g, pure_heat(), sine)).path;
  const double amp = l2_norm(u.interior(g.nt()), g) / l2_norm(sine, g);
  const double heat_rel = std::abs(amp / std::exp(-kPi * kPi * 0.1) - 1.0);

  const GridSpec gp(32, 256, 0.25);
  SimParams p(gp, burgers(), SpaceField(gp, [](double x) { return 2.0 * std::sin(kPi * x); }));
  const PathField us = solve_deterministic(p).path;
  const PathField mild = oracle::mild_picard(p, 8);
  const double picard_rel = sup_l2_distance(us, mild) / sup_l2_norm(us, gp);
  return {heat_rel <= kHeatTol && picard_rel <= kPicardRelTol,
          "heat mode relative error " + fmt(heat_rel) + " (tol " + fmt(kHeatTol) + "), Picard relative gap " +
              fmt(picard_rel) + " (tol " + fmt(kPicardRelTol) + ")"};
}

Verdict contraction() {
  const StudyResult r = contraction_study(study_config(GridSpec(64, 4096, 1.0), 64));
  if (!r.regression || r.degenerate) return {false, "regression unavailable"};
  const double slope = r.regression->slope;
  return {std::abs(slope - kContractionSlope) <= kContractionTol,
          "slope " + fmt(slope) + " (target " + fmt(kContractionSlope) + " +- " + fmt(kContractionTol) + ")"};
}

Verdict clt() {
  const StudyResult r = clt_study(study_config(GridSpec(64, 4096, 1.0), 64));
  if (!r.regression || r.degenerate) return {false, "regression unavailable"};
  bool decreasing = true;
  for (std::size_t k = 1; k < r.ladder.size(); ++k) decreasing = decreasing && r.ladder[k].estimate < r.ladder[k - 1].estimate;
  double coupled = 0.0, uncoupled = 0.0;
  const double eps_min = r.ladder.back().epsilon;
  for (const auto& row : r.rows) {
    if (row.epsilon != eps_min) continue;
    if (row.statistic == "coupled_mean_sup_gap") coupled = row.value;
    if (row.statistic == "uncoupled_mean_sup_gap") uncoupled = row.value;
  }
  const double slope = r.regression->slope;
  const bool ok = decreasing && std::abs(slope - kCltSlope) <= kCltTol && uncoupled > kUncoupledRatio * coupled;
  return {ok, std::string("coupled ") + (decreasing ? "strictly decreasing" : "NOT decreasing") + ", slope " + fmt(slope) +
                  " (target " + fmt(kCltSlope) + " +- " + fmt(kCltTol) + "), uncoupled/coupled at smallest eps " +
                  fmt(uncoupled / coupled) + " (need > " + fmt(kUncoupledRatio) + ")"};
}

Verdict skeleton_rate() {
  const GridSpec g(16, 64, 0.5);
  SimParams params(g, burgers(), SpaceField(g, [](double x) { return std::sin(kPi * x); }));
  const PathField base = solve_deterministic(params).path;
  const SkeletonOperator op(params.coefficients, base);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  auto random_control = [&] {
    Control h(g);
    for (double& v : h.raw()) v = nd(rng);
    return h;
  };
  auto random_path = [&] {
    PathField p(g);
    for (std::size_t n = 0; n < p.frames(); ++n)
      for (double& v : p.interior(n)) v = nd(rng);
    return p;
  };

  double lin = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Control a = random_control(), b = random_control();
    const double ca = nd(rng), cb = nd(rng);
    const PathField lhs = op.forward(ca * a + cb * b);
    const PathField rhs = ca * op.forward(a) + cb * op.forward(b);
    lin = std::max(lin, sup_l2_distance(lhs, rhs) / sup_l2_norm(rhs, g));
  }

  double dual = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Control h = random_control();
    const PathField mu = random_path();
    const PathField ah = op.forward(h);
    const double scale = std::sqrt(path_inner(ah, ah) * path_inner(mu, mu));
    dual = std::max(dual, std::abs(path_inner(ah, mu) - control_inner(h, op.adjoint(mu))) / scale);
  }

  const RateOptions fine{.regularization = 1e-10, .tolerance = 1e-12, .max_iterations = 20000};
  double recovery = 0.0, gap = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Control h0 = op.adjoint(random_path());
    const RateCertificate c = evaluate_rate(op.forward(h0), op, fine);
    const double truth = 0.5 * h_norm_sq(h0, g);
    recovery = std::max(recovery, std::abs(c.value - truth) / truth);
    gap = std::max(gap, std::abs(c.dual_lower_bound - c.value) / c.value);
  }

  double excess = -INFINITY;
  for (int k = 0; k < 20; ++k) {
    const Control h = random_control();
    const RateCertificate c = evaluate_rate(op.forward(h), op, fine);
    excess = std::max(excess, c.value - 0.5 * h_norm_sq(h, g));
  }

  const bool ok = lin <= kLinearityTol && dual <= kDualityTol && recovery <= kRecoveryTol && excess <= kUpperSlack &&
                  gap <= kDualGapTol;
  return {ok, "linearity " + fmt(lin) + ", duality " + fmt(dual) + ", recovery " + fmt(recovery) +
                  ", max I(X^h) - |h|^2/2 " + fmt(excess) + ", dual gap " + fmt(gap)};
}

Verdict mdp() {
  StudyConfig cfg = study_config(GridSpec(32, 1024, 1.0), kMdpPaths);
  cfg.event_threshold = kMdpDelta;

  MdpOptions zero;
  zero.is_control = Control(cfg.grid);
  const MdpResult z = mdp_tail_study(cfg, zero);
  bool identity = true;
  for (const auto& pt : z.points)
    identity = identity && pt.is_estimate == pt.naive_estimate && pt.effective_sample_size == double(cfg.paths);

  const MdpResult r = mdp_tail_study(cfg);
  const MdpLadderPoint& top = r.points.front();
  const bool overlap = top.naive_ci.low <= top.is_ci.high && top.is_ci.low <= top.naive_ci.high;
  bool finite = true;
  std::string per_eps;
  for (const auto& pt : r.points) {
    finite = finite && std::isfinite(pt.is_speed_normalized);
    per_eps += " eps=" + fmt(pt.epsilon) + ":" + fmt(pt.is_speed_normalized);
  }
  return {identity && overlap && finite,
          std::string("v=0 identity ") + (identity ? "exact" : "BROKEN") + ", naive CI [" + fmt(top.naive_ci.low) + ", " +
              fmt(top.naive_ci.high) + "] vs IS CI [" + fmt(top.is_ci.low) + ", " + fmt(top.is_ci.high) +
              "], -log P/lambda^2" + per_eps + " vs upper bound " + fmt(r.reference_rate) +
              " (asymptotic limit not asserted)"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "spdelab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Verdict reproducibility() {
  namespace fs = std::filesystem;
  const fs::path root = "acceptance_runs";
  fs::remove_all(root);
  struct Job {
    std::string command;
    std::vector<std::string> files;
  };
  const std::vector<Job> jobs{{"contraction-study", {"contraction.csv"}},
                              {"clt-study", {"clt.csv"}},
                              {"mdp-study", {"mdp.csv"}},
                              {"refine-study", {"refine.csv"}},
                              {"rate", {"rate.csv"}},
                              {"simulate", {"simulate_path.csv", "simulate_norms.csv"}}};
  bool ok = true;
  std::string d;
  for (const auto& job : jobs) {
    const fs::path a = root / (job.command + "_t1"), b = root / (job.command + "_t1_again"),
                   c = root / (job.command + "_t8");
    const int ra = run_cli({job.command, "--seed", std::to_string(kSeed), "--threads", "1", "--out", a.string()});
    const int rb = run_cli({job.command, "--seed", std::to_string(kSeed), "--threads", "1", "--out", b.string()});
    const int rc = run_cli({job.command, "--seed", std::to_string(kSeed), "--threads", "8", "--out", c.string()});
    bool same = ra == 0 && rb == 0 && rc == 0;
    for (const auto& f : job.files) {
      const std::string x = slurp(a / f);
      same = same && !x.empty() && x == slurp(b / f) && x == slurp(c / f);
    }
    ok = ok && same;
    d += " " + job.command + (same ? ":identical" : ":DIFFERENT");
  }
  return {ok, "1 vs 1 vs 8 threads," + d};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Verdict()> body;
  };
  const std::vector<Criterion> criteria{
      {1, "kernel correctness", kBudget1, kernel_correctness},
      {2, "kernel estimate audit", kBudget2, kernel_audit},
      {3, "stepper validation", kBudget3, stepper},
      {4, "contraction slope", kBudget4, contraction},
      {5, "central limit fluctuations", kBudget5, clt},
      {6, "skeleton and rate function", kBudget6, skeleton_rate},
      {7, "moderate deviation machinery", kBudget7, mdp},
      {8, "reproducibility", 0.0, reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = c.budget_seconds <= 0.0 || secs <= c.budget_seconds;
    const bool pass = v.pass && in_budget;
    if (!pass) ++failures;
    std::printf("%s criterion %d (%s): %s; %.1f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs,
                c.budget_seconds > 0.0 ? (" (budget " + fmt(c.budget_seconds) + " s)").c_str() : "");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
