#include "cli.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "spdelab/errors.hpp"
#include "spdelab/expression.hpp"
#include "spdelab/green_kernel.hpp"
#include "spdelab/rate_function.hpp"
#include "spdelab/solvers.hpp"

namespace spdelab::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

// Library ConfigError fields mapped to the config key the user can edit.
const std::map<std::string, std::string> kFieldToKey{
    {"epsilon_ladder", "study.epsilon_ladder"}, {"paths", "study.paths"},
    {"delta", "study.delta"},                   {"amplitude_cap", "model.amplitude_cap"},
    {"deviation_scale", "model.lambda"},        {"epsilon", "model.epsilon"},
    {"preset", "model.preset"},                 {"f", "model.f"},
    {"g1", "model.g1"},                         {"g2", "model.g2"},
    {"sigma", "model.sigma"},                   {"r_cap", "model.r_cap"},
    {"levels", "study.levels"},                 {"target", "rate.target"},
};

std::string qualify(const std::string& field) {
  auto it = kFieldToKey.find(field);
  return it == kFieldToKey.end() ? field : it->second;
}

// Re-raises a library ConfigError under the config key, without the old prefix.
[[noreturn]] void rethrow_as(const ConfigError& e, const std::string& key) {
  std::string msg = e.what();
  const std::string prefix = e.field() + ": ";
  if (!e.field().empty() && msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  throw ConfigError(key, msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const ConfigMap& m, const std::string& key) {
  const std::string v = trim(m.at(key));
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a finite number, got '" + v + "'");
  }
}

std::uint64_t to_uint(const ConfigMap& m, const std::string& key) {
  const std::string v = trim(m.at(key));
  try {
    std::size_t pos = 0;
    if (v.empty() || v[0] == '-') throw std::invalid_argument("");
    const unsigned long long u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return u;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
}

bool to_bool(const ConfigMap& m, const std::string& key) {
  const std::string v = trim(m.at(key));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const ConfigMap& m, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(m.at(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    ConfigMap one{{key, item}};
    out.push_back(to_double(one, key));
  }
  if (out.empty()) throw ConfigError(key, "must not be empty");
  return out;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os << content;
    if (!os.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string csv_count(std::size_t n) { return std::to_string(n); }

// Keys that do not change any numeric output.
bool excluded_from_hash(const std::string& key) { return key == "study.threads" || key == "output.dir"; }

struct Outputs {
  std::filesystem::path dir;
  std::vector<std::string> files;
  std::vector<std::string> warnings;

  void write(const std::string& name, const std::string& content) {
    write_atomic(dir / name, content);
    files.push_back(name);
  }
};

std::string audit_csv(const BoundAuditReport& rep) {
  std::string s = "id,inequality,samples,degenerate_skipped,fitted_constant,worst_t,worst_s,worst_x,worst_y,worst_p,pass\n";
  for (const auto& r : rep.records) {
    s += std::to_string(r.id) + ",\"" + r.inequality + "\"," + csv_count(r.samples) + "," +
         csv_count(r.degenerate_skipped) + "," + format_double(r.fitted_constant) + "," + format_double(r.worst_t) +
         "," + format_double(r.worst_s) + "," + format_double(r.worst_x) + "," + format_double(r.worst_y) + "," +
         format_double(r.worst_p) + "," + (r.pass ? "true" : "false") + "\n";
  }
  return s;
}

std::string exponents_csv(const BoundAuditReport& rep) {
  std::string s = "id,p,predicted,observed\n";
  for (const auto& r : rep.records)
    for (const auto& e : r.exponents)
      s += std::to_string(r.id) + "," + format_double(e.p) + "," + format_double(e.predicted) + "," +
           format_double(e.observed) + "\n";
  return s;
}

nlohmann::json audit_json(const BoundAuditReport& rep) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rep.records) {
    nlohmann::json rec{{"id", r.id},
                       {"inequality", r.inequality},
                       {"samples", r.samples},
                       {"degenerate_skipped", r.degenerate_skipped},
                       {"fitted_constant", r.fitted_constant},
                       {"worst", {{"t", r.worst_t}, {"s", r.worst_s}, {"x", r.worst_x}, {"y", r.worst_y}, {"p", r.worst_p}}},
                       {"pass", r.pass}};
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : r.parameters) params[k] = v;
    rec["parameters"] = params;
    nlohmann::json ex = nlohmann::json::array();
    for (const auto& e : r.exponents) ex.push_back({{"p", e.p}, {"predicted", e.predicted}, {"observed", e.observed}});
    rec["exponents"] = ex;
    j.push_back(rec);
  }
  return j;
}

// Returns the exit status of the command body (0 or 4).
int execute(const RunConfig& rc, const ConfigMap& map, Outputs& out, std::ostream& log) {
  const std::string& cmd = rc.command;
  if (cmd == "simulate") {
    SimParams p(rc.grid, rc.coefficients, rc.study().initial_condition());
    p.epsilon = rc.epsilon;
    p.amplitude_cap = rc.amplitude_cap;
    p.validate();
    const NoiseRealization noise =
        rc.epsilon > 0.0 ? sample_sheet(SeedSpec{rc.seed, 0}, rc.grid) : zero_sheet(rc.grid);
    const SolveOutput s = solve_spde(p, noise);
    const std::size_t stride = rc.frame_stride > 0 ? rc.frame_stride : std::max<std::size_t>(1, rc.grid.nt() / 256);
    std::string path = "t,x,u\n";
    for (std::size_t n = 0; n <= rc.grid.nt(); n += stride) {
      const auto f = s.path.frame(n);
      for (std::size_t i = 0; i < f.size(); ++i)
        path += format_double(rc.grid.t(n)) + "," + format_double(rc.grid.x(i)) + "," + format_double(f[i]) + "\n";
    }
    std::string norms = "level,t,l2_norm,max_abs\n";
    for (std::size_t n = 0; n <= rc.grid.nt(); ++n)
      norms += std::to_string(n) + "," + format_double(rc.grid.t(n)) + "," +
               format_double(l2_norm(s.path.frame(n), rc.grid)) + "," + format_double(s.max_abs[n]) + "\n";
    out.write("simulate_path.csv", path);
    out.write("simulate_norms.csv", norms);
    if (s.exceedance_level)
      out.warnings.push_back("amplitude cap reached at level " + std::to_string(*s.exceedance_level));
    log << "simulate: " << rc.grid.nt() << " steps, sup L2 " << format_double(sup_l2_norm(s.path, rc.grid)) << "\n";
    return 0;
  }

  if (cmd == "contraction-study" || cmd == "clt-study") {
    const StudyResult r = cmd == "clt-study" ? clt_study(rc.study()) : contraction_study(rc.study());
    out.write(cmd == "clt-study" ? "clt.csv" : "contraction.csv", study_csv(r));
    for (const auto& w : r.warnings) out.warnings.push_back(w);
    if (r.regression) log << r.study << ": slope " << format_double(r.regression->slope) << "\n";
    if (r.degenerate) {
      out.warnings.push_back("degenerate: some estimate is zero, slope undefined");
      return 4;
    }
    return 0;
  }

  if (cmd == "mdp-study") {
    MdpOptions opts;
    opts.importance_sampling = rc.importance_sampling;
    opts.pilot_paths = rc.pilot_paths;
    opts.control_radius = rc.control_radius;
    const MdpResult r = mdp_tail_study(rc.study(), opts);
    out.write("mdp.csv", study_csv(r.study));
    for (const auto& w : r.study.warnings) out.warnings.push_back(w);
    log << "mdp-study: reference rate upper bound " << format_double(r.reference_rate) << "\n";
    return 0;
  }

  if (cmd == "rate") {
    const StudyConfig sc = rc.study();
    SimParams p(rc.grid, rc.coefficients, sc.initial_condition());
    p.amplitude_cap = rc.amplitude_cap;
    const PathField base = solve_deterministic(p).path;
    const Expression target_expr = [&] {
      try {
        return Expression::parse(rc.rate_target, {"t", "x"});
      } catch (const ConfigError& e) {
        rethrow_as(e, "rate.target");
      }
    }();
    PathField target(rc.grid);
    for (std::size_t n = 1; n <= rc.grid.nt(); ++n) {
      auto fr = target.interior(n);
      for (std::size_t i = 0; i < fr.size(); ++i) fr[i] = target_expr(std::array{rc.grid.t(n), rc.grid.x(i + 1)});
    }
    const SkeletonOperator op(rc.coefficients, base);
    RateOptions ro;
    ro.tolerance = rc.rate_tolerance;
    ro.max_iterations = rc.rate_max_iterations;
    const RateLadder ladder = evaluate_rate_ladder(target, op, rc.regularization, ro);
    std::string csv = "regularization,value,residual,dual_lower_bound,cg_iterations\n";
    for (const auto& e : ladder.entries)
      csv += format_double(e.regularization) + "," + format_double(e.value) + "," + format_double(e.residual) + "," +
             format_double(e.dual_lower_bound) + "," + std::to_string(e.cg_iterations) + "\n";
    out.write("rate.csv", csv);
    nlohmann::json cert{{"extrapolated_value", ladder.extrapolated_value},
                        {"residual_stalled", ladder.residual_stalled}};
    if (ladder.finest) {
      cert["value"] = ladder.finest->value;
      cert["residual"] = ladder.finest->residual;
      cert["dual_lower_bound"] = ladder.finest->dual_lower_bound;
      cert["regularization"] = ladder.finest->regularization;
      cert["cg_iterations"] = ladder.finest->cg_iterations;
      cert["cg_relative_residual"] = ladder.finest->cg_relative_residual;
      cert["sigma_min_abs"] = ladder.finest->sigma_min_abs;
      cert["sigma_degenerate"] = ladder.finest->sigma_degenerate;
      if (ladder.finest->sigma_degenerate)
        out.warnings.push_back("sigma(U0) nearly vanishes: the rate function may be infinite off the reachable set");
    }
    out.write("rate_certificate.json", cert.dump(2) + "\n");
    if (ladder.residual_stalled) out.warnings.push_back("residual stalled along the ladder: target looks unattainable");
    log << "rate: extrapolated value " << format_double(ladder.extrapolated_value) << "\n";
    return 0;
  }

  if (cmd == "kernel-audit") {
    KernelConfig kc;
    kc.crossover_time = to_double(map, "kernel.crossover_time");
    kc.tail_tolerance = to_double(map, "kernel.tail_tolerance");
    kc.series_terms = static_cast<int>(to_uint(map, "kernel.series_terms"));
    AuditPlan plan = default_audit_plan();
    plan.horizon = rc.grid.horizon();
    const BoundAuditReport rep = audit_bounds(kc, plan);
    out.write("kernel_audit.csv", audit_csv(rep));
    out.write("kernel_exponents.csv", exponents_csv(rep));
    out.write("kernel_audit.json", audit_json(rep).dump(2) + "\n");
    for (const auto& r : rep.records)
      log << "estimate " << r.id << ": C = " << format_double(r.fitted_constant) << (r.pass ? "" : " (FAIL)") << "\n";
    return 0;
  }

  if (cmd == "refine-study") {
    RefinementConfig cfg;
    cfg.base = rc.study();
    cfg.levels = rc.levels;
    cfg.epsilon = rc.epsilon;
    const RefinementResult r = grid_refinement_study(cfg);
    out.write("refine.csv", refinement_csv(r));
    if (!r.refine_consistent) out.warnings.push_back("coarse solution not reproduced bitwise from aggregated noise");
    log << "refine-study: spatial order " << format_double(r.spatial_order) << ", temporal order "
        << format_double(r.temporal_order) << "\n";
    return 0;
  }
  throw ConfigError("command", "unknown command '" + cmd + "'");
}

std::string escape_field(const std::string& s) {
  std::string o;
  for (char c : s) o += (c == '\n' ? ' ' : c);
  return o;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ConfigMap default_config(const std::string& command) {
  ConfigMap m{
      {"grid.nx", "64"},
      {"grid.nt", "4096"},
      {"grid.horizon", "1"},
      {"model.preset", "burgers"},
      {"model.c0", "0.5"},
      {"model.c1", "0.5"},
      {"model.r_cap", "20"},
      {"model.f", "0"},
      {"model.g1", "0"},
      {"model.g2", "0"},
      {"model.sigma", "1"},
      {"model.K", "1"},
      {"model.L", "1"},
      {"model.K_prime", "1"},
      {"model.sigma_bound", "1"},
      {"model.initial", "sin(pi*x)"},
      {"model.epsilon", "0.01"},
      {"model.lambda", "eps^(-1/4)"},
      {"model.amplitude_cap", "1e300"},
      {"study.epsilon_ladder", "1e-2,1e-3,1e-4"},
      {"study.paths", "64"},
      {"study.delta", "1"},
      {"study.seed", "1"},
      {"study.threads", "1"},
      {"study.importance_sampling", "true"},
      {"study.pilot_paths", "64"},
      {"study.control_radius", "1e6"},
      {"study.levels", "3"},
      {"rate.target", "0.2*t*sin(pi*x)"},
      {"rate.regularization", "1e-2,1e-4,1e-6"},
      {"rate.tolerance", "1e-10"},
      {"rate.max_iterations", "5000"},
      {"kernel.crossover_time", "0.05"},
      {"kernel.tail_tolerance", "1e-12"},
      {"kernel.series_terms", "1"},
      {"output.dir", "."},
      {"output.frame_stride", "0"},
  };
  if (command == "mdp-study") {
    m["grid.nx"] = "32";
    m["grid.nt"] = "1024";
    m["study.paths"] = "512";
    m["study.delta"] = "0.2";
  } else if (command == "rate") {
    m["grid.nx"] = "31";
    m["grid.nt"] = "256";
  } else if (command == "refine-study") {
    m["grid.nx"] = "7";
    m["grid.nt"] = "32";
    m["grid.horizon"] = "0.25";
    m["study.paths"] = "16";
  }
  return m;
}

void merge_config(ConfigMap& base, const ConfigMap& overrides) {
  for (const auto& [k, v] : overrides) {
    auto it = base.find(k);
    if (it == base.end()) throw ConfigError(k, "unknown configuration key");
    it->second = v;
  }
}

ConfigMap load_config_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config", "file not found: " + path);
  ConfigMap m;
  if (std::filesystem::path(path).extension() == ".json") {
    std::ifstream is(path);
    nlohmann::json j;
    try {
      is >> j;
    } catch (const std::exception& e) {
      throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    const nlohmann::json& cfg = j.contains("config") ? j["config"] : j;
    if (!cfg.is_object()) throw ConfigError("config", "expected an object of \"section.key\": value");
    for (const auto& [k, v] : cfg.items()) {
      if (v.is_string())
        m[k] = v.get<std::string>();
      else if (v.is_number() || v.is_boolean())
        m[k] = v.dump();
      else
        throw ConfigError(k, "expected a scalar value");
    }
    return m;
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "key outside of a section");
    for (const auto& [key, value] : body) m[section + "." + key] = trim(value.data());
  }
  return m;
}

StudyConfig RunConfig::study() const {
  StudyConfig s;
  s.grid = grid;
  s.coefficients = coefficients;
  const Expression init = Expression::parse(initial_expression, {"x"});
  s.initial_profile = [init](double x) { return init(std::array{x}); };
  s.epsilon_ladder = epsilon_ladder;
  s.paths = paths;
  s.deviation_scale = deviation_scale;
  s.event_threshold = delta;
  s.amplitude_cap = amplitude_cap;
  s.master_seed = seed;
  s.threads = threads;
  s.require_moderate_regime = command == "mdp-study";
  return s;
}

RunConfig resolve(const std::string& command, const ConfigMap& map) {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw ConfigError("command", "unknown command '" + command + "'");
  ConfigMap m = default_config(command);
  merge_config(m, map);

  RunConfig rc;
  rc.command = command;
  const auto nx = to_uint(m, "grid.nx");
  const auto nt = to_uint(m, "grid.nt");
  const double T = to_double(m, "grid.horizon");
  if (nx < 1) throw ConfigError("grid.nx", "must be at least 1");
  if (nt < 1) throw ConfigError("grid.nt", "must be at least 1");
  if (!(T > 0.0)) throw ConfigError("grid.horizon", "must be positive");
  rc.grid = GridSpec(nx, nt, T);

  try {
    const std::string preset_name = trim(m["model.preset"]);
    if (preset_name == "burgers") {
      rc.coefficients = burgers({to_double(m, "model.c0"), to_double(m, "model.c1")});
    } else if (preset_name == "reaction_diffusion") {
      rc.coefficients =
          reaction_diffusion({to_double(m, "model.c0"), to_double(m, "model.c1"), to_double(m, "model.r_cap")});
    } else if (preset_name == "custom") {
      CustomSpec cs;
      cs.f = m["model.f"];
      cs.g1 = m["model.g1"];
      cs.g2 = m["model.g2"];
      cs.sigma = m["model.sigma"];
      cs.K = to_double(m, "model.K");
      cs.L = to_double(m, "model.L");
      cs.K_prime = to_double(m, "model.K_prime");
      cs.sigma_bound = to_double(m, "model.sigma_bound");
      rc.coefficients = custom(cs);
    } else {
      rc.coefficients = preset(preset_name);
    }
    rc.initial_expression = m["model.initial"];
    Expression::parse(rc.initial_expression, {"x"});
  } catch (const ConfigError& e) {
    rethrow_as(e, e.field() == "expression" ? "model.initial" : qualify(e.field()));
  }

  rc.epsilon = to_double(m, "model.epsilon");
  if (rc.epsilon < 0.0) throw ConfigError("model.epsilon", "must be non-negative");
  rc.lambda_expression = m["model.lambda"];
  try {
    const Expression lam = Expression::parse(rc.lambda_expression, {"eps"});
    rc.deviation_scale = [lam](double eps) { return lam(std::array{eps}); };
  } catch (const ConfigError& e) {
    rethrow_as(e, "model.lambda");
  }
  rc.amplitude_cap = to_double(m, "model.amplitude_cap");
  if (!(rc.amplitude_cap > 0.0)) throw ConfigError("model.amplitude_cap", "must be positive");

  rc.epsilon_ladder = to_list(m, "study.epsilon_ladder");
  rc.paths = to_uint(m, "study.paths");
  rc.delta = to_double(m, "study.delta");
  rc.seed = to_uint(m, "study.seed");
  rc.threads = static_cast<unsigned>(to_uint(m, "study.threads"));
  if (rc.threads < 1) throw ConfigError("study.threads", "must be at least 1");
  rc.importance_sampling = to_bool(m, "study.importance_sampling");
  rc.pilot_paths = to_uint(m, "study.pilot_paths");
  rc.control_radius = to_double(m, "study.control_radius");
  if (!(rc.control_radius > 0.0)) throw ConfigError("study.control_radius", "must be positive");
  rc.levels = static_cast<unsigned>(to_uint(m, "study.levels"));

  rc.rate_target = m["rate.target"];
  rc.regularization = to_list(m, "rate.regularization");
  for (double r : rc.regularization)
    if (!(r > 0.0)) throw ConfigError("rate.regularization", "entries must be positive");
  rc.rate_tolerance = to_double(m, "rate.tolerance");
  if (!(rc.rate_tolerance > 0.0)) throw ConfigError("rate.tolerance", "must be positive");
  rc.rate_max_iterations = static_cast<int>(to_uint(m, "rate.max_iterations"));
  if (rc.rate_max_iterations < 1) throw ConfigError("rate.max_iterations", "must be at least 1");

  to_double(m, "kernel.crossover_time");
  to_double(m, "kernel.tail_tolerance");
  if (to_uint(m, "kernel.series_terms") < 1) throw ConfigError("kernel.series_terms", "must be at least 1");
  rc.frame_stride = to_uint(m, "output.frame_stride");
  rc.out_dir = m["output.dir"];

  // Study-level invariants, checked before any solve.
  if (command == "contraction-study" || command == "clt-study" || command == "mdp-study" ||
      command == "refine-study") {
    try {
      rc.study().validate();
    } catch (const ConfigError& e) {
      rethrow_as(e, qualify(e.field()));
    }
  }
  if (command == "refine-study" && rc.levels < 1) throw ConfigError("study.levels", "must be at least 1");
  return rc;
}

std::string config_hash(const std::string& command, const ConfigMap& map) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  feed(command);
  feed("\n");
  for (const auto& [k, v] : map) {
    if (excluded_from_hash(k)) continue;
    feed(k + "=" + trim(v) + "\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

std::string study_csv(const StudyResult& r) {
  std::string s = "study,epsilon,lambda,statistic,value,std_error,ci_low,ci_high,paths,exceedance_fraction\n";
  for (const auto& row : r.rows) {
    const bool wide = std::isnan(row.epsilon);
    s += r.study + "," + (wide ? "all" : format_double(row.epsilon)) + "," + (wide ? "all" : format_double(row.lambda)) +
         "," + row.statistic + "," + format_double(row.value) + "," + format_double(row.std_error) + "," +
         format_double(row.ci_low) + "," + format_double(row.ci_high) + "," + csv_count(row.paths) + "," +
         format_double(row.exceedance_fraction) + "\n";
  }
  return s;
}

std::string refinement_csv(const RefinementResult& r) {
  std::string s = "kind,level,nx,nt,value,std_error,paths\n";
  for (const auto& row : r.rows)
    s += row.kind + "," + csv_count(row.level) + "," + csv_count(row.nx) + "," + csv_count(row.nt) + "," +
         format_double(row.value) + "," + format_double(row.std_error) + "," + csv_count(row.paths) + "\n";
  return s;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic Burgers-type equations: simulation and asymptotic studies"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir, ladder, preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::size_t> nx, nt, paths;
  std::optional<double> horizon, epsilon, delta;

  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI file or run manifest (.json)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (does not change results)");
    sub->add_option("--epsilon-ladder", ladder, "comma separated, strictly decreasing");
    sub->add_option("--preset", preset_name, "burgers, reaction_diffusion, heat or custom");
    sub->add_option("--nx", nx, "interior spatial nodes");
    sub->add_option("--nt", nt, "time steps");
    sub->add_option("--horizon", horizon, "final time T");
    sub->add_option("--epsilon", epsilon, "noise intensity (simulate, refine-study)");
    sub->add_option("--paths", paths, "Monte Carlo paths");
    sub->add_option("--delta", delta, "tail event radius");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  ConfigMap map;
  try {
    map = default_config(command);
    if (!config_path.empty()) merge_config(map, load_config_file(config_path));
    ConfigMap flags;
    if (seed) flags["study.seed"] = std::to_string(*seed);
    if (threads) flags["study.threads"] = std::to_string(*threads);
    if (!out_dir.empty()) flags["output.dir"] = out_dir;
    if (!ladder.empty()) flags["study.epsilon_ladder"] = ladder;
    if (!preset_name.empty()) flags["model.preset"] = preset_name;
    if (nx) flags["grid.nx"] = std::to_string(*nx);
    if (nt) flags["grid.nt"] = std::to_string(*nt);
    if (horizon) flags["grid.horizon"] = format_double(*horizon);
    if (epsilon) flags["model.epsilon"] = format_double(*epsilon);
    if (paths) flags["study.paths"] = std::to_string(*paths);
    if (delta) flags["study.delta"] = format_double(*delta);
    merge_config(map, flags);

    const RunConfig rc = resolve(command, map);
    Outputs outputs;
    outputs.dir = rc.out_dir;
    std::filesystem::create_directories(outputs.dir);
    const int status = execute(rc, map, outputs, out);

    for (const auto& w : outputs.warnings) err << "warning: " << w << "\n";
    nlohmann::json manifest{
        {"tool", "spdelab"},
        {"version", kVersion},
        {"command", command},
        {"config_hash", config_hash(command, map)},
        {"seeds",
         {{"master_seed", rc.seed},
          {"path_streams", "path k uses stream k"},
          {"independent_stream_offset", kIndependentStream},
          {"pilot_stream_offset", kPilotStream}}},
        {"grid", {{"nx", rc.grid.nx()}, {"nt", rc.grid.nt()}, {"horizon", rc.grid.horizon()}}},
        {"preset", rc.coefficients.name},
        {"threads", rc.threads},
        {"started_at", started},
        {"finished_at", utc_now()},
        {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
        {"outputs", outputs.files},
        {"warnings", outputs.warnings},
        {"status", status == 0 ? "ok" : "degenerate"},
        {"config", map},
    };
    write_atomic(outputs.dir / (command + "_manifest.json"), manifest.dump(2) + "\n");
    if (status == 4) err << "error: class=degenerate message=study is degenerate (see warnings)\n";
    return status;
  } catch (const ConfigError& e) {
    err << "error: class=config field=" << e.field() << " message=" << escape_field(e.what()) << "\n";
    return 2;
  } catch (const BlowUpError& e) {
    err << "error: class=blowup step=" << e.step() << " message=" << escape_field(e.what()) << "\n";
    return 3;
  } catch (const StudyError& e) {
    err << "error: class=degenerate message=" << escape_field(e.what()) << "\n";
    return 4;
  } catch (const ConvergenceError& e) {
    err << "error: class=convergence iterations=" << e.iterations() << " residual=" << format_double(e.last_residual())
        << " message=" << escape_field(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: class=runtime message=" << escape_field(e.what()) << "\n";
    return 1;
  }
}

}  // namespace spdelab::cli
