#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/experiments.hpp"
#include "spdelab/grid.hpp"

namespace spdelab::cli {

/// Flat "section.key" -> value view of a run configuration. This is what the
/// manifest embeds, so a manifest can be fed back through --config.
using ConfigMap = std::map<std::string, std::string>;

inline const std::vector<std::string> kCommands{"simulate",   "clt-study",    "contraction-study", "mdp-study",
                                                "rate",       "kernel-audit", "refine-study"};

/// Every accepted key with its default for `command`.
ConfigMap default_config(const std::string& command);

/// INI file ([grid] nx = 64 ...) or a run manifest (.json) with an embedded
/// "config" object. Throws ConfigError naming the offending key.
ConfigMap load_config_file(const std::string& path);

/// Overlays `overrides` on `base`; unknown keys are a ConfigError.
void merge_config(ConfigMap& base, const ConfigMap& overrides);

struct RunConfig {
  std::string command;
  GridSpec grid{64, 4096, 1.0};
  CoefficientSet coefficients;
  std::string initial_expression;
  double epsilon = 0.0;
  std::vector<double> epsilon_ladder;
  std::string lambda_expression;
  DeviationScale deviation_scale;
  std::size_t paths = 0;
  double delta = 0.0;
  double amplitude_cap = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool importance_sampling = true;
  std::size_t pilot_paths = 0;
  double control_radius = 0.0;
  unsigned levels = 0;
  std::string rate_target;
  std::vector<double> regularization;
  double rate_tolerance = 0.0;
  int rate_max_iterations = 0;
  std::size_t frame_stride = 0;
  std::string out_dir;

  StudyConfig study() const;
};

/// Validates every field before any computation. Throws ConfigError whose
/// field() is the "section.key" at fault.
RunConfig resolve(const std::string& command, const ConfigMap& map);

/// FNV-1a 64 over the command and the sorted key=value lines.
std::string config_hash(const std::string& command, const ConfigMap& map);

/// Shortest round-trip decimal form; "nan"/"inf"/"-inf" for non-finite.
std::string format_double(double v);

std::string study_csv(const StudyResult& r);
std::string refinement_csv(const RefinementResult& r);

/// Entry point. Exit codes: 0 ok, 1 other failure, 2 configuration,
/// 3 blow-up, 4 degenerate study.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace spdelab::cli
