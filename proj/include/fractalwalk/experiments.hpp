#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fractalwalk/report.hpp"

namespace fw {

// Flat knob bag shared by every experiment; unused fields are ignored by the
// runners that do not consume them.  The effective values (after config-file
// and flag merging) are echoed verbatim into the output manifest, so a report
// can always be reproduced from its own header.
struct RunConfig {
  std::string experiment;

  std::string system = "cantor3";  // IFS preset spec or description file
  std::string alpha;               // target number (named / rational / cf:)
  std::string blocks;      // synthetic spec "dim@f1,f2,...;dim@..." per block
  std::string block_weights;       // comma list, one weight per generator
  std::string q_list = "10..100";  // "a..b" range or comma list of Q values
  std::string conj_offset = "0";   // rational conjugation offset
  std::string lambda = "1";        // rational improvement factor in (0,1]

  long long n = 1000;   // steps / prefix length, experiment dependent
  int points = 100;     // sampled coded points (cf-stats)
  int depth = 0;        // word depth; 0 picks the per-experiment default
  int digits = 100;     // requested certified digits per point
  int trials = 0;       // probe trials / seed streams; 0 = default
  int level = 1;        // wedge power level d
  int M = 1;
  int N = 1;
  int branches = 5;     // branch count for the inversion family
  int words = 100;      // sampled words (fn-check, ur-probe)
  int k_max = 10;       // histogram bins before the tail bucket
  long long q_max = 10000;
  double t_max = 40.0;
  double dt = 0.05;
  double tol = 0.0;     // certification tolerance; 0 picks the default

  std::uint64_t seed = 0;
  bool seed_set = false;

  std::string out_json;  // optional artifact paths; stdout always gets JSON
  std::string out_csv;
};

// Invalid or inconsistent configuration (unknown experiment, missing seed,
// unparseable field).  Mapped to exit code 2 by the command-line driver.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunReport {
  JsonObject manifest;
  Csv csv;
  bool has_csv = false;
  bool pass = true;    // experiment-specific check; --assert keys off this
  int exit_code = 0;   // 0 ok, 3 certification shortfall
};

// Canonical names, in the order the command-line driver registers them.
const std::vector<std::string>& experiment_names();

// FNV-1a over the canonical serialization of the effective config.
std::string config_hash(const RunConfig& cfg);

// Echo of the effective config as an ordered JSON object.
JsonObject config_json(const RunConfig& cfg);

// Reads a JSON config file into cfg (only keys present in the file are
// touched).  Throws ConfigError on unreadable files or unknown keys.
void load_config_file(const std::string& path, RunConfig& cfg);

// Runs one experiment.  Throws ConfigError for bad configuration; internal
// certification shortfalls come back as exit_code 3 with a populated
// manifest rather than an exception.
RunReport run_experiment(const RunConfig& cfg);

// Writes manifest (and CSV when present and requested) to the paths in cfg.
// Returns the manifest serialization that also goes to stdout.
std::string emit_report(const RunConfig& cfg, const RunReport& report);

// Index-sharded parallel loop.  Worker count comes from FRACTALWALK_WORKERS
// (default 1); results must be written into per-index slots so serial and
// parallel runs produce identical reports.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// Parses "a..b" (inclusive integer range) or "v1,v2,..." into a sorted
// unique list.  Throws ConfigError on empty or malformed input.
std::vector<long long> parse_q_list(const std::string& spec);

}  // namespace fw
