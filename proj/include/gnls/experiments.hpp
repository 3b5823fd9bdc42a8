#pragma once
// Scripted experiments: a spec names a graph source and a parameter grid;
// running it executes the grid (concurrently, deterministically) and writes
// one JSON record plus per-run CSV profiles for plotting.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "gnls/minimizer.hpp"

namespace gnls {

inline constexpr const char* kCodeVersion = "0.1.0";

struct ExperimentSpec {
  std::string name;
  std::string graph;  // builtin corpus name or path to a graph JSON file
  std::vector<double> p_values{4.0};
  std::vector<double> mu_values{1.0};
  std::vector<double> lengths;  // length parameter grid (pendant, tadpole,
                                // double_bridge builtins only)
  std::vector<double> h_values{1e-3};
  std::vector<double> L_values{40.0};
  std::vector<std::uint64_t> seeds{0};
  std::vector<double> shifts;  // if nonempty, also tabulate the translated
                               // cutoff-soliton energy curve at these shifts
  MinimizeConfig base;         // tolerances, budgets, hybrid switch
  std::string output_dir;      // empty: $GNLS_OUT_DIR, then "."
  bool write_profiles = true;
};

struct ExperimentRecord {
  nlohmann::json record;
  std::vector<std::string> files_written;  // record path first, then CSVs
};

// Executes the grid and writes <name>.json plus per-run CSVs into the output
// directory.  Per-run failures are recorded in the JSON, not thrown.  The
// record is byte-reproducible for a fixed spec.
ExperimentRecord run_experiment(const ExperimentSpec& spec);

const std::vector<std::string>& builtin_experiment_names();
ExperimentSpec builtin_experiment(const std::string& name);

// Spec from JSON; unknown keys are rejected.
ExperimentSpec parse_experiment_spec(const nlohmann::json& j);

}  // namespace gnls
