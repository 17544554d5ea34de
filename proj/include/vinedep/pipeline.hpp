#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vinedep/dynamics.hpp"
#include "vinedep/gof.hpp"
#include "vinedep/rvine.hpp"

namespace vinedep {

struct PipelineConfig {
  std::string input_path;
  std::string output_dir = ".";
  std::string model_path;  // simulate, gof, report
  std::vector<std::string> columns;
  std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
  TauMode tau_mode = TauMode::TauB;
  int truncation_level = 0;
  bool joint_refinement = false;
  std::size_t bootstrap = 100;
  std::uint64_t seed = 0;
  Eigen::Index n_simulate = 1000;
  DynamicsConfig dynamics;
};

/// 2 for data and configuration problems, 3 for fitting and test failures.
int exit_code_for(ErrorCode code);

/// Writes model.json, report.csv, report.md, tau_matrix.csv and tree_<k>.dot.
FittedVine cmd_fit(const PipelineConfig& config);
/// Writes simulated.csv.
PseudoObservations cmd_simulate(const PipelineConfig& config);
/// Refits the model's parameters on the input data, then writes gof.json.
WhiteTestResult cmd_gof(const PipelineConfig& config);
/// Writes dynamics_report.csv and dynamics_method.json.
std::vector<ChannelReport> cmd_dynamics(const PipelineConfig& config);
/// Regenerates report.csv, report.md and the DOT files from a saved model.
FittedVine cmd_report(const PipelineConfig& config);

}  // namespace vinedep
