#include "vinedep/pipeline.hpp"

#include <filesystem>

#include "vinedep/io.hpp"
#include "vinedep/marginals.hpp"

namespace vinedep {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateColumn:
    case ErrorCode::InputOutOfRange:
    case ErrorCode::InvalidParameter:
    case ErrorCode::LengthMismatch:
    case ErrorCode::MalformedInput:
      return 2;
    default:
      return 3;
  }
}

namespace {

std::string out_path(const PipelineConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  return (fs::path(c.output_dir) / name).string();
}

PseudoObservations load_pseudo(const PipelineConfig& c) {
  if (c.input_path.empty()) throw Error(ErrorCode::MalformedInput, "--input is required");
  const NumericTable t = read_numeric_csv(c.input_path, c.columns);
  if (t.data.cols() < 2) throw Error(ErrorCode::MalformedInput, "at least 2 numeric columns are required");
  if (t.data.rows() < 2) throw Error(ErrorCode::MalformedInput, "at least 2 data rows are required");
  return pit_transform(t.data, t.header);
}

FittedVine load_model(const PipelineConfig& c) {
  if (c.model_path.empty()) throw Error(ErrorCode::MalformedInput, "--model is required");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(c.model_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, c.model_path + ": " + e.what());
  }
  return vine_from_json(j);
}

void write_reports(const PipelineConfig& c, const FittedVine& vine) {
  write_text(out_path(c, "report.csv"), report_csv(vine));
  write_text(out_path(c, "report.md"), report_markdown(vine));
  for (int level = 1; level < vine.dim(); ++level)
    write_text(out_path(c, "tree_" + std::to_string(level) + ".dot"), tree_dot(vine, level));
}

}  // namespace

FittedVine cmd_fit(const PipelineConfig& c) {
  const PseudoObservations u = load_pseudo(c);
  VineFitConfig fc;
  fc.families = c.families;
  fc.tau_mode = c.tau_mode;
  fc.truncation_level = c.truncation_level;
  fc.joint_refinement = c.joint_refinement;
  const FittedVine vine = fit_sequential(u, fc);
  write_text(out_path(c, "model.json"), vine_to_json(vine).dump(2) + "\n");
  write_text(out_path(c, "tau_matrix.csv"), tau_matrix_csv(tau_matrix(u, c.tau_mode)));
  write_reports(c, vine);
  return vine;
}

PseudoObservations cmd_simulate(const PipelineConfig& c) {
  if (c.n_simulate < 0) throw Error(ErrorCode::InputOutOfRange, "sample size must be non-negative");
  const FittedVine vine = load_model(c);
  PseudoObservations sim = vine_simulate(vine, c.n_simulate, derive_seed(c.seed, "simulate"));
  write_text(out_path(c, "simulated.csv"), matrix_csv(vine.names, sim.data));
  return sim;
}

WhiteTestResult cmd_gof(const PipelineConfig& c) {
  if (c.bootstrap < 20) throw Error(ErrorCode::InputOutOfRange, "--bootstrap must be at least 20");
  const FittedVine model = load_model(c);
  const PseudoObservations u = load_pseudo(c);
  if (u.cols() != model.dim()) throw Error(ErrorCode::LengthMismatch, "data columns do not match the model");
  const FittedVine vine = refit_parameters(model, u);
  const WhiteTestResult r = white_test(vine, u, c.bootstrap, derive_seed(c.seed, "gof"));
  nlohmann::json j = white_to_json(r);
  j["seed"] = c.seed;
  j["n_obs"] = u.rows();
  write_text(out_path(c, "gof.json"), j.dump(2) + "\n");
  return r;
}

std::vector<ChannelReport> cmd_dynamics(const PipelineConfig& c) {
  if (c.input_path.empty()) throw Error(ErrorCode::MalformedInput, "--input is required");
  if (!(c.dynamics.confidence > 0.0 && c.dynamics.confidence < 1.0))
    throw Error(ErrorCode::InputOutOfRange, "--confidence must lie in (0, 1)");
  if (c.dynamics.n_s < 1 || c.dynamics.n_v < 1) throw Error(ErrorCode::InputOutOfRange, "lag orders must be >= 1");
  const auto channels = read_channel_csv(c.input_path);
  const auto rows = analyse_channels(channels, c.dynamics);
  write_text(out_path(c, "dynamics_report.csv"), channel_report_csv(rows));
  const nlohmann::json method{
      {"granger", {{"n_s", c.dynamics.n_s}, {"n_v", c.dynamics.n_v}, {"intercept", c.dynamics.intercept},
                   {"views", c.dynamics.cumulative_views ? "cumulative" : "daily increments"},
                   {"confidence", c.dynamics.confidence}}},
      {"box_ljung", {{"lags", c.dynamics.ljung_lags}, {"fitted_params", c.dynamics.n_s},
                     {"adequate_if", "p > 0.05"}}},
      {"dominance", "peak periodogram power over the largest bin that is not a harmonic of the schedule frequency, dominant if > 2; the schedule frequency is the peak, or the lowest bin the peak is a harmonic of when that bin holds at least a quarter of the peak power and more than twice any power outside its harmonic family"},
      {"off_schedule_gain",
       "uploads more than 1 day from the nearest schedule tick are off schedule; score = sum of daily values over "
       "the 7 days starting on the upload day; gain = share of off-schedule uploads scoring above the median "
       "on-schedule score"},
      {"exclude_daily_uploaders", c.dynamics.exclude_daily_uploaders}};
  write_text(out_path(c, "dynamics_method.json"), method.dump(2) + "\n");
  return rows;
}

FittedVine cmd_report(const PipelineConfig& c) {
  const FittedVine vine = load_model(c);
  write_reports(c, vine);
  return vine;
}

}  // namespace vinedep
