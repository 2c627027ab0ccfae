#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oclopt/config.hpp"
#include "oclopt/metrics.hpp"
#include "oclopt/theory.hpp"

namespace oclopt {

/// Operation counts in units of one minibatch pass.
struct OpCounts {
  std::uint64_t forward = 0;   ///< c_F: training and validation forwards
  std::uint64_t gradient = 0;  ///< c_G: backward passes
  std::uint64_t update = 0;    ///< c_U: parameter-vector updates (base + MA)
};

struct MetricRow {
  std::uint64_t t = 0;
  std::uint64_t k = 0;
  double le = 0.0;  ///< P_LE(t − 1): mean of step scores 2..t
  double ir = 0.0;
  double ft = 0.0;  ///< NaN once t + k2 exceeds the horizon
  double alpha = 0.0;
  double sigma = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  int i_best = 0;
};

struct ScheduleRow {
  std::uint64_t k = 0;
  double alpha = 0.0;
  double sigma = 0.0;
  double val_perf = 0.0;
  unsigned flags = 0;
};

struct RunResult {
  std::string arm;
  std::uint64_t seed = 0;
  std::vector<MetricRow> metrics;
  std::vector<ScheduleRow> schedule;
  std::vector<double> alpha_trace;  ///< α used at iterations 1..K
  std::vector<double> step_perf;    ///< protocol step-2 score per step
  OpCounts ops;
  std::vector<OpCounts> ops_trace;  ///< cumulative counts after each step
  std::vector<std::uint64_t> iteration_trace;  ///< cumulative k after each step
  std::uint64_t iterations = 0;
  int reductions = 0;
  double final_le = 0.0;  ///< P_LE(horizon − 1)
  double final_ir = 0.0;  ///< P_IR(horizon)
  double final_ft = 0.0;  ///< P_FT at the last step with a full window
  bool diverged = false;
  std::string error;
  std::string checkpoint;  ///< optimizer state at the end of the run (text)
};

/// Runs one arm (no `arms` in `config`) for one seed. `replay_alpha` is the
/// α trace of the referenced arm when the schedule is a replay.
RunResult run_single(const ExperimentConfig& config, std::uint64_t seed,
                     const std::vector<double>* replay_alpha = nullptr);

/// All arms × seeds, arms in declaration order per seed.
struct ExperimentResult {
  std::string name;
  std::vector<std::string> arms;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::vector<RunResult>> runs;  ///< arm → per-seed results

  std::vector<double> finals(const std::string& arm, const std::string& metric) const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes per-run CSVs, checkpoints, the config echo and the manifest under
/// config.output_dir. Returns false if any run diverged.
bool write_artifacts(const ExperimentConfig& config, const ExperimentResult& result);
void write_metrics_csv(const std::string& path, const RunResult& run);
void write_schedule_csv(const std::string& path, const RunResult& run);

/// Summary table (arm × metric, mean ± se over seeds) of a run directory.
std::string report(const std::string& run_dir);

std::vector<std::string> preset_names();
/// Desk-scale recipe; throws ConfigError for unknown names.
ExperimentConfig preset(const std::string& name);
/// Bound-verification configurations behind the theory-verify preset.
std::vector<VerifyConfig> theory_presets();

/// Large-α tracking on the drifting quadratic: SGD fed one fresh batch per
/// iteration, an AMA population validated on a fresh batch of the current
/// step (performance = −loss), an optional learning-rate cut.
struct TrackingConfig {
  StreamSpec stream;
  double alpha = 0.2;
  double momentum = 0.0;
  AmaConfig ama;
  std::uint64_t cut_at = 0;  ///< iteration of an LR cut; 0 → none
  double cut_factor = 0.5;
  std::uint64_t burn_in = 100;
  std::uint64_t seed = 0;
};

struct TrackingResult {
  double sgd_distance = 0.0;  ///< time-averaged ‖θ − c_t‖ after burn-in
  double ma_distance = 0.0;   ///< same for the best MA model
  std::vector<std::uint64_t> sigma_k;
  std::vector<double> sigma;  ///< σ at every K_V event
};

TrackingResult run_tracking(const TrackingConfig& config);

}  // namespace oclopt

namespace oclopt {

/// Default large-α tracking setup used for the σ-shape and tracking checks.
TrackingConfig tracking_preset();

nlohmann::json to_json(const VerifyConfig& config);
VerifyConfig verify_config_from_json(const nlohmann::json& j);
/// A verify-bounds input file holds either one config object or a list.
std::vector<VerifyConfig> load_verify_configs(const std::string& path);
/// Per-checkpoint rows: k, lhs, lhs_se, T1, T2, T3, rhs, stationary_rhs, holds.
void write_bound_csv(const std::string& path, const BoundReport& report);

}  // namespace oclopt
