#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oclopt/model.hpp"
#include "oclopt/optim.hpp"
#include "oclopt/schedule.hpp"
#include "oclopt/stream.hpp"

namespace oclopt {

enum class BaseOptimizer { kSgd, kAdam };
enum class Averaging { kNone, kEma, kAma };
enum class ReplayMode { kPure, kMixed };

std::string to_string(BaseOptimizer v);
std::string to_string(Averaging v);
std::string to_string(ReplayMode v);

/// One named variant of an experiment: a JSON object whose keys are dotted
/// config paths ("schedule.kind") applied on top of the base config.
struct Arm {
  std::string name;
  nlohmann::json overrides = nlohmann::json::object();
};

struct ExperimentConfig {
  std::string name = "experiment";
  StreamSpec stream;

  ModelKind model = ModelKind::kLinearSoftmax;
  int hidden = 16;
  double weight_decay = 1e-4;
  double init_scale = 1.0;

  BaseOptimizer optimizer = BaseOptimizer::kSgd;
  double momentum = 0.9;
  Averaging averaging = Averaging::kNone;
  AmaConfig ama;
  double ema_gamma = 0.99;

  ScheduleConfig schedule;
  /// Schedule "replay": take the per-iteration α trace of this arm
  /// (same seed) instead of running a controller.
  std::string replay_arm;

  ReplayMode replay = ReplayMode::kPure;
  std::uint64_t window = 0;  ///< mixed replay B_t; 0 → t − 1
  double iterations_per_step = 1.0;  ///< p; fractional values spread evenly
  int minibatch = 16;                ///< m
  std::uint64_t capacity = 0;        ///< 0 → unlimited
  double holdout_fraction = 0.05;
  bool split_holdout = false;        ///< separate validation / evaluation tags

  std::uint64_t record_every = 50;
  double ft_k1 = 0.10;  ///< forward-transfer window, fractions of the horizon
  double ft_k2 = 0.25;
  int eval_per_step = 4;  ///< future evaluation items per step for P_FT

  std::vector<std::uint64_t> seeds = {0};
  std::vector<Arm> arms;
  std::string output_dir = "runs/experiment";

  /// Throws ConfigError when the config or a referenced module spec is
  /// inconsistent.
  void validate() const;
  ModelSpec model_spec(const Stream& stream) const;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

/// Applies "a.b.c=value" (value parsed as JSON, else taken as a string).
void apply_override(ExperimentConfig& config, const std::string& assignment);
/// Applies an object of dotted-path overrides.
void apply_overrides(ExperimentConfig& config, const nlohmann::json& overrides);

/// The base config with each arm's overrides applied; arm list cleared and
/// name set to the arm name. A config without arms yields itself.
std::vector<ExperimentConfig> expand_arms(const ExperimentConfig& config);

}  // namespace oclopt
