#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>

#include <Eigen/Dense>

#include "oclopt/model.hpp"

namespace oclopt {

/// Heavy-ball SGD: buffer ← β·buffer + g; θ ← θ − α·buffer.
struct SgdState {
  ParamVector theta;
  Eigen::VectorXd momentum_buffer;
  double momentum = 0.9;
  double alpha = 0.0;  ///< learning rate of the most recent step
};

SgdState make_sgd(ParamVector theta, double momentum);
void sgd_step(SgdState& state, const Eigen::VectorXd& grad, double alpha);

struct AdamState {
  ParamVector theta;
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  double alpha = 0.0;
};

AdamState make_adam(ParamVector theta, double beta1 = 0.9, double beta2 = 0.999,
                    double epsilon = 1e-8);
/// Bias-corrected Adam step.
void adam_step(AdamState& state, const Eigen::VectorXd& grad, double alpha);

/// θ^MA ← γ·θ^MA + (1 − γ)·θ, elementwise. γ ∈ {0, 1} are exact copies /
/// no-ops. Throws ConfigError for γ outside [0, 1].
void ma_update(Eigen::VectorXd& ma, double gamma, const Eigen::VectorXd& theta);

/// Exponential moving average with a constant weight, updated every
/// `update_interval` iterations.
struct EmaState {
  ParamVector ma;
  double gamma = 0.99;
  std::uint64_t update_interval = 1;
};

EmaState make_ema(const ParamVector& theta0, double gamma, std::uint64_t update_interval);
/// Returns true if the MA model was updated at iteration k.
bool ema_step(EmaState& state, const ParamVector& theta, std::uint64_t k);

struct AmaConfig {
  double gamma0 = 0.99;
  double delta = 5.0;
  std::uint64_t weight_interval = 10000;  ///< K_W
  std::uint64_t update_interval = 10;     ///< K_M
  std::uint64_t validation_interval = 20; ///< K_V
  bool adapt = true;                      ///< false: skip the K_W block entirely

  void validate() const;
};

/// Two-member population of moving averages with online validation.
struct AmaState {
  ParamVector ma1;
  ParamVector ma2;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double acc1 = 0.0;
  double acc2 = 0.0;
  std::uint64_t n = 0;  ///< validation folds since the last K_W reset
  int i_best = 1;
  AmaConfig config;
};

AmaState make_ama(const ParamVector& theta0, const AmaConfig& config);

/// Scores a parameter vector on one fixed validation minibatch
/// (higher is better).
using Scorer = std::function<double(const ParamVector&)>;
/// Produces the scorer for the current K_V event, or nothing when no
/// validation data is available yet.
using ValidationSource = std::function<std::optional<Scorer>()>;

struct AmaEvents {
  bool ma_updated = false;
  bool validated = false;
  bool validation_skipped = false;  ///< K_V boundary with an empty source
  bool adapted = false;
  std::optional<Scorer> scorer;     ///< the scorer used at this K_V event
  // Running means and best member right after the K_V fold, before any
  // K_W reset in the same iteration.
  double acc1 = 0.0;
  double acc2 = 0.0;
  int i_best = 1;
};

/// One iteration of the moving-average bookkeeping for global iteration
/// k ≥ 1, given the freshly updated SGD parameters.
AmaEvents ama_step(AmaState& state, const ParamVector& sgd_theta, std::uint64_t k,
                   const ValidationSource& validation);

/// θ^MA of the currently best population member.
const ParamVector& best_ma(const AmaState& state);

// Text checkpoints. Reals are written as hex floats, so a save/load round
// trip is exact.
void save(std::ostream& out, const SgdState& state);
void save(std::ostream& out, const AdamState& state);
void save(std::ostream& out, const AmaState& state);
SgdState load_sgd(std::istream& in, std::shared_ptr<const Layout> layout);
AdamState load_adam(std::istream& in, std::shared_ptr<const Layout> layout);
AmaState load_ama(std::istream& in, std::shared_ptr<const Layout> layout);

}  // namespace oclopt
