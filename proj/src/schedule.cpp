#include "oclopt/schedule.hpp"

#include <cmath>
#include <numbers>

#include "oclopt/errors.hpp"

namespace oclopt {

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kConstant:
      return "constant";
    case ScheduleKind::kRwp:
      return "rwp";
    case ScheduleKind::kMalr:
      return "malr";
    case ScheduleKind::kCyclic:
      return "cyclic";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "constant") return ScheduleKind::kConstant;
  if (name == "rwp") return ScheduleKind::kRwp;
  if (name == "malr") return ScheduleKind::kMalr;
  if (name == "cyclic") return ScheduleKind::kCyclic;
  throw ConfigError("unknown schedule kind '" + name + "'");
}

void ScheduleConfig::validate() const {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw ConfigError("schedule.alpha0 must be > 0");
  if (!(reduction > 0.0 && reduction < 1.0)) throw ConfigError("schedule.reduction must lie in (0, 1)");
  if (patience < 1) throw ConfigError("schedule.patience must be >= 1");
  if (!(tolerance >= 0.0)) throw ConfigError("schedule.tolerance must be >= 0");
}

Schedule::Schedule(ScheduleConfig config) : config_(config), alpha_(config.alpha0) {
  config_.validate();
}

bool Schedule::track_val(double v, std::uint64_t k) {
  if (!have_val_ || v > best_val_ + config_.tolerance) {
    best_val_ = v;
    val_since_ = k;
    have_val_ = true;
    return true;
  }
  return false;
}

bool Schedule::track_sigma(double s, std::uint64_t k) {
  if (!have_sigma_ || s > best_sigma_ + config_.tolerance) {
    best_sigma_ = s;
    sigma_since_ = k;
    have_sigma_ = true;
    return true;
  }
  return false;
}

void Schedule::reduce(double v, double s, std::uint64_t k) {
  alpha_ *= config_.reduction;
  ++reductions_;
  best_val_ = v;
  val_since_ = k;
  have_val_ = true;
  best_sigma_ = s;
  sigma_since_ = k;
}

unsigned Schedule::rwp_update(double val_perf, std::uint64_t k) {
  track_val(val_perf, k);
  unsigned flags = 0;
  if (k - val_since_ >= config_.patience) flags |= kC1;
  if (flags & kC1) {
    reduce(val_perf, best_sigma_, k);
    flags |= kReduced;
  }
  return flags;
}

unsigned Schedule::malr_update(double val_perf, double sigma_k, std::uint64_t k) {
  track_val(val_perf, k);
  track_sigma(sigma_k, k);
  unsigned flags = 0;
  if (k - val_since_ >= config_.patience) flags |= kC1;
  if (k - sigma_since_ >= config_.patience) flags |= kC2;
  if (sigma_k > config_.epsilon) flags |= kC3;
  const bool c2 = !config_.use_c2 || (flags & kC2);
  const bool c3 = !config_.use_c3 || (flags & kC3);
  if ((flags & kC1) && c2 && c3) {
    reduce(val_perf, sigma_k, k);
    flags |= kReduced;
  }
  return flags;
}

unsigned Schedule::update(double val_perf, double sigma_k, std::uint64_t k) {
  switch (config_.kind) {
    case ScheduleKind::kRwp:
      return rwp_update(val_perf, k);
    case ScheduleKind::kMalr:
      return malr_update(val_perf, sigma_k, k);
    case ScheduleKind::kConstant:
    case ScheduleKind::kCyclic:
      return 0;
  }
  return 0;
}

double sigma(double val_perf_ma, double val_perf_sgd) { return val_perf_ma - val_perf_sgd; }

double cyclic_lr(double alpha0, std::uint64_t k_within_task, std::uint64_t task_length) {
  if (task_length == 0) throw ConfigError("cyclic schedule needs a task-aware stream (task_length > 0)");
  if (k_within_task >= task_length) throw ConfigError("k_within_task outside [0, task_length)");
  const double phase = static_cast<double>(k_within_task) / static_cast<double>(task_length);
  return 0.5 * alpha0 * (1.0 + std::cos(std::numbers::pi * phase));
}

}  // namespace oclopt
