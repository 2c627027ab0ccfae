#pragma once

#include <cstdint>
#include <string>

namespace oclopt {

enum class ScheduleKind { kConstant, kRwp, kMalr, kCyclic };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::kConstant;
  double alpha0 = 0.025;
  double reduction = 0.5;          ///< β_lr
  std::uint64_t patience = 60000;  ///< K_R, in iterations
  double epsilon = 0.03;           ///< C3 threshold on σ
  double tolerance = 1e-6;         ///< strict-improvement margin
  bool use_c2 = true;              ///< MALR ablations
  bool use_c3 = true;

  void validate() const;
};

/// Bits of the fired-conditions mask reported per update.
enum ScheduleFlag : unsigned {
  kC1 = 1u << 0,
  kC2 = 1u << 1,
  kC3 = 1u << 2,
  kReduced = 1u << 3,
};

/// Plateau-driven learning-rate controller. Updates are expected at
/// validation events only; patience is still measured in iterations.
class Schedule {
 public:
  explicit Schedule(ScheduleConfig config);

  const ScheduleConfig& config() const { return config_; }
  double alpha() const { return alpha_; }
  int reductions() const { return reductions_; }

  /// Reduce-when-plateau: α ← β·α once val_perf (higher is better) has not
  /// improved for K_R iterations. Returns the ScheduleFlag mask.
  unsigned rwp_update(double val_perf, std::uint64_t k);
  /// MALR: reduce only when C1 (val_perf plateau), C2 (σ plateau) and
  /// C3 (σ > ε) all hold; disabled conditions count as satisfied.
  unsigned malr_update(double val_perf, double sigma, std::uint64_t k);
  /// Dispatches on kind; constant and cyclic ignore the signal.
  unsigned update(double val_perf, double sigma, std::uint64_t k);

  // Tracker state, exposed for checkpoints and diagnostics.
  double best_val() const { return best_val_; }
  double best_sigma() const { return best_sigma_; }
  std::uint64_t last_val_improvement() const { return val_since_; }
  std::uint64_t last_sigma_improvement() const { return sigma_since_; }

 private:
  bool track_val(double v, std::uint64_t k);
  bool track_sigma(double s, std::uint64_t k);
  void reduce(double v, double s, std::uint64_t k);

  ScheduleConfig config_;
  double alpha_;
  int reductions_ = 0;
  bool have_val_ = false;
  bool have_sigma_ = false;
  double best_val_ = 0.0;
  double best_sigma_ = 0.0;
  std::uint64_t val_since_ = 0;
  std::uint64_t sigma_since_ = 0;
};

/// σ_k = val_perf(MA) − val_perf(SGD), both higher-is-better.
double sigma(double val_perf_ma, double val_perf_sgd);

/// Per-task cosine: ½α₀(1 + cos(π·k/task_length)) for 0 ≤ k < task_length.
double cyclic_lr(double alpha0, std::uint64_t k_within_task, std::uint64_t task_length);

}  // namespace oclopt
