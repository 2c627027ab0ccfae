#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oclopt/stream.hpp"

namespace oclopt {

/// Inputs of the non-stationary SGD bound. Index j of `alpha` / `chi` holds
/// α_{j+1} / χ_{j+1}; index k of `expected_loss` holds E[l_{k+2}(θ_{k+1})].
struct BoundInputs {
  double lipschitz = 0.0;  ///< L (A1)
  double rho = 0.0;        ///< gradient-noise bound (A3)
  std::vector<double> alpha;
  std::vector<double> chi;
  double initial_loss = 0.0;  ///< l_1(θ_0)
  std::vector<double> expected_loss;
};

struct BoundTerms {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  double denominator = 0.0;  ///< Σ_{j≤k} (2α_{j+1} − Lα²_{j+1})

  double total() const { return t1 + t2 + t3; }
};

/// (T1, T2, T3) at horizon k. Throws PreconditionError naming the violated
/// assumption (A1/A3/A4 signs, α_k < L/2, positive step weights).
BoundTerms bound_terms(const BoundInputs& inputs, std::size_t k);

/// The stationary two-term bound (T4, T5), computed independently of
/// bound_terms; t3 is always 0.
BoundTerms stationary_terms(const BoundInputs& inputs, std::size_t k);

/// Learning-rate policy used by the bound verifier.
enum class TheoryScheduleKind { kConstant, kInverseSqrt, kStepDecay, kRwp };

std::string to_string(TheoryScheduleKind kind);
TheoryScheduleKind theory_schedule_from_string(const std::string& name);

struct TheorySchedule {
  TheoryScheduleKind kind = TheoryScheduleKind::kConstant;
  double alpha0 = 0.1;
  std::uint64_t step_interval = 1000;      ///< step decay: halve every this many iterations
  double reduction = 0.5;
  std::uint64_t patience = 500;            ///< rwp K_R
  std::uint64_t validation_interval = 20;  ///< rwp K_V
};

struct VerifyConfig {
  std::string name = "default";
  StreamSpec stream;  ///< must be a drifting quadratic; one SGD step per stream step
  TheorySchedule schedule;
  std::uint64_t k_max = 2000;
  int n_seeds = 20;
  std::uint64_t n_checkpoints = 20;
  std::uint64_t seed = 0;  ///< replicate noise seed base
};

struct BoundCheckpoint {
  std::uint64_t k = 0;
  double lhs = 0.0;     ///< min_j mean_r ‖∇l_{j+1}(θ_j)‖²
  double lhs_se = 0.0;  ///< standard error at the minimizing j
  std::uint64_t argmin = 0;
  BoundTerms terms;
  double t1_se = 0.0;
  double stationary_rhs = 0.0;  ///< T4 + T5 with the same inputs
  double alpha = 0.0;           ///< α_{k+1}
  double sum_chi = 0.0;
  double margin = 0.0;          ///< rhs + 2·se − lhs
  bool holds = false;
};

/// Asymptotic schedule conditions, evaluated on the realized schedule.
struct ScheduleConditions {
  double denominator_first = 0.0, denominator_last = 0.0;
  double noise_ratio_first = 0.0, noise_ratio_last = 0.0;  ///< Σα²/Σ(2α−Lα²)
  double drift_ratio_first = 0.0, drift_ratio_last = 0.0;  ///< Σχ/Σ(2α−Lα²)
  bool denominator_growing = false;
  bool noise_ratio_decreasing = false;
  bool drift_ratio_decreasing = false;
};

struct BoundReport {
  std::string name;
  double lipschitz = 0.0;
  double rho = 0.0;
  double domain_radius = 0.0;
  bool stationary = false;
  std::vector<double> alpha;  ///< realized α_1 .. α_{k_max+1}
  std::vector<BoundCheckpoint> checkpoints;
  ScheduleConditions conditions;
  double max_param_norm = 0.0;
  bool domain_excursion = false;
  bool all_hold = false;
};

/// Runs n_seeds SGD trajectories on l_k(θ) = ½(θ − c_k)ᵀA(θ − c_k) with
/// bounded gradient noise, estimates the left-hand side by seed averaging,
/// and evaluates T1 + T2 + T3 from the analytic constants. "Holds" means
/// lhs ≤ rhs within two combined standard errors. Throws PreconditionError
/// (refuses to certify) if the schedule violates α_k < L/2.
BoundReport verify_bound(const VerifyConfig& config);

/// Realized α_1 .. α_{n} for a deterministic schedule kind, or the RWP
/// schedule produced by a pilot trajectory (replicate seed `pilot_seed`).
std::vector<double> realize_schedule(const Stream& stream, const TheorySchedule& schedule,
                                     std::size_t n, std::uint64_t pilot_seed);

}  // namespace oclopt
