#include "oclopt/theory.hpp"

#include <algorithm>
#include <cmath>

#include "oclopt/errors.hpp"
#include "oclopt/rng.hpp"
#include "oclopt/schedule.hpp"

namespace oclopt {

namespace {

void check_inputs(const BoundInputs& in, std::size_t k) {
  if (!(in.lipschitz >= 0.0)) throw PreconditionError("A1", "Lipschitz constant must be >= 0");
  if (!(in.rho >= 0.0)) throw PreconditionError("A3", "noise bound must be >= 0");
  if (in.alpha.size() <= k) throw PreconditionError("schedule", "need alpha_1 .. alpha_{k+1}");
  if (in.expected_loss.size() <= k) throw PreconditionError("T1", "need E[l_{k+2}(theta_{k+1})]");
  for (std::size_t j = 0; j <= k; ++j) {
    const double a = in.alpha[j];
    if (!(a > 0.0)) throw PreconditionError("schedule", "alpha_k must be > 0");
    if (!(a < in.lipschitz / 2.0))
      throw PreconditionError("alpha_k < L/2", "alpha_" + std::to_string(j + 1) + " = " +
                                                   std::to_string(a) + " violates the step-size bound");
    if (!(2.0 * a - in.lipschitz * a * a > 0.0))
      throw PreconditionError("2*alpha_k - L*alpha_k^2 > 0",
                              "alpha_" + std::to_string(j + 1) + " gives a non-positive step weight");
  }
}

}  // namespace

BoundTerms bound_terms(const BoundInputs& in, std::size_t k) {
  check_inputs(in, k);
  if (!in.chi.empty() && in.chi.size() <= k) throw PreconditionError("A4", "need chi_1 .. chi_{k+1}");
  double denom = 0.0, sum_sq = 0.0, sum_chi = 0.0;
  for (std::size_t j = 0; j <= k; ++j) {
    const double a = in.alpha[j];
    denom += 2.0 * a - in.lipschitz * a * a;
    sum_sq += a * a;
    if (!in.chi.empty()) {
      if (!(in.chi[j] >= 0.0)) throw PreconditionError("A4", "chi_k must be >= 0");
      sum_chi += in.chi[j];
    }
  }
  if (!(denom > 0.0)) throw PreconditionError("denominator", "sum of step weights must be > 0");
  BoundTerms out;
  out.denominator = denom;
  out.t1 = 2.0 * (in.initial_loss - in.expected_loss[k]) / denom;
  out.t2 = in.lipschitz * in.rho * in.rho * sum_sq / denom;
  out.t3 = 2.0 * sum_chi / denom;
  return out;
}

BoundTerms stationary_terms(const BoundInputs& in, std::size_t k) {
  check_inputs(in, k);
  BoundTerms out;
  double num2 = 0.0;
  for (std::size_t j = 0; j <= k; ++j) {
    const double a = in.alpha[j];
    out.denominator += a * (2.0 - in.lipschitz * a);
    num2 += a * a;
  }
  out.t1 = 2.0 * (in.initial_loss - in.expected_loss[k]) / out.denominator;
  out.t2 = in.lipschitz * in.rho * in.rho * num2 / out.denominator;
  out.t3 = 0.0;
  return out;
}

std::string to_string(TheoryScheduleKind kind) {
  switch (kind) {
    case TheoryScheduleKind::kConstant:
      return "constant";
    case TheoryScheduleKind::kInverseSqrt:
      return "inv-sqrt";
    case TheoryScheduleKind::kStepDecay:
      return "step-decay";
    case TheoryScheduleKind::kRwp:
      return "rwp";
  }
  return "unknown";
}

TheoryScheduleKind theory_schedule_from_string(const std::string& name) {
  if (name == "constant") return TheoryScheduleKind::kConstant;
  if (name == "inv-sqrt") return TheoryScheduleKind::kInverseSqrt;
  if (name == "step-decay") return TheoryScheduleKind::kStepDecay;
  if (name == "rwp") return TheoryScheduleKind::kRwp;
  throw ConfigError("unknown theory schedule '" + name + "'");
}

namespace {

/// Mean of `batch` noise draws ξ ~ U[-a, a]^d.
Eigen::VectorXd mean_noise(CounterRng& rng, int d, int batch, double half_width) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  if (half_width == 0.0) return acc;
  for (int b = 0; b < batch; ++b)
    for (int i = 0; i < d; ++i) acc[i] += rng.uniform(-half_width, half_width);
  return acc / static_cast<double>(batch);
}

/// Stochastic gradient of l_t at θ: A(θ − c_t − ξ̄).
Eigen::VectorXd noisy_gradient(const Stream& s, const Eigen::VectorXd& theta, std::uint64_t t,
                               CounterRng& rng) {
  const auto& spec = s.spec();
  const double a = std::sqrt(3.0) * spec.quadratic.noise_std;
  return s.curvature() * (theta - s.center(t) - mean_noise(rng, spec.d_in, spec.batch_size, a));
}

}  // namespace

std::vector<double> realize_schedule(const Stream& stream, const TheorySchedule& sch, std::size_t n,
                                     std::uint64_t pilot_seed) {
  std::vector<double> alpha(n);
  switch (sch.kind) {
    case TheoryScheduleKind::kConstant:
      std::fill(alpha.begin(), alpha.end(), sch.alpha0);
      return alpha;
    case TheoryScheduleKind::kInverseSqrt:
      // α_k = α₀/√k for k = 1, 2, ...
      for (std::size_t j = 0; j < n; ++j) alpha[j] = sch.alpha0 / std::sqrt(static_cast<double>(j + 1));
      return alpha;
    case TheoryScheduleKind::kStepDecay:
      for (std::size_t j = 0; j < n; ++j)
        alpha[j] = sch.alpha0 * std::pow(sch.reduction, static_cast<double>(j / sch.step_interval));
      return alpha;
    case TheoryScheduleKind::kRwp:
      break;
  }
  // Pilot trajectory driving a real RWP controller on the observed
  // minibatch loss; the resulting schedule is then frozen for all seeds.
  ScheduleConfig cfg;
  cfg.kind = ScheduleKind::kRwp;
  cfg.alpha0 = sch.alpha0;
  cfg.reduction = sch.reduction;
  cfg.patience = sch.patience;
  Schedule rwp(cfg);
  CounterRng rng(pilot_seed, Purpose::kTheory, 0xF11F);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(stream.spec().d_in);
  for (std::size_t j = 0; j < n; ++j) {
    alpha[j] = rwp.alpha();
    const std::uint64_t t = j + 1;
    theta -= alpha[j] * noisy_gradient(stream, theta, t, rng);
    if (t % sch.validation_interval == 0) {
      const double noise = stream.spec().quadratic.noise_std;
      CounterRng vrng(pilot_seed, Purpose::kValidation, t);
      const Eigen::VectorXd x = stream.center(t) + mean_noise(vrng, stream.spec().d_in, 1, std::sqrt(3.0) * noise);
      const Eigen::VectorXd diff = theta - x;
      rwp.rwp_update(-0.5 * diff.dot(stream.curvature() * diff), t);
    }
  }
  return alpha;
}

BoundReport verify_bound(const VerifyConfig& cfg) {
  if (cfg.stream.kind != StreamKind::kDriftingQuadratic)
    throw ConfigError("bound verification needs the drifting-quadratic stream");
  if (cfg.n_seeds < 2) throw ConfigError("bound verification needs at least 2 seeds");
  StreamSpec spec = cfg.stream;
  spec.horizon = std::max<std::uint64_t>(spec.horizon, cfg.k_max + 2);
  const Stream stream(spec);
  const QuadraticConstants constants = stream.constants();
  const std::size_t n = cfg.k_max + 1;  // iterations 1 .. k_max+1

  BoundReport report;
  report.name = cfg.name;
  report.lipschitz = constants.lipschitz;
  report.rho = constants.rho;
  report.domain_radius = constants.domain_radius;
  report.stationary = spec.quadratic.velocity == 0.0;
  report.alpha = realize_schedule(stream, cfg.schedule, n, cfg.seed ^ 0xA5A5A5A5ULL);

  BoundInputs in;
  in.lipschitz = constants.lipschitz;
  in.rho = constants.rho;
  in.alpha = report.alpha;
  in.chi.resize(n);
  for (std::size_t j = 0; j < n; ++j) in.chi[j] = stream.chi(j + 1);
  in.initial_loss = stream.quadratic_loss(Eigen::VectorXd::Zero(spec.d_in), 1);
  // Refuse to certify before spending any compute.
  {
    BoundInputs probe = in;
    probe.expected_loss.assign(n, 0.0);
    (void)bound_terms(probe, n - 1);
  }

  // Per-j sums over replicates of ‖∇l_{j+1}(θ_j)‖² and of l_{j+2}(θ_{j+1}).
  std::vector<double> g_sum(n, 0.0), g_sq(n, 0.0), l_sum(n, 0.0), l_sq(n, 0.0);
  for (int r = 0; r < cfg.n_seeds; ++r) {
    CounterRng rng(cfg.seed + static_cast<std::uint64_t>(r), Purpose::kTheory);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(spec.d_in);
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint64_t t = j + 1;
      const double g2 = stream.quadratic_gradient(theta, t).squaredNorm();
      g_sum[j] += g2;
      g_sq[j] += g2 * g2;
      theta -= report.alpha[j] * noisy_gradient(stream, theta, t, rng);
      report.max_param_norm = std::max(report.max_param_norm, theta.norm());
      const double l = stream.quadratic_loss(theta, t + 1);
      l_sum[j] += l;
      l_sq[j] += l * l;
    }
  }
  report.domain_excursion = report.max_param_norm > constants.domain_radius;

  const double reps = static_cast<double>(cfg.n_seeds);
  auto mean_se = [&](double sum, double sq) {
    const double mean = sum / reps;
    const double var = std::max(0.0, (sq - reps * mean * mean) / (reps - 1.0));
    return std::pair{mean, std::sqrt(var / reps)};
  };
  in.expected_loss.resize(n);
  std::vector<double> loss_se(n);
  for (std::size_t j = 0; j < n; ++j) std::tie(in.expected_loss[j], loss_se[j]) = mean_se(l_sum[j], l_sq[j]);

  // Checkpoints spread evenly over [0, k_max].
  const std::uint64_t n_cp = std::max<std::uint64_t>(1, cfg.n_checkpoints);
  std::vector<std::uint64_t> ks;
  for (std::uint64_t c = 1; c <= n_cp; ++c) ks.push_back(cfg.k_max * c / n_cp);

  report.all_hold = true;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_j = 0;
  std::size_t scanned = 0;
  double sum_chi = 0.0;
  for (std::uint64_t k : ks) {
    for (; scanned <= k; ++scanned) {
      const double m = g_sum[scanned] / reps;
      if (m < best) {
        best = m;
        best_j = scanned;
      }
      sum_chi += in.chi[scanned];
    }
    BoundCheckpoint cp;
    cp.k = k;
    cp.lhs = best;
    cp.argmin = best_j;
    cp.lhs_se = mean_se(g_sum[best_j], g_sq[best_j]).second;
    cp.terms = bound_terms(in, k);
    if (report.stationary) cp.terms.t3 = 0.0;
    cp.t1_se = 2.0 * loss_se[k] / cp.terms.denominator;
    cp.stationary_rhs = stationary_terms(in, k).total();
    cp.alpha = in.alpha[k];
    cp.sum_chi = sum_chi;
    const double slack = 2.0 * std::sqrt(cp.lhs_se * cp.lhs_se + cp.t1_se * cp.t1_se);
    cp.margin = cp.terms.total() + slack - cp.lhs;
    cp.holds = cp.margin >= 0.0;
    if (report.stationary) cp.holds = cp.holds && (cp.stationary_rhs + slack - cp.lhs >= 0.0);
    report.all_hold = report.all_hold && cp.holds;
    report.checkpoints.push_back(cp);
  }

  // Schedule conditions on the realized sequence: partial sums at the
  // midpoint and at the end of the run.
  auto sums_at = [&](std::size_t k) {
    double d = 0.0, s2 = 0.0, sc = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      d += 2.0 * in.alpha[j] - in.lipschitz * in.alpha[j] * in.alpha[j];
      s2 += in.alpha[j] * in.alpha[j];
      sc += in.chi[j];
    }
    return std::tuple{d, s2, sc};
  };
  auto [d1, a1, c1] = sums_at(cfg.k_max / 2);
  auto [d2, a2, c2] = sums_at(cfg.k_max);
  auto& sc = report.conditions;
  sc.denominator_first = d1;
  sc.denominator_last = d2;
  sc.noise_ratio_first = a1 / d1;
  sc.noise_ratio_last = a2 / d2;
  sc.drift_ratio_first = c1 / d1;
  sc.drift_ratio_last = c2 / d2;
  sc.denominator_growing = d2 > d1;
  sc.noise_ratio_decreasing = sc.noise_ratio_last < sc.noise_ratio_first;
  sc.drift_ratio_decreasing = sc.drift_ratio_last < sc.drift_ratio_first;
  return report;
}

}  // namespace oclopt
