#include "oclopt/harness.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "oclopt/errors.hpp"
#include "oclopt/protocol.hpp"
#include "oclopt/rng.hpp"

namespace oclopt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t iterations_at(std::uint64_t t, double p) {
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(t) * p + 1e-9));
}

class OclLearner : public Learner {
 public:
  OclLearner(const ExperimentConfig& cfg, const Stream& stream, ModelSpec spec, std::uint64_t seed,
             const std::vector<double>* replay_alpha, RunResult& out)
      : cfg_(cfg),
        stream_(stream),
        spec_(std::move(spec)),
        replay_alpha_(replay_alpha),
        out_(out),
        schedule_(cfg.schedule),
        replay_rng_(seed, Purpose::kReplay),
        val_rng_(seed, Purpose::kValidation),
        val_tag_(cfg.split_holdout ? RecordTag::kValidation : RecordTag::kTrain) {
    ParamVector theta0 = init_params(spec_, seed);
    if (cfg.optimizer == BaseOptimizer::kAdam) {
      adam_ = make_adam(theta0);
    } else {
      sgd_ = make_sgd(theta0, cfg.momentum);
    }
    if (cfg.averaging == Averaging::kAma) ama_ = make_ama(theta0, cfg.ama);
    if (cfg.averaging == Averaging::kEma) ema_ = make_ema(theta0, cfg.ema_gamma, cfg.ama.update_interval);
  }

  std::vector<Eigen::VectorXd> predict(std::span<const Eigen::VectorXd> inputs) const override {
    std::vector<Eigen::VectorXd> out;
    out.reserve(inputs.size());
    const ParamVector& theta = inference();
    for (const auto& x : inputs) out.push_back(output(spec_, theta, x));
    return out;
  }

  void learn(const DataPool& pool, const HoldoutPool& holdout, const StreamBatch& batch,
             std::span<const std::size_t> current_train) override {
    const std::uint64_t t = batch.t;
    const std::uint64_t count = iterations_at(t, cfg_.iterations_per_step) - iterations_at(t - 1, cfg_.iterations_per_step);
    const auto m = static_cast<std::size_t>(cfg_.minibatch);
    for (std::uint64_t i = 0; i < count; ++i) {
      if (pool.empty()) return;
      const Minibatch mb = cfg_.replay == ReplayMode::kPure
                               ? sample_pure_replay(pool, m, replay_rng_)
                               : sample_mixed_replay(pool, batch, current_train, m, cfg_.window, replay_rng_);
      const std::uint64_t k = ++k_;
      const double alpha = current_alpha(t, k);
      const LossGrad lg = loss_and_grad(spec_, theta(), mb);
      ++out_.ops.forward;
      ++out_.ops.gradient;
      if (adam_) {
        adam_step(*adam_, lg.grad, alpha);
      } else {
        sgd_step(*sgd_, lg.grad, alpha);
      }
      ++out_.ops.update;
      out_.alpha_trace.push_back(alpha);

      std::optional<Scorer> scorer;
      double ma_perf = kNaN;
      if (ema_ && ema_step(*ema_, theta(), k)) ++out_.ops.update;
      if (ama_) {
        AmaEvents ev = ama_step(*ama_, theta(), k, [&]() { return make_scorer(holdout, t); });
        if (ev.ma_updated) out_.ops.update += 2;
        if (ev.validated) {
          out_.ops.forward += 2;
          scorer = std::move(ev.scorer);
          ma_perf = ev.i_best == 1 ? ev.acc1 : ev.acc2;
        }
      } else if (k % cfg_.ama.validation_interval == 0) {
        scorer = make_scorer(holdout, t);
      }

      if (scorer && k % cfg_.ama.validation_interval == 0) validate(*scorer, ma_perf, k);

      const bool window_reset = cfg_.averaging != Averaging::kAma || cfg_.ama.adapt;
      if (window_reset && k % cfg_.ama.weight_interval == 0) {
        sgd_mean_.reset();
        ema_mean_.reset();
      }
    }
  }

  const ParamVector& inference() const {
    if (ama_) return best_ma(*ama_);
    if (ema_) return ema_->ma;
    return adam_ ? adam_->theta : sgd_->theta;
  }

  std::uint64_t iterations() const { return k_; }
  double alpha_now() const { return out_.alpha_trace.empty() ? schedule_.alpha() : out_.alpha_trace.back(); }
  double last_sigma() const { return last_sigma_; }
  const Schedule& schedule() const { return schedule_; }
  const std::optional<AmaState>& ama() const { return ama_; }
  const std::optional<EmaState>& ema() const { return ema_; }

  std::string checkpoint() const {
    std::ostringstream os;
    os << "iteration " << k_ << "\n";
    if (adam_) {
      save(os, *adam_);
    } else {
      save(os, *sgd_);
    }
    if (ama_) save(os, *ama_);
    if (ema_) os << "ema_gamma " << std::hexfloat << ema_->gamma << std::defaultfloat << "\n";
    return os.str();
  }

 private:
  ParamVector& theta() { return adam_ ? adam_->theta : sgd_->theta; }

  double current_alpha(std::uint64_t t, std::uint64_t k) const {
    if (replay_alpha_) {
      if (replay_alpha_->empty()) return cfg_.schedule.alpha0;
      return k <= replay_alpha_->size() ? (*replay_alpha_)[k - 1] : replay_alpha_->back();
    }
    if (cfg_.schedule.kind == ScheduleKind::kCyclic) {
      const std::uint64_t len = stream_.spec().piecewise.task_length;
      return cyclic_lr(cfg_.schedule.alpha0, (t - 1) % len, len);
    }
    return schedule_.alpha();
  }

  std::optional<Scorer> make_scorer(const HoldoutPool& holdout, std::uint64_t t) {
    auto mb = std::make_shared<Minibatch>(
        sample_holdout(holdout, t, static_cast<std::size_t>(cfg_.minibatch), val_rng_, val_tag_));
    if (mb->empty()) return std::nullopt;
    const ModelSpec* spec = &spec_;
    return Scorer([spec, mb](const ParamVector& th) { return performance(*spec, th, *mb); });
  }

  void validate(const Scorer& scorer, double ma_perf, std::uint64_t k) {
    sgd_mean_ = online_validation(sgd_mean_, scorer(theta()));
    ++out_.ops.forward;
    if (ema_) {
      ema_mean_ = online_validation(ema_mean_, scorer(ema_->ma));
      ++out_.ops.forward;
      ma_perf = ema_mean_.value;
    }
    const bool has_ma = ama_ || ema_;
    const double val_perf = has_ma ? ma_perf : sgd_mean_.value;
    const double s = has_ma ? sigma(ma_perf, sgd_mean_.value) : kNaN;
    last_sigma_ = s;
    unsigned flags = 0;
    if (!replay_alpha_ && (cfg_.schedule.kind == ScheduleKind::kRwp || cfg_.schedule.kind == ScheduleKind::kMalr))
      flags = schedule_.update(val_perf, has_ma ? s : 0.0, k);
    out_.schedule.push_back({k, current_alpha_after(k), s, val_perf, flags});
  }

  double current_alpha_after(std::uint64_t k) const {
    if (replay_alpha_ || cfg_.schedule.kind == ScheduleKind::kCyclic) return out_.alpha_trace.back();
    (void)k;
    return schedule_.alpha();
  }

  const ExperimentConfig& cfg_;
  const Stream& stream_;
  ModelSpec spec_;
  const std::vector<double>* replay_alpha_;
  RunResult& out_;
  Schedule schedule_;
  CounterRng replay_rng_;
  CounterRng val_rng_;
  RecordTag val_tag_;
  std::optional<SgdState> sgd_;
  std::optional<AdamState> adam_;
  std::optional<AmaState> ama_;
  std::optional<EmaState> ema_;
  RunningMean sgd_mean_;
  RunningMean ema_mean_;
  std::uint64_t k_ = 0;
  double last_sigma_ = kNaN;
};

}  // namespace

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed, const std::vector<double>* replay_alpha) {
  cfg.validate();
  if (!cfg.arms.empty()) throw ConfigError("run_single expects an expanded arm");
  if (!cfg.replay_arm.empty() && !replay_alpha) throw ConfigError("schedule replay needs the trace of arm '" + cfg.replay_arm + "'");
  StreamSpec ss = cfg.stream;
  ss.seed = cfg.stream.seed + seed;
  const Stream stream(ss);
  const ModelSpec spec = cfg.model_spec(stream);
  DataPool pool(cfg.capacity == 0 ? DataPool::kUnlimited : static_cast<std::size_t>(cfg.capacity), seed);
  HoldoutPool holdout(cfg.holdout_fraction, seed, cfg.split_holdout);
  Protocol env(stream, pool, holdout);

  RunResult out;
  out.arm = cfg.name;
  out.seed = seed;
  OclLearner learner(cfg, stream, spec, seed, replay_alpha, out);
  MetricLedger ledger;
  const std::uint64_t horizon = ss.horizon;
  const auto [k1, k2] = forward_window(horizon, cfg.ft_k1, cfg.ft_k2);
  const FutureHoldout future = [&stream, &cfg](std::uint64_t step) {
    return stream.evaluation_batch(step, cfg.eval_per_step);
  };
  const RecordTag eval_tag = cfg.split_holdout ? RecordTag::kEvaluation : RecordTag::kTrain;
  const std::uint64_t ft_last = horizon > k2 ? horizon - k2 : 0;
  out.final_ft = kNaN;
  out.final_ir = kNaN;
  out.final_le = kNaN;

  try {
    for (std::uint64_t t = 1; t <= horizon; ++t) {
      StepResult r = env.run_step(learner, t);
      ledger.record_step(t, performance_from_outputs(spec, r.predictions, r.batch.examples));
      out.step_perf.push_back(ledger.step_perf(t));
      out.ops_trace.push_back(out.ops);
      out.iteration_trace.push_back(learner.iterations());
      const bool record = t % cfg.record_every == 0 || t == horizon;
      if (t == ft_last) out.final_ft = forward_transfer(spec, learner.inference(), future, t, k1, k2, horizon);
      if (!record) continue;
      MetricRow row;
      row.t = t;
      row.k = learner.iterations();
      row.le = t >= 2 ? learning_efficacy(ledger, t - 1) : kNaN;
      row.ir = holdout.count_until(t) > 0 ? information_retention(spec, learner.inference(), holdout, t, eval_tag) : kNaN;
      row.ft = t + k2 <= horizon ? (t == ft_last ? out.final_ft
                                                  : forward_transfer(spec, learner.inference(), future, t, k1, k2, horizon))
                                 : kNaN;
      row.alpha = learner.alpha_now();
      row.sigma = learner.last_sigma();
      if (learner.ama()) {
        row.gamma1 = learner.ama()->gamma1;
        row.gamma2 = learner.ama()->gamma2;
        row.i_best = learner.ama()->i_best;
      } else if (learner.ema()) {
        row.gamma1 = learner.ema()->gamma;
        row.gamma2 = kNaN;
      } else {
        row.gamma1 = kNaN;
        row.gamma2 = kNaN;
      }
      out.metrics.push_back(row);
    }
  } catch (const DivergenceError& e) {
    out.diverged = true;
    out.error = e.what();
  } catch (const EmptyPoolError& e) {
    out.diverged = true;
    out.error = e.what();
  }
  out.iterations = learner.iterations();
  out.reductions = learner.schedule().reductions();
  if (!out.diverged) {
    if (horizon >= 2) out.final_le = learning_efficacy(ledger, horizon - 1);
    if (!out.metrics.empty()) out.final_ir = out.metrics.back().ir;
  }
  out.checkpoint = learner.checkpoint();
  return out;
}

std::vector<double> ExperimentResult::finals(const std::string& arm, const std::string& metric) const {
  auto it = runs.find(arm);
  if (it == runs.end()) throw ConfigError("no arm named '" + arm + "'");
  std::vector<double> out;
  for (const auto& r : it->second) {
    if (metric == "le") {
      out.push_back(r.final_le);
    } else if (metric == "ir") {
      out.push_back(r.final_ir);
    } else if (metric == "ft") {
      out.push_back(r.final_ft);
    } else {
      throw ConfigError("unknown metric '" + metric + "' (le, ir, ft)");
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto arms = expand_arms(config);
  for (const auto& a : arms) a.validate();
  ExperimentResult res;
  res.name = config.name;
  res.seeds = config.seeds;
  for (const auto& a : arms) res.arms.push_back(a.name);
  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    for (const auto& a : arms) {
      const std::vector<double>* replay = nullptr;
      if (!a.replay_arm.empty()) {
        auto it = res.runs.find(a.replay_arm);
        if (it == res.runs.end() || it->second.size() <= s)
          throw ConfigError("arm '" + a.name + "' replays '" + a.replay_arm + "', which must be declared earlier");
        replay = &it->second[s].alpha_trace;
      }
      res.runs[a.name].push_back(run_single(a, config.seeds[s], replay));
    }
  }
  return res;
}

TrackingResult run_tracking(const TrackingConfig& cfg) {
  if (cfg.stream.kind != StreamKind::kDriftingQuadratic) throw ConfigError("tracking needs the drifting-quadratic stream");
  cfg.ama.validate();
  StreamSpec ss = cfg.stream;
  ss.seed = cfg.stream.seed + cfg.seed;
  const Stream stream(ss);
  const ModelSpec spec = model_for_stream(ModelKind::kQuadraticProbe, stream);
  SgdState sgd = make_sgd(zeros_like(spec), cfg.momentum);
  AmaState ama = make_ama(sgd.theta, cfg.ama);
  RunningMean sgd_mean;
  TrackingResult out;
  double alpha = cfg.alpha;
  std::uint64_t counted = 0;
  for (std::uint64_t k = 1; k <= ss.horizon; ++k) {
    if (cfg.cut_at != 0 && k == cfg.cut_at) alpha *= cfg.cut_factor;
    const StreamBatch batch = stream.next_batch(k);
    const LossGrad lg = loss_and_grad(spec, sgd.theta, batch.examples);
    sgd_step(sgd, lg.grad, alpha);
    std::optional<Scorer> scorer;
    const AmaEvents ev = ama_step(ama, sgd.theta, k, [&]() -> std::optional<Scorer> {
      auto data = std::make_shared<std::vector<Example>>(stream.evaluation_batch(k, ss.batch_size));
      return Scorer([&spec, data](const ParamVector& th) { return performance(spec, th, as_minibatch(*data)); });
    });
    if (ev.validated) {
      sgd_mean = online_validation(sgd_mean, (*ev.scorer)(sgd.theta));
      out.sigma_k.push_back(k);
      out.sigma.push_back(sigma(ev.i_best == 1 ? ev.acc1 : ev.acc2, sgd_mean.value));
    }
    if (cfg.ama.adapt && k % cfg.ama.weight_interval == 0) sgd_mean.reset();
    if (k > cfg.burn_in) {
      const Eigen::VectorXd c = stream.center(k);
      out.sgd_distance += (sgd.theta.values - c).norm();
      out.ma_distance += (best_ma(ama).values - c).norm();
      ++counted;
    }
  }
  if (counted > 0) {
    out.sgd_distance /= static_cast<double>(counted);
    out.ma_distance /= static_cast<double>(counted);
  }
  return out;
}

}  // namespace oclopt
