#include <algorithm>
#include <fstream>

#include "oclopt/errors.hpp"
#include "oclopt/harness.hpp"

using nlohmann::json;

namespace oclopt {

namespace {

// K_W and K_R scale with the number of iterations; K_W stays a multiple of
// lcm(K_M, K_V) so every adaptation event follows a validation event.
void scale_intervals(ExperimentConfig& c, double kw_fraction = 0.02, double kr_fraction = 0.025) {
  const auto iters = static_cast<double>(c.stream.horizon) * c.iterations_per_step;
  const std::uint64_t unit = 20;
  c.ama.weight_interval = std::max<std::uint64_t>(unit, static_cast<std::uint64_t>(iters * kw_fraction) / unit * unit);
  c.schedule.patience = std::max<std::uint64_t>(unit, static_cast<std::uint64_t>(iters * kr_fraction));
}

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::uint64_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

ExperimentConfig rotating_base() {
  ExperimentConfig c;
  c.stream.kind = StreamKind::kRotatingGaussian;
  c.stream.d_in = 4;
  c.stream.n_classes = 4;
  c.stream.batch_size = 16;
  c.stream.horizon = 2000;
  c.stream.rotating.angular_velocity = 0.001;
  c.stream.rotating.mean_scale = 2.0;
  c.stream.rotating.noise_std = 1.0;
  c.model = ModelKind::kLinearSoftmax;
  c.weight_decay = 1e-4;
  c.momentum = 0.9;
  c.schedule.alpha0 = 0.025;
  c.schedule.epsilon = 0.03;
  c.schedule.reduction = 0.5;
  c.minibatch = 16;
  c.iterations_per_step = 1.0;
  c.seeds = seed_range(20);
  c.record_every = 50;
  scale_intervals(c);
  return c;
}

ExperimentConfig piecewise_base(bool cyclic) {
  ExperimentConfig c;
  c.stream.kind = StreamKind::kPiecewiseTask;
  c.stream.d_in = 8;
  c.stream.piecewise.n_tasks = 5;
  c.stream.piecewise.classes_per_task = 2;
  c.stream.n_classes = 10;
  c.stream.piecewise.task_length = cyclic ? 40 : 400;
  c.stream.piecewise.cyclic = cyclic;
  c.stream.piecewise.mean_scale = 2.0;
  c.stream.piecewise.noise_std = 1.0;
  c.stream.batch_size = 16;
  c.stream.horizon = 2000;
  c.model = ModelKind::kLinearSoftmax;
  c.weight_decay = 1e-4;
  c.momentum = 0.9;
  c.schedule.alpha0 = 0.025;
  c.minibatch = 16;
  c.seeds = seed_range(20);
  c.record_every = 50;
  scale_intervals(c);
  return c;
}

// Cyclic 40-class task stream whose horizon is short enough that one
// iteration per step leaves the model under-trained.
ExperimentConfig compute_limited_base() {
  ExperimentConfig c = piecewise_base(true);
  c.stream.d_in = 32;
  c.stream.piecewise.n_tasks = 10;
  c.stream.piecewise.classes_per_task = 4;
  c.stream.n_classes = 40;
  c.stream.piecewise.task_length = 20;
  c.stream.piecewise.mean_scale = 3.0;
  c.stream.horizon = 400;
  scale_intervals(c);
  return c;
}

json ama_malr() { return {{"optimizer.averaging", "ama"}, {"schedule.kind", "malr"}}; }
json ama_rwp() { return {{"optimizer.averaging", "ama"}, {"schedule.kind", "rwp"}}; }
json sgd_rwp() { return {{"optimizer.averaging", "none"}, {"schedule.kind", "rwp"}}; }

}  // namespace

std::vector<std::string> preset_names() {
  return {"main-comparison", "malr-ablation", "ama-vs-ema",    "batch-size",    "buffer-size",
          "objective-comparison", "adam-base", "task-cyclic", "theory-verify"};
}

ExperimentConfig preset(const std::string& name) {
  if (name == "main-comparison") {
    ExperimentConfig c = rotating_base();
    c.name = name;
    c.arms = {{"sgd-rwp", sgd_rwp()}, {"ama-rwp", ama_rwp()}, {"ama-malr", ama_malr()}};
    c.output_dir = "runs/" + name;
    return c;
  }
  if (name == "malr-ablation") {
    ExperimentConfig c = piecewise_base(false);
    c.name = name;
    json no_c2 = ama_malr(), no_c3 = ama_malr();
    no_c2["schedule.use_c2"] = false;
    no_c3["schedule.use_c3"] = false;
    c.arms = {{"ama-malr", ama_malr()}, {"no-c2", no_c2}, {"no-c3", no_c3}, {"ama-rwp", ama_rwp()}};
    c.output_dir = "runs/" + name;
    return c;
  }
  if (name == "ama-vs-ema") {
    ExperimentConfig c = rotating_base();
    c.name = name;
    c.arms = {{"ama-malr", ama_malr()},
              {"ema", {{"optimizer.averaging", "ema"}, {"schedule.kind", "malr"}, {"schedule.replay_arm", "ama-malr"}}}};
    c.output_dir = "runs/" + name;
    return c;
  }
  if (name == "batch-size") {
    // m grows by 2x per arm while p shrinks and α grows by the same factor.
    // Runs on the compute-limited task stream of objective-comparison with a
    // hidden layer; a linear model follows the linear scaling rule exactly.
    ExperimentConfig c = compute_limited_base();
    c.name = name;
    c.model = ModelKind::kMlp;
    c.hidden = 32;
    c.averaging = Averaging::kAma;
    c.schedule.kind = ScheduleKind::kConstant;
    const double p0 = 4.0;
    for (int i = 0; i < 4; ++i) {
      const int m = 16 << i;
      c.arms.push_back({"m" + std::to_string(m),
                        {{"replay.minibatch", m},
                         {"replay.iterations_per_step", p0 / (1 << i)},
                         {"schedule.alpha0", c.schedule.alpha0 * (1 << i)}}});
    }
    c.output_dir = "runs/" + name;
    return c;
  }
  if (name == "buffer-size") {
    ExperimentConfig c = piecewise_base(false);
    c.name = name;
    c.averaging = Averaging::kAma;
    c.schedule.kind = ScheduleKind::kMalr;
    for (std::uint64_t cap : {100u, 1000u, 10000u})
      c.arms.push_back({"cap" + std::to_string(cap), {{"replay.capacity", cap}}});
    c.output_dir = "runs/" + name;
    return c;
  }
  if (name == "objective-comparison") {
    // Pure replay uses twice the minibatch of mixed replay so each stored
    // item receives the same number of gradient steps on average. The
    // horizon is short enough that p = 1 is compute-limited.
    ExperimentConfig c = compute_limited_base();
    c.name = name;
    for (int p : {1, 5}) {
      const json scaled = {{"replay.iterations_per_step", p},
                           {"optimizer.ama.weight_interval", c.ama.weight_interval * p},
                           {"schedule.patience", c.schedule.patience * p}};
      json pure = {{"replay.mode", "pure"}, {"replay.minibatch", 32}, {"optimizer.averaging", "ama"}, {"schedule.kind", "malr"}};
      json mixed = {{"replay.mode", "mixed"},
                    {"replay.minibatch", 16},
                    {"optimizer.averaging", "none"},
                    {"schedule.kind", "constant"},
                    {"schedule.alpha0", 2.0 * c.schedule.alpha0}};
      pure.update(scaled);
      mixed.update(scaled);
      c.arms.push_back({"pure-p" + std::to_string(p), pure});
      c.arms.push_back({"mixed-p" + std::to_string(p), mixed});
    }
    c.output_dir = "runs/" + name;
    return c;
  }
  if (name == "adam-base") {
    ExperimentConfig c = rotating_base();
    c.name = name;
    c.optimizer = BaseOptimizer::kAdam;
    c.schedule.alpha0 = 0.005;
    c.arms = {{"adam-rwp", sgd_rwp()}, {"adam-ama-malr", ama_malr()}};
    c.output_dir = "runs/" + name;
    return c;
  }
  if (name == "task-cyclic") {
    ExperimentConfig c = piecewise_base(false);
    c.name = name;
    c.arms = {{"sgd-cyclic", {{"optimizer.averaging", "none"}, {"schedule.kind", "cyclic"}}},
              {"sgd-rwp", sgd_rwp()},
              {"ama-malr", ama_malr()}};
    c.output_dir = "runs/" + name;
    return c;
  }
  if (name == "theory-verify") {
    // Experiment-runner view of the bound-verification stream; the bound
    // checks themselves come from theory_presets().
    ExperimentConfig c;
    c.name = name;
    c.stream.kind = StreamKind::kDriftingQuadratic;
    c.stream.d_in = 10;
    c.stream.batch_size = 4;
    c.stream.horizon = 4000;
    c.stream.quadratic.velocity = 1e-3;
    c.model = ModelKind::kQuadraticProbe;
    c.weight_decay = 0.0;
    c.momentum = 0.0;
    c.replay = ReplayMode::kMixed;
    c.window = 1;
    c.minibatch = 4;
    c.schedule.alpha0 = 0.1;
    c.seeds = seed_range(20);
    scale_intervals(c);
    c.output_dir = "runs/" + name;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<VerifyConfig> theory_presets() {
  auto make = [](const std::string& name, double velocity, TheoryScheduleKind kind, double alpha0) {
    VerifyConfig v;
    v.name = name;
    v.stream.kind = StreamKind::kDriftingQuadratic;
    v.stream.d_in = 10;
    v.stream.batch_size = 4;
    v.stream.horizon = 4002;
    v.stream.seed = 7;
    v.stream.quadratic.velocity = velocity;
    v.schedule.kind = kind;
    v.schedule.alpha0 = alpha0;
    v.schedule.step_interval = 500;
    v.schedule.patience = 200;
    v.schedule.validation_interval = 20;
    v.k_max = 4000;
    v.n_seeds = 20;
    v.n_checkpoints = 20;
    return v;
  };
  return {make("stationary-constant", 0.0, TheoryScheduleKind::kConstant, 0.1),
          make("stationary-inv-sqrt", 0.0, TheoryScheduleKind::kInverseSqrt, 0.2),
          make("drift-constant", 1e-3, TheoryScheduleKind::kConstant, 0.1),
          make("drift-inv-sqrt", 1e-3, TheoryScheduleKind::kInverseSqrt, 0.2),
          make("drift-step-decay", 1e-3, TheoryScheduleKind::kStepDecay, 0.2),
          make("drift-rwp", 1e-3, TheoryScheduleKind::kRwp, 0.1),
          [&] {
            VerifyConfig v = make("fast-drift-constant", 3e-3, TheoryScheduleKind::kConstant, 0.1);
            v.stream.quadratic.domain_radius = 20.0;
            return v;
          }()};
}

TrackingConfig tracking_preset() {
  TrackingConfig t;
  t.stream.kind = StreamKind::kDriftingQuadratic;
  t.stream.d_in = 10;
  t.stream.batch_size = 4;
  t.stream.horizon = 6000;
  t.stream.quadratic.velocity = 1e-3;
  t.stream.quadratic.mu = 0.05;
  t.stream.quadratic.center_norm = 3.0;
  t.alpha = 0.3;
  t.momentum = 0.0;
  t.ama.weight_interval = 400;
  t.burn_in = 200;
  t.cut_at = 4000;
  t.cut_factor = 0.1;
  return t;
}

json to_json(const VerifyConfig& v) {
  ExperimentConfig holder;
  holder.stream = v.stream;
  return {{"name", v.name},
          {"stream", to_json(holder)["stream"]},
          {"schedule",
           {{"kind", to_string(v.schedule.kind)},
            {"alpha0", v.schedule.alpha0},
            {"step_interval", v.schedule.step_interval},
            {"reduction", v.schedule.reduction},
            {"patience", v.schedule.patience},
            {"validation_interval", v.schedule.validation_interval}}},
          {"k_max", v.k_max},
          {"n_seeds", v.n_seeds},
          {"n_checkpoints", v.n_checkpoints},
          {"seed", v.seed}};
}

VerifyConfig verify_config_from_json(const json& j) {
  VerifyConfig v;
  try {
    v.name = j.value("name", v.name);
    if (j.contains("stream")) v.stream = config_from_json(json{{"stream", j["stream"]}}).stream;
    if (j.contains("schedule")) {
      const json& s = j["schedule"];
      if (s.contains("kind")) v.schedule.kind = theory_schedule_from_string(s["kind"].get<std::string>());
      v.schedule.alpha0 = s.value("alpha0", v.schedule.alpha0);
      v.schedule.step_interval = s.value("step_interval", v.schedule.step_interval);
      v.schedule.reduction = s.value("reduction", v.schedule.reduction);
      v.schedule.patience = s.value("patience", v.schedule.patience);
      v.schedule.validation_interval = s.value("validation_interval", v.schedule.validation_interval);
    }
    v.k_max = j.value("k_max", v.k_max);
    v.n_seeds = j.value("n_seeds", v.n_seeds);
    v.n_checkpoints = j.value("n_checkpoints", v.n_checkpoints);
    v.seed = j.value("seed", v.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad verify config: ") + e.what());
  }
  return v;
}

std::vector<VerifyConfig> load_verify_configs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  std::vector<VerifyConfig> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(verify_config_from_json(e));
  } else {
    out.push_back(verify_config_from_json(j));
  }
  return out;
}

void write_bound_csv(const std::string& path, const BoundReport& r) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out.precision(17);
  out << "k,lhs,lhs_se,argmin,T1,T2,T3,rhs,t1_se,stationary_rhs,alpha,sum_chi,margin,holds\n";
  for (const auto& c : r.checkpoints) {
    out << c.k << ',' << c.lhs << ',' << c.lhs_se << ',' << c.argmin << ',' << c.terms.t1 << ',' << c.terms.t2 << ','
        << c.terms.t3 << ',' << c.terms.total() << ',' << c.t1_se << ',' << c.stationary_rhs << ',' << c.alpha << ','
        << c.sum_chi << ',' << c.margin << ',' << (c.holds ? 1 : 0) << '\n';
  }
}

}  // namespace oclopt
