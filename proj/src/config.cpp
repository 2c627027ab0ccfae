#include "oclopt/config.hpp"

#include <fstream>
#include <set>

#include "oclopt/errors.hpp"

namespace oclopt {

using nlohmann::json;

std::string to_string(BaseOptimizer v) { return v == BaseOptimizer::kSgd ? "sgd" : "adam"; }

std::string to_string(Averaging v) {
  switch (v) {
    case Averaging::kNone:
      return "none";
    case Averaging::kEma:
      return "ema";
    case Averaging::kAma:
      return "ama";
  }
  return "none";
}

std::string to_string(ReplayMode v) { return v == ReplayMode::kPure ? "pure" : "mixed"; }

namespace {

BaseOptimizer base_from_string(const std::string& s) {
  if (s == "sgd") return BaseOptimizer::kSgd;
  if (s == "adam") return BaseOptimizer::kAdam;
  throw ConfigError("unknown optimizer '" + s + "'");
}

Averaging averaging_from_string(const std::string& s) {
  if (s == "none") return Averaging::kNone;
  if (s == "ema") return Averaging::kEma;
  if (s == "ama") return Averaging::kAma;
  throw ConfigError("unknown averaging '" + s + "'");
}

ReplayMode replay_from_string(const std::string& s) {
  if (s == "pure") return ReplayMode::kPure;
  if (s == "mixed") return ReplayMode::kMixed;
  throw ConfigError("unknown replay mode '" + s + "'");
}

// Every key of `j` must appear in `reference` (the emitted defaults).
void check_keys(const json& j, const json& reference, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!reference.contains(it.key())) throw ConfigError("unknown config key '" + where + it.key() + "'");
    const json& ref = reference.at(it.key());
    if (ref.is_object() && !ref.empty()) check_keys(it.value(), ref, where + it.key() + ".");
  }
}

template <typename T>
void get(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  stream.validate();
  if (model == ModelKind::kQuadraticProbe && stream.is_classification())
    throw ConfigError("quadratic-probe needs the drifting-quadratic stream");
  if (model != ModelKind::kQuadraticProbe && !stream.is_classification())
    throw ConfigError("the drifting-quadratic stream needs the quadratic-probe model");
  if (!(iterations_per_step >= 0.0)) throw ConfigError("iterations_per_step must be >= 0");
  if (minibatch < 1) throw ConfigError("minibatch must be >= 1");
  if (replay == ReplayMode::kMixed && minibatch % 2 != 0) throw ConfigError("mixed replay needs an even minibatch");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) throw ConfigError("holdout_fraction must be in [0, 1)");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(ema_gamma >= 0.0 && ema_gamma <= 1.0)) throw ConfigError("ema_gamma must be in [0, 1]");
  if (record_every < 1) throw ConfigError("record_every must be >= 1");
  if (!(ft_k2 > ft_k1 && ft_k1 > 0.0)) throw ConfigError("forward-transfer window needs 0 < k1 < k2");
  if (eval_per_step < 1) throw ConfigError("eval_per_step must be >= 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  ama.validate();
  schedule.validate();
  if (schedule.kind == ScheduleKind::kMalr && averaging != Averaging::kAma && averaging != Averaging::kEma)
    throw ConfigError("malr needs a moving-average model (ema or ama)");
  if (schedule.kind == ScheduleKind::kCyclic && stream.kind != StreamKind::kPiecewiseTask)
    throw ConfigError("cyclic schedule needs the task-aware piecewise stream");
  std::set<std::string> names;
  for (const auto& a : arms) {
    if (a.name.empty() || !names.insert(a.name).second) throw ConfigError("arm names must be unique and non-empty");
  }
  for (const auto& a : arms) {
    if (!a.overrides.is_object()) throw ConfigError("arm '" + a.name + "' overrides must be an object");
  }
}

ModelSpec ExperimentConfig::model_spec(const Stream& s) const {
  ModelSpec spec = model_for_stream(model, s, hidden, weight_decay);
  spec.init_scale = init_scale;
  return spec;
}

json to_json(const ExperimentConfig& c) {
  const auto& s = c.stream;
  json j;
  j["name"] = c.name;
  j["stream"] = {
      {"kind", to_string(s.kind)},
      {"d_in", s.d_in},
      {"n_classes", s.n_classes},
      {"batch_size", s.batch_size},
      {"horizon", s.horizon},
      {"seed", s.seed},
      {"quadratic",
       {{"mu", s.quadratic.mu},
        {"lipschitz", s.quadratic.lipschitz},
        {"noise_std", s.quadratic.noise_std},
        {"velocity", s.quadratic.velocity},
        {"center_norm", s.quadratic.center_norm},
        {"domain_radius", s.quadratic.domain_radius}}},
      {"rotating",
       {{"angular_velocity", s.rotating.angular_velocity},
        {"mean_scale", s.rotating.mean_scale},
        {"noise_std", s.rotating.noise_std}}},
      {"piecewise",
       {{"n_tasks", s.piecewise.n_tasks},
        {"classes_per_task", s.piecewise.classes_per_task},
        {"task_length", s.piecewise.task_length},
        {"mean_scale", s.piecewise.mean_scale},
        {"noise_std", s.piecewise.noise_std},
        {"cyclic", s.piecewise.cyclic}}},
  };
  j["model"] = {{"kind", to_string(c.model)},
                {"hidden", c.hidden},
                {"weight_decay", c.weight_decay},
                {"init_scale", c.init_scale}};
  j["optimizer"] = {{"base", to_string(c.optimizer)},
                    {"momentum", c.momentum},
                    {"averaging", to_string(c.averaging)},
                    {"ema_gamma", c.ema_gamma},
                    {"ama",
                     {{"gamma0", c.ama.gamma0},
                      {"delta", c.ama.delta},
                      {"weight_interval", c.ama.weight_interval},
                      {"update_interval", c.ama.update_interval},
                      {"validation_interval", c.ama.validation_interval},
                      {"adapt", c.ama.adapt}}}};
  j["schedule"] = {{"kind", to_string(c.schedule.kind)},
                   {"alpha0", c.schedule.alpha0},
                   {"reduction", c.schedule.reduction},
                   {"patience", c.schedule.patience},
                   {"epsilon", c.schedule.epsilon},
                   {"tolerance", c.schedule.tolerance},
                   {"use_c2", c.schedule.use_c2},
                   {"use_c3", c.schedule.use_c3},
                   {"replay_arm", c.replay_arm}};
  j["replay"] = {{"mode", to_string(c.replay)},
                 {"window", c.window},
                 {"iterations_per_step", c.iterations_per_step},
                 {"minibatch", c.minibatch},
                 {"capacity", c.capacity},
                 {"holdout_fraction", c.holdout_fraction},
                 {"split_holdout", c.split_holdout}};
  j["metrics"] = {{"record_every", c.record_every},
                  {"ft_k1", c.ft_k1},
                  {"ft_k2", c.ft_k2},
                  {"eval_per_step", c.eval_per_step}};
  j["seeds"] = c.seeds;
  j["arms"] = json::array();
  for (const auto& a : c.arms) j["arms"].push_back({{"name", a.name}, {"overrides", a.overrides}});
  j["output_dir"] = c.output_dir;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  json reference = to_json(c);
  reference["arms"] = json::array();
  check_keys(j, reference, "");
  get(j, "name", c.name);
  get(j, "output_dir", c.output_dir);
  get(j, "seeds", c.seeds);
  if (j.contains("stream")) {
    const json& s = j["stream"];
    auto& o = c.stream;
    if (s.contains("kind")) o.kind = stream_kind_from_string(s["kind"].get<std::string>());
    get(s, "d_in", o.d_in);
    get(s, "n_classes", o.n_classes);
    get(s, "batch_size", o.batch_size);
    get(s, "horizon", o.horizon);
    get(s, "seed", o.seed);
    if (s.contains("quadratic")) {
      const json& q = s["quadratic"];
      get(q, "mu", o.quadratic.mu);
      get(q, "lipschitz", o.quadratic.lipschitz);
      get(q, "noise_std", o.quadratic.noise_std);
      get(q, "velocity", o.quadratic.velocity);
      get(q, "center_norm", o.quadratic.center_norm);
      get(q, "domain_radius", o.quadratic.domain_radius);
    }
    if (s.contains("rotating")) {
      const json& r = s["rotating"];
      get(r, "angular_velocity", o.rotating.angular_velocity);
      get(r, "mean_scale", o.rotating.mean_scale);
      get(r, "noise_std", o.rotating.noise_std);
    }
    if (s.contains("piecewise")) {
      const json& p = s["piecewise"];
      get(p, "n_tasks", o.piecewise.n_tasks);
      get(p, "classes_per_task", o.piecewise.classes_per_task);
      get(p, "task_length", o.piecewise.task_length);
      get(p, "mean_scale", o.piecewise.mean_scale);
      get(p, "noise_std", o.piecewise.noise_std);
      get(p, "cyclic", o.piecewise.cyclic);
    }
  }
  if (j.contains("model")) {
    const json& m = j["model"];
    if (m.contains("kind")) c.model = model_kind_from_string(m["kind"].get<std::string>());
    get(m, "hidden", c.hidden);
    get(m, "weight_decay", c.weight_decay);
    get(m, "init_scale", c.init_scale);
  }
  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    if (o.contains("base")) c.optimizer = base_from_string(o["base"].get<std::string>());
    get(o, "momentum", c.momentum);
    if (o.contains("averaging")) c.averaging = averaging_from_string(o["averaging"].get<std::string>());
    get(o, "ema_gamma", c.ema_gamma);
    if (o.contains("ama")) {
      const json& a = o["ama"];
      get(a, "gamma0", c.ama.gamma0);
      get(a, "delta", c.ama.delta);
      get(a, "weight_interval", c.ama.weight_interval);
      get(a, "update_interval", c.ama.update_interval);
      get(a, "validation_interval", c.ama.validation_interval);
      get(a, "adapt", c.ama.adapt);
    }
  }
  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    if (s.contains("kind")) c.schedule.kind = schedule_kind_from_string(s["kind"].get<std::string>());
    get(s, "alpha0", c.schedule.alpha0);
    get(s, "reduction", c.schedule.reduction);
    get(s, "patience", c.schedule.patience);
    get(s, "epsilon", c.schedule.epsilon);
    get(s, "tolerance", c.schedule.tolerance);
    get(s, "use_c2", c.schedule.use_c2);
    get(s, "use_c3", c.schedule.use_c3);
    get(s, "replay_arm", c.replay_arm);
  }
  if (j.contains("replay")) {
    const json& r = j["replay"];
    if (r.contains("mode")) c.replay = replay_from_string(r["mode"].get<std::string>());
    get(r, "window", c.window);
    get(r, "iterations_per_step", c.iterations_per_step);
    get(r, "minibatch", c.minibatch);
    get(r, "capacity", c.capacity);
    get(r, "holdout_fraction", c.holdout_fraction);
    get(r, "split_holdout", c.split_holdout);
  }
  if (j.contains("metrics")) {
    const json& m = j["metrics"];
    get(m, "record_every", c.record_every);
    get(m, "ft_k1", c.ft_k1);
    get(m, "ft_k2", c.ft_k2);
    get(m, "eval_per_step", c.eval_per_step);
  }
  if (j.contains("arms")) {
    if (!j["arms"].is_array()) throw ConfigError("'arms' must be a list");
    for (const json& a : j["arms"]) {
      Arm arm;
      get(a, "name", arm.name);
      if (a.contains("overrides")) arm.overrides = a["overrides"];
      c.arms.push_back(std::move(arm));
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  // A run manifest embeds the resolved config.
  if (j.contains("config") && j.contains("manifest_version")) j = j["config"];
  return config_from_json(j);
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << to_json(config).dump(2) << "\n";
}

namespace {

void set_path(json& root, const std::string& path, const json& value) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("bad override path '" + path + "'");
    if (!node->is_object() || !node->contains(key)) throw ConfigError("unknown config key '" + path + "'");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
}

}  // namespace

void apply_overrides(ExperimentConfig& config, const json& overrides) {
  if (!overrides.is_object()) throw ConfigError("overrides must be an object");
  json j = to_json(config);
  for (auto it = overrides.begin(); it != overrides.end(); ++it) set_path(j, it.key(), it.value());
  config = config_from_json(j);
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  apply_overrides(config, json{{key, value}});
}

std::vector<ExperimentConfig> expand_arms(const ExperimentConfig& config) {
  if (config.arms.empty()) return {config};
  std::vector<ExperimentConfig> out;
  for (const auto& arm : config.arms) {
    ExperimentConfig c = config;
    c.arms.clear();
    apply_overrides(c, arm.overrides);
    c.name = arm.name;
    c.arms.clear();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace oclopt
