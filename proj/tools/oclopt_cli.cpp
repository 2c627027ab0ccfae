#include <glob.h>

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "oclopt/errors.hpp"
#include "oclopt/harness.hpp"

namespace fs = std::filesystem;
using namespace oclopt;

namespace {

enum Exit { kOk = 0, kConfig = 2, kDiverged = 3, kBoundFailure = 4 };

int run_config(ExperimentConfig cfg, const std::string& out_dir) {
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const ExperimentResult res = run_experiment(cfg);
  const bool ok = write_artifacts(cfg, res);
  std::cout << report(cfg.output_dir);
  if (!ok) {
    std::cerr << "run diverged; partial artifacts in " << cfg.output_dir << "\n";
    return kDiverged;
  }
  return kOk;
}

int verify(const std::vector<VerifyConfig>& configs, const std::string& out_dir) {
  bool all = true;
  if (!out_dir.empty()) fs::create_directories(out_dir);
  for (const auto& v : configs) {
    BoundReport r;
    try {
      r = verify_bound(v);
    } catch (const PreconditionError& e) {
      std::cout << v.name << ": refused (" << e.assumption() << "): " << e.what() << "\n";
      all = false;
      continue;
    }
    const auto& last = r.checkpoints.back();
    std::cout << v.name << ": " << (r.all_hold ? "holds" : "FAILS") << " at " << r.checkpoints.size()
              << " checkpoints; k=" << last.k << " lhs=" << last.lhs << "±" << last.lhs_se << " T1=" << last.terms.t1
              << " T2=" << last.terms.t2 << " T3=" << last.terms.t3
              << (r.domain_excursion ? " [left the domain ball]" : "") << "\n";
    std::cout << "  conditions: denominator " << (r.conditions.denominator_growing ? "grows" : "stalls")
              << ", noise ratio " << r.conditions.noise_ratio_first << " -> " << r.conditions.noise_ratio_last
              << ", drift ratio " << r.conditions.drift_ratio_first << " -> " << r.conditions.drift_ratio_last << "\n";
    if (!out_dir.empty()) write_bound_csv((fs::path(out_dir) / (v.name + ".csv")).string(), r);
    all = all && r.all_hold;
  }
  return all ? kOk : kBoundFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online continual learning optimizer toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, preset_name, glob_pattern, run_dir;
  std::vector<std::string> overrides;
  bool emit = false;

  auto* run = app.add_subcommand("run", "run an experiment config (or a manifest)");
  run->add_option("config", config_path)->required();
  run->add_option("--out", out_dir, "output directory");

  auto* pre = app.add_subcommand("preset", "run a named preset");
  pre->add_option("name", preset_name)->required();
  pre->add_option("--override", overrides, "key=value, dotted config path");
  pre->add_option("--out", out_dir, "output directory");
  pre->add_flag("--emit", emit, "print the resolved config instead of running");

  auto* sweep = app.add_subcommand("sweep", "run every config matching a glob");
  sweep->add_option("pattern", glob_pattern)->required();

  auto* ver = app.add_subcommand("verify-bounds", "check the SGD bound on drifting quadratics");
  ver->add_option("config", config_path, "verify config file, or 'theory-verify'")->required();
  ver->add_option("--out", out_dir, "directory for per-checkpoint CSVs");

  auto* rep = app.add_subcommand("report", "summarize a run directory");
  rep->add_option("run_dir", run_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_config(load_config(config_path), out_dir);
    if (*pre) {
      if (preset_name == "theory-verify" && !emit) return verify(theory_presets(), out_dir);
      ExperimentConfig cfg = preset(preset_name);
      for (const auto& o : overrides) apply_override(cfg, o);
      cfg.validate();
      if (emit) {
        std::cout << to_json(cfg).dump(2) << "\n";
        return kOk;
      }
      return run_config(cfg, out_dir);
    }
    if (*sweep) {
      glob_t g{};
      if (::glob(glob_pattern.c_str(), 0, nullptr, &g) != 0) {
        std::cerr << "no configs match " << glob_pattern << "\n";
        return kConfig;
      }
      int worst = kOk;
      for (std::size_t i = 0; i < g.gl_pathc; ++i) {
        std::cout << "== " << g.gl_pathv[i] << "\n";
        worst = std::max(worst, run_config(load_config(g.gl_pathv[i]), ""));
      }
      globfree(&g);
      return worst;
    }
    if (*ver) {
      return verify(config_path == "theory-verify" ? theory_presets() : load_verify_configs(config_path), out_dir);
    }
    if (*rep) {
      std::cout << report(run_dir);
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
