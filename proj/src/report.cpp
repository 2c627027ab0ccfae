#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oclopt/errors.hpp"
#include "oclopt/harness.hpp"
#include "oclopt/stats.hpp"

#ifndef OCLOPT_VERSION
#define OCLOPT_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace oclopt {

namespace {

// Shortest text that parses back to the same double.
std::string real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_metrics_csv(const std::string& path, const RunResult& run) {
  auto out = open_out(path);
  out << "t,k,P_LE,P_IR,P_FT,alpha,sigma,gamma1,gamma2,i_best\n";
  for (const auto& r : run.metrics) {
    out << r.t << ',' << r.k << ',' << real(r.le) << ',' << real(r.ir) << ',' << real(r.ft) << ','
        << real(r.alpha) << ',' << real(r.sigma) << ',' << real(r.gamma1) << ',' << real(r.gamma2) << ','
        << r.i_best << '\n';
  }
}

void write_schedule_csv(const std::string& path, const RunResult& run) {
  auto out = open_out(path);
  out << "k,alpha,sigma,val_perf,flags\n";
  for (const auto& r : run.schedule) {
    out << r.k << ',' << real(r.alpha) << ',' << real(r.sigma) << ',' << real(r.val_perf) << ',' << r.flags << '\n';
  }
}

bool write_artifacts(const ExperimentConfig& config, const ExperimentResult& result) {
  fs::create_directories(config.output_dir);
  save_config(config, (fs::path(config.output_dir) / "config.json").string());
  json runs = json::array();
  bool ok = true;
  for (const auto& arm : result.arms) {
    for (const auto& run : result.runs.at(arm)) {
      const fs::path dir = fs::path(config.output_dir) / arm / ("seed-" + std::to_string(run.seed));
      fs::create_directories(dir);
      write_metrics_csv((dir / "metrics.csv").string(), run);
      write_schedule_csv((dir / "schedule.csv").string(), run);
      open_out((dir / "checkpoint.txt").string()) << run.checkpoint;
      ok = ok && !run.diverged;
      const double iters = static_cast<double>(std::max<std::uint64_t>(1, run.iterations));
      runs.push_back({{"arm", arm},
                      {"seed", run.seed},
                      {"dir", fs::relative(dir, config.output_dir).string()},
                      {"diverged", run.diverged},
                      {"error", run.error},
                      {"iterations", run.iterations},
                      {"reductions", run.reductions},
                      {"final_alpha", run.alpha_trace.empty() ? json(nullptr) : json(run.alpha_trace.back())},
                      {"P_LE", number_or_null(run.final_le)},
                      {"P_IR", number_or_null(run.final_ir)},
                      {"P_FT", number_or_null(run.final_ft)},
                      {"c_F", run.ops.forward / iters},
                      {"c_G", run.ops.gradient / iters},
                      {"c_U", run.ops.update / iters}});
    }
  }
  json manifest = {{"manifest_version", 1},
                   {"name", config.name},
                   {"code_version", OCLOPT_VERSION},
                   {"seeds", config.seeds},
                   {"arms", result.arms},
                   {"complete", ok},
                   {"runs", runs},
                   {"config", to_json(config)}};
  open_out((fs::path(config.output_dir) / "manifest.json").string()) << manifest.dump(2) << "\n";
  return ok;
}

std::string report(const std::string& run_dir) {
  const fs::path path = fs::path(run_dir) / "manifest.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("no manifest.json in '" + run_dir + "'");
  json m = json::parse(in);
  std::ostringstream os;
  std::ofstream csv = open_out((fs::path(run_dir) / "summary.csv").string());
  csv << "arm,n,P_LE,P_LE_se,P_IR,P_IR_se,P_FT,P_FT_se,final_alpha,reductions,c_F,c_G,c_U\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %3s  %-17s %-17s %-17s %10s\n", "arm", "n", "P_LE", "P_IR", "P_FT",
                "alpha_end");
  os << "experiment " << m["name"].get<std::string>() << "\n" << line;
  for (const auto& arm : m["arms"]) {
    std::vector<double> le, ir, ft, alpha, red;
    json first;
    for (const auto& r : m["runs"]) {
      if (r["arm"] != arm) continue;
      if (first.is_null()) first = r;
      auto push = [](std::vector<double>& v, const json& x) {
        if (x.is_number()) v.push_back(x.get<double>());
      };
      push(le, r["P_LE"]);
      push(ir, r["P_IR"]);
      push(ft, r["P_FT"]);
      push(alpha, r["final_alpha"]);
      push(red, r["reductions"]);
    }
    auto cell = [](const std::vector<double>& v) {
      char b[40];
      std::snprintf(b, sizeof b, "%.4f±%.4f", stats::mean(v), stats::standard_error(v));
      return std::string(b);
    };
    std::snprintf(line, sizeof line, "%-16s %3zu  %-17s %-17s %-17s %10.3g\n", arm.get<std::string>().c_str(),
                  le.size(), cell(le).c_str(), cell(ir).c_str(), cell(ft).c_str(), stats::mean(alpha));
    os << line;
    csv << arm.get<std::string>() << ',' << le.size() << ',' << real(stats::mean(le)) << ','
        << real(stats::standard_error(le)) << ',' << real(stats::mean(ir)) << ',' << real(stats::standard_error(ir))
        << ',' << real(stats::mean(ft)) << ',' << real(stats::standard_error(ft)) << ',' << real(stats::mean(alpha))
        << ',' << real(stats::mean(red)) << ',' << real(first["c_F"].get<double>()) << ','
        << real(first["c_G"].get<double>()) << ',' << real(first["c_U"].get<double>()) << '\n';
  }
  return os.str();
}

}  // namespace oclopt
