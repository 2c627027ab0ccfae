#include "oclopt/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "oclopt/errors.hpp"

namespace oclopt {

RunningMean online_validation(RunningMean acc, double minibatch_perf) {
  const double n = static_cast<double>(acc.n);
  acc.value = (n * acc.value + minibatch_perf) / (n + 1.0);
  ++acc.n;
  return acc;
}

RunningMean online_validation(RunningMean acc, const ModelSpec& spec, const ParamVector& theta,
                              std::span<const Example* const> minibatch) {
  return online_validation(acc, performance(spec, theta, minibatch));
}

void MetricLedger::record_step(std::uint64_t t, double perf) {
  if (t != step_perf_.size() + 1) throw Error("step scores must be recorded in order");
  step_perf_.push_back(perf);
}

void MetricLedger::record(const MetricRecord& r) {
  if (!records_.empty() && r.t < records_.back().t) throw Error("metric records must be time-ordered");
  records_.push_back(r);
}

double MetricLedger::step_perf(std::uint64_t t) const {
  if (t < 1 || t > step_perf_.size()) throw Error("no step score recorded for t=" + std::to_string(t));
  return step_perf_[t - 1];
}

double learning_efficacy(const MetricLedger& ledger, std::uint64_t t) {
  if (t < 1) throw Error("learning efficacy needs t >= 1");
  if (t + 1 > ledger.steps())
    throw Error("learning efficacy at t=" + std::to_string(t) + " needs the score of step t+1");
  double sum = 0.0;
  for (std::uint64_t j = 1; j <= t; ++j) sum += ledger.step_perf(j + 1);
  return sum / static_cast<double>(t);
}

double information_retention(const ModelSpec& spec, const ParamVector& theta,
                             const HoldoutPool& holdout, std::uint64_t t, RecordTag tag) {
  const std::size_t n = holdout.count_until(t);
  Minibatch view;
  view.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Record& r = holdout.items()[i];
    if (tag == RecordTag::kTrain || r.tag == tag) view.push_back(&r.example);
  }
  if (view.empty()) throw EmptyPoolError("information retention on an empty holdout");
  return performance(spec, theta, view);
}

double forward_transfer(const ModelSpec& spec, const ParamVector& theta,
                        const FutureHoldout& future, std::uint64_t t, std::uint64_t k1,
                        std::uint64_t k2, std::uint64_t horizon) {
  if (!(k2 > k1 && k1 >= 1)) throw ConfigError("forward transfer needs k2 > k1 >= 1");
  if (t + k2 > horizon) throw HorizonExceeded("forward-transfer window passes the horizon");
  std::vector<Example> data;
  for (std::uint64_t j = t + k1; j <= t + k2; ++j) {
    auto part = future(j);
    data.insert(data.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  const Minibatch view = as_minibatch(data);
  return performance(spec, theta, view);
}

std::pair<std::uint64_t, std::uint64_t> forward_window(std::uint64_t horizon, double k1_fraction,
                                                       double k2_fraction) {
  auto k1 = static_cast<std::uint64_t>(std::llround(k1_fraction * static_cast<double>(horizon)));
  auto k2 = static_cast<std::uint64_t>(std::llround(k2_fraction * static_cast<double>(horizon)));
  k1 = std::max<std::uint64_t>(k1, 1);
  k2 = std::max(k2, k1 + 1);
  return {k1, k2};
}

}  // namespace oclopt
