#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "oclopt/datapool.hpp"
#include "oclopt/model.hpp"

namespace oclopt {

/// Running mean Acc ← (n·Acc + acc)/(n + 1).
struct RunningMean {
  double value = 0.0;
  std::uint64_t n = 0;

  void reset() {
    value = 0.0;
    n = 0;
  }
};

RunningMean online_validation(RunningMean acc, double minibatch_perf);
/// Evaluates `theta` on `minibatch` and folds the result in.
RunningMean online_validation(RunningMean acc, const ModelSpec& spec, const ParamVector& theta,
                              std::span<const Example* const> minibatch);

struct MetricRecord {
  std::uint64_t t = 0;
  std::uint64_t k = 0;
  double information_retention = std::numeric_limits<double>::quiet_NaN();
  double forward_transfer = std::numeric_limits<double>::quiet_NaN();
  double alpha = 0.0;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double gamma1 = std::numeric_limits<double>::quiet_NaN();
  double gamma2 = std::numeric_limits<double>::quiet_NaN();
  int i_best = 0;
};

/// Append-only, time-ordered record of a run.
class MetricLedger {
 public:
  /// Score at step t of the model from step t−1 on batch t (protocol step 2).
  void record_step(std::uint64_t t, double perf);
  void record(const MetricRecord& r);

  std::uint64_t steps() const { return step_perf_.size(); }
  double step_perf(std::uint64_t t) const;
  const std::vector<MetricRecord>& records() const { return records_; }

 private:
  std::vector<double> step_perf_;
  std::vector<MetricRecord> records_;
};

/// P_LE(t) = (1/t)·Σ_{j=1..t} acc(batch_{j+1}, θ_j), i.e. the mean of step
/// scores 2..t+1. Throws if step t+1 has not been recorded.
double learning_efficacy(const MetricLedger& ledger, std::uint64_t t);

/// Accuracy (or −loss) of θ_t on every holdout item with arrival ≤ t.
/// `tag` restricts to one holdout split; kTrain means all.
double information_retention(const ModelSpec& spec, const ParamVector& theta,
                             const HoldoutPool& holdout, std::uint64_t t,
                             RecordTag tag = RecordTag::kTrain);

/// Supplies evaluation data for a future step.
using FutureHoldout = std::function<std::vector<Example>(std::uint64_t step)>;

/// Score of θ_t on the union of evaluation data for steps t+k1 .. t+k2.
/// Throws HorizonExceeded when t + k2 exceeds `horizon`.
double forward_transfer(const ModelSpec& spec, const ParamVector& theta,
                        const FutureHoldout& future, std::uint64_t t, std::uint64_t k1,
                        std::uint64_t k2, std::uint64_t horizon);

/// Forward-transfer window as fractions of the horizon (defaults 10% / 25%).
std::pair<std::uint64_t, std::uint64_t> forward_window(std::uint64_t horizon, double k1_fraction = 0.10,
                                                       double k2_fraction = 0.25);

}  // namespace oclopt
