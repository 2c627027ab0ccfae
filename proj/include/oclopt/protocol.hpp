#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "oclopt/datapool.hpp"
#include "oclopt/stream.hpp"

namespace oclopt {

/// A learner only ever sees the inputs of a batch before predicting.
class Learner {
 public:
  virtual ~Learner() = default;
  /// Model outputs for each input (logits, or the point estimate for the
  /// quadratic probe), computed with θ_{t−1}.
  virtual std::vector<Eigen::VectorXd> predict(std::span<const Eigen::VectorXd> inputs) const = 0;
  /// Step 4: update θ using the pools. `current_train` indexes the batch
  /// items that were routed to training.
  virtual void learn(const DataPool& pool, const HoldoutPool& holdout, const StreamBatch& batch,
                     std::span<const std::size_t> current_train) = 0;
};

struct StepResult {
  std::vector<Eigen::VectorXd> predictions;
  StreamBatch batch;
  std::vector<std::size_t> current_train;
};

/// Drives the four-step environment/learner interaction on one stream.
class Protocol {
 public:
  Protocol(const Stream& stream, DataPool& pool, HoldoutPool& holdout)
      : stream_(stream), pool_(pool), holdout_(holdout) {}

  /// (1) sample batch t, (2) predict with the current model before labels
  /// are revealed, (3) integrate into the pools, (4) let the learner update.
  /// If step 4 throws, the pools are restored and the exception propagates.
  StepResult run_step(Learner& learner, std::uint64_t t);

  std::uint64_t last_step() const { return last_t_; }

 private:
  const Stream& stream_;
  DataPool& pool_;
  HoldoutPool& holdout_;
  std::uint64_t last_t_ = 0;
};

StepResult run_protocol_step(Protocol& env, Learner& learner, std::uint64_t t);

}  // namespace oclopt
