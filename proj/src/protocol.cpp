#include "oclopt/protocol.hpp"

#include "oclopt/errors.hpp"

namespace oclopt {

StepResult Protocol::run_step(Learner& learner, std::uint64_t t) {
  if (t <= last_t_) throw Error("protocol steps must strictly increase");
  StepResult result;
  result.batch = stream_.next_batch(t);

  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(result.batch.size());
  for (const auto& ex : result.batch.examples) inputs.push_back(ex.x);
  result.predictions = learner.predict(inputs);

  pool_.begin();
  holdout_.begin();
  try {
    result.current_train = update(pool_, holdout_, result.batch);
    learner.learn(pool_, holdout_, result.batch, result.current_train);
  } catch (...) {
    pool_.rollback();
    holdout_.rollback();
    throw;
  }
  pool_.commit();
  holdout_.commit();
  last_t_ = t;
  return result;
}

StepResult run_protocol_step(Protocol& env, Learner& learner, std::uint64_t t) {
  return env.run_step(learner, t);
}

}  // namespace oclopt
