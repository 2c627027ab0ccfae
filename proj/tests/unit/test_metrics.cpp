#include <cmath>

#include <gtest/gtest.h>

#include "oclopt/errors.hpp"
#include "oclopt/metrics.hpp"
#include "oclopt/protocol.hpp"
#include "oclopt/stats.hpp"

using namespace oclopt;

namespace {

ModelSpec linear(int d_in, int n_classes) {
  ModelSpec s;
  s.kind = ModelKind::kLinearSoftmax;
  s.d_in = d_in;
  s.n_classes = n_classes;
  return s;
}

StreamSpec small_stream() {
  StreamSpec s;
  s.kind = StreamKind::kRotatingGaussian;
  s.d_in = 2;
  s.n_classes = 2;
  s.batch_size = 6;
  s.horizon = 40;
  s.seed = 5;
  return s;
}

}  // namespace

TEST(Metrics, LearningEfficacyArithmetic) {
  MetricLedger ledger;
  ledger.record_step(1, 0.1);
  ledger.record_step(2, 0.5);
  EXPECT_THROW(learning_efficacy(ledger, 2), Error);
  ledger.record_step(3, 0.7);
  EXPECT_DOUBLE_EQ(learning_efficacy(ledger, 2), 0.6);
  EXPECT_THROW(ledger.record_step(5, 0.0), Error);
  MetricLedger perfect;
  for (std::uint64_t t = 1; t <= 10; ++t) perfect.record_step(t, 1.0);
  for (std::uint64_t t = 1; t < 10; ++t) EXPECT_EQ(learning_efficacy(perfect, t), 1.0);
}

TEST(Metrics, LearningEfficacyMatchesEnumerationWithFrozenModel) {
  const Stream st(small_stream());
  const ModelSpec spec = linear(2, 2);
  ParamVector theta = zeros_like(spec);
  theta.values << 1.0, -1.0, 0.5, 0.3, 0.0, 0.1;
  MetricLedger ledger;
  for (std::uint64_t t = 1; t <= 6; ++t) {
    const auto batch = st.next_batch(t);
    std::vector<Eigen::VectorXd> outs;
    for (const auto& ex : batch.examples) outs.push_back(output(spec, theta, ex.x));
    ledger.record_step(t, performance_from_outputs(spec, outs, batch.examples));
  }
  // Direct count over steps 2..6 with hand-computed logits.
  double correct = 0.0, total = 0.0;
  for (std::uint64_t t = 2; t <= 6; ++t) {
    for (const auto& ex : st.next_batch(t).examples) {
      const double z0 = 1.0 * ex.x[0] + 0.5 * ex.x[1] + 0.0;
      const double z1 = -1.0 * ex.x[0] + 0.3 * ex.x[1] + 0.1;
      correct += ((z1 > z0) ? 1 : 0) == ex.label ? 1.0 : 0.0;
      total += 1.0;
    }
  }
  EXPECT_NEAR(learning_efficacy(ledger, 5), correct / total, 1e-15);
}

TEST(Metrics, LearningEfficacyPrefixMeanIncrementBound) {
  MetricLedger ledger;
  CounterRng rng(2, Purpose::kTest);
  for (std::uint64_t t = 1; t <= 200; ++t) ledger.record_step(t, rng.uniform());
  for (std::uint64_t t = 2; t < 200; ++t) {
    const double le = learning_efficacy(ledger, t);
    EXPECT_GE(le, 0.0);
    EXPECT_LE(le, 1.0);
    EXPECT_LE(std::abs(le - learning_efficacy(ledger, t - 1)), 1.0 / static_cast<double>(t));
  }
}

TEST(Metrics, InformationRetentionEnumeration) {
  const ModelSpec spec = linear(1, 2);
  ParamVector theta = zeros_like(spec);
  theta.values << -1.0, 1.0, 0.0, 0.0;  // predicts class 1 iff x > 0
  DataPool pool;
  HoldoutPool holdout(1.0, 1);
  StreamBatch b;
  b.t = 1;
  const double xs[10] = {1, 2, 3, -1, -2, 4, 5, 6, 7, -3};
  for (double x : xs) b.examples.push_back({Eigen::VectorXd::Constant(1, x), 1});
  update(pool, holdout, b);
  EXPECT_DOUBLE_EQ(information_retention(spec, theta, holdout, 1), 0.7);
  EXPECT_THROW(information_retention(spec, theta, holdout, 0), EmptyPoolError);

  StreamBatch one;
  one.t = 2;
  one.examples.push_back({Eigen::VectorXd::Constant(1, 3.0), 1});
  HoldoutPool single(1.0, 1);
  update(pool, single, one);
  EXPECT_EQ(information_retention(spec, theta, single, 2), 1.0);
}

TEST(Metrics, InformationRetentionIgnoresTrainingPool) {
  const Stream st(small_stream());
  const ModelSpec spec = linear(2, 2);
  ParamVector theta = zeros_like(spec);
  theta.values.setLinSpaced(-1, 1);
  std::vector<double> irs;
  for (std::size_t cap : {std::size_t{1}, std::size_t{10}, DataPool::kUnlimited}) {
    DataPool pool(cap, 3);
    HoldoutPool holdout(0.3, 3);
    for (std::uint64_t t = 1; t <= 20; ++t) update(pool, holdout, st.next_batch(t));
    irs.push_back(information_retention(spec, theta, holdout, 20));
  }
  EXPECT_EQ(irs[0], irs[1]);
  EXPECT_EQ(irs[1], irs[2]);
}

TEST(Metrics, ForwardTransferWindow) {
  const Stream st(small_stream());
  const ModelSpec spec = linear(2, 2);
  ParamVector theta = zeros_like(spec);
  theta.values.setLinSpaced(-1, 1);
  const FutureHoldout future = [&](std::uint64_t j) { return st.evaluation_batch(j, 8); };
  EXPECT_DOUBLE_EQ(forward_transfer(spec, theta, future, 3, 4, 5, 40),
                   accuracy(spec, theta, [&] {
                     auto a = future(7);
                     auto b = future(8);
                     a.insert(a.end(), b.begin(), b.end());
                     return a;
                   }()));
  EXPECT_THROW(forward_transfer(spec, theta, future, 30, 4, 12, 40), HorizonExceeded);
  EXPECT_THROW(forward_transfer(spec, theta, future, 3, 4, 4, 40), ConfigError);
  const auto [k1, k2] = forward_window(2000);
  EXPECT_EQ(k1, 200u);
  EXPECT_EQ(k2, 500u);
}

TEST(Metrics, ForwardTransferTracksRetentionOnStationaryStream) {
  StreamSpec s = small_stream();
  s.horizon = 400;
  s.batch_size = 50;
  const Stream st(s);
  const ModelSpec spec = linear(2, 2);
  ParamVector theta = zeros_like(spec);
  // Separator through the origin along the mean difference.
  const Eigen::VectorXd diff = st.class_mean(1, 0) - st.class_mean(0, 0);
  theta.view("W").row(1) = diff.transpose();
  DataPool pool;
  HoldoutPool holdout(0.2, 1);
  for (std::uint64_t t = 1; t <= 100; ++t) update(pool, holdout, st.next_batch(t));
  const double ir = information_retention(spec, theta, holdout, 100);
  const double ft = forward_transfer(spec, theta, [&](std::uint64_t j) { return st.evaluation_batch(j, 50); },
                                     100, 10, 30, 400);
  const double n = static_cast<double>(holdout.count_until(100));
  const double se = std::sqrt(ir * (1 - ir) * (1 / n + 1 / 1050.0));
  EXPECT_LT(std::abs(ir - ft), 3 * se);
}

TEST(Metrics, InformationRetentionHasNoTrendOnStationaryStream) {
  StreamSpec s = small_stream();
  s.horizon = 400;
  s.batch_size = 40;
  const Stream st(s);
  const ModelSpec spec = linear(2, 2);
  ParamVector theta = zeros_like(spec);
  theta.view("W").row(1) = (st.class_mean(1, 0) - st.class_mean(0, 0)).transpose();
  DataPool pool;
  HoldoutPool holdout(0.25, 2);
  std::vector<double> early, late;
  for (std::uint64_t t = 1; t <= 400; ++t) {
    update(pool, holdout, st.next_batch(t));
    if (t % 20 == 0) (t <= 200 ? early : late).push_back(information_retention(spec, theta, holdout, t));
  }
  // Later evaluations should be neither systematically higher nor lower.
  const double gap = stats::mean(late) - stats::mean(early);
  EXPECT_LT(std::abs(gap), 3 * std::hypot(stats::standard_error(early), stats::standard_error(late)) + 0.01);
}

TEST(Metrics, OnlineValidationRunningMean) {
  RunningMean acc;
  acc = online_validation(acc, 0.8);
  EXPECT_EQ(acc.value, 0.8);
  EXPECT_EQ(acc.n, 1u);
  RunningMean two;
  two = online_validation(online_validation(two, 1.0), 0.0);
  EXPECT_EQ(two.value, 0.5);
  CounterRng rng(3, Purpose::kTest);
  RunningMean r;
  double sum = 0.0;
  for (int i = 0; i < 7; ++i) {
    const double a = rng.uniform();
    sum += a;
    r = online_validation(r, a);
  }
  EXPECT_NEAR(r.value, sum / 7.0, 1e-15);
}

TEST(Metrics, LedgerIsTimeOrdered) {
  MetricLedger ledger;
  MetricRecord r;
  r.t = 5;
  ledger.record(r);
  r.t = 3;
  EXPECT_THROW(ledger.record(r), Error);
}
