#include "oclopt/stream.hpp"

#include <cmath>
#include <utility>

#include "oclopt/errors.hpp"
#include "oclopt/rng.hpp"

namespace oclopt {

std::string to_string(StreamKind kind) {
  switch (kind) {
    case StreamKind::kDriftingQuadratic:
      return "drifting-quadratic";
    case StreamKind::kRotatingGaussian:
      return "rotating-gaussian";
    case StreamKind::kPiecewiseTask:
      return "piecewise-task";
  }
  return "unknown";
}

StreamKind stream_kind_from_string(const std::string& name) {
  if (name == "drifting-quadratic") return StreamKind::kDriftingQuadratic;
  if (name == "rotating-gaussian" || name == "rotating-gaussian-classification")
    return StreamKind::kRotatingGaussian;
  if (name == "piecewise-task") return StreamKind::kPiecewiseTask;
  throw ConfigError("unknown stream kind '" + name + "'");
}

void StreamSpec::validate() const {
  if (d_in < 1) throw ConfigError("stream.d_in must be >= 1");
  if (batch_size < 1) throw ConfigError("stream.batch_size must be >= 1");
  if (horizon < 1) throw ConfigError("stream.horizon must be >= 1");
  switch (kind) {
    case StreamKind::kDriftingQuadratic: {
      const auto& q = quadratic;
      if (!(q.mu > 0.0) || !(q.mu <= q.lipschitz) || !std::isfinite(q.lipschitz))
        throw ConfigError("drifting quadratic needs 0 < mu <= lipschitz");
      if (!(q.noise_std >= 0.0) || !std::isfinite(q.noise_std))
        throw ConfigError("drifting quadratic noise_std must be finite and >= 0");
      if (!(q.velocity >= 0.0) || !std::isfinite(q.velocity))
        throw ConfigError("drift velocity must be finite and >= 0");
      if (!(q.center_norm >= 0.0) || !(q.domain_radius >= 0.0))
        throw ConfigError("center_norm and domain_radius must be >= 0");
      break;
    }
    case StreamKind::kRotatingGaussian:
      if (n_classes < 2) throw ConfigError("classification streams need n_classes >= 2");
      if (!std::isfinite(rotating.angular_velocity) || rotating.angular_velocity < 0.0)
        throw ConfigError("angular_velocity must be finite and >= 0");
      if (!(rotating.noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
      break;
    case StreamKind::kPiecewiseTask: {
      const auto& p = piecewise;
      if (p.n_tasks < 1 || p.classes_per_task < 1 || p.task_length < 1)
        throw ConfigError("piecewise stream needs n_tasks, classes_per_task, task_length >= 1");
      if (n_classes != p.n_tasks * p.classes_per_task)
        throw ConfigError("piecewise stream needs n_classes == n_tasks * classes_per_task");
      if (n_classes < 2) throw ConfigError("classification streams need n_classes >= 2");
      if (!p.cyclic && horizon > p.task_length * static_cast<std::uint64_t>(p.n_tasks))
        throw ConfigError("non-cyclic piecewise stream: horizon exceeds n_tasks * task_length");
      break;
    }
  }
}

Eigen::VectorXd rotate_pairs(const Eigen::VectorXd& v, double angle) {
  Eigen::VectorXd out = v;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (Eigen::Index i = 0; i + 1 < v.size(); i += 2) {
    out[i] = c * v[i] - s * v[i + 1];
    out[i + 1] = s * v[i] + c * v[i + 1];
  }
  return out;
}

namespace {

Eigen::VectorXd random_unit(CounterRng& rng, int d) {
  Eigen::VectorXd v(d);
  do {
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace

Stream::Stream(StreamSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  CounterRng rng(spec_.seed, Purpose::kStreamStructure);
  const int d = spec_.d_in;
  if (spec_.kind == StreamKind::kDriftingQuadratic) {
    const auto& q = spec_.quadratic;
    eigenvalues_.resize(d);
    for (int i = 0; i < d; ++i) {
      eigenvalues_[i] = d == 1 ? q.lipschitz : q.mu + (q.lipschitz - q.mu) * i / (d - 1);
    }
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    curvature_ = basis * eigenvalues_.asDiagonal() * basis.transpose();
    curvature_ = 0.5 * (curvature_ + curvature_.transpose());
    center0_ = q.center_norm * random_unit(rng, d);
    velocity_ = q.velocity * random_unit(rng, d);
  } else {
    base_means_.reserve(spec_.n_classes);
    const double scale = spec_.kind == StreamKind::kRotatingGaussian ? spec_.rotating.mean_scale
                                                                     : spec_.piecewise.mean_scale;
    for (int c = 0; c < spec_.n_classes; ++c) base_means_.push_back(scale * random_unit(rng, d));
  }
}

std::uint64_t Stream::task_index(std::uint64_t t) const {
  if (spec_.kind != StreamKind::kPiecewiseTask) return 0;
  const auto& p = spec_.piecewise;
  const std::uint64_t raw = (t == 0 ? 0 : t - 1) / p.task_length;
  const auto n = static_cast<std::uint64_t>(p.n_tasks);
  return p.cyclic ? raw % n : std::min(raw, n - 1);
}

std::vector<int> Stream::active_classes(std::uint64_t t) const {
  std::vector<int> out;
  if (spec_.kind == StreamKind::kPiecewiseTask) {
    const int cpt = spec_.piecewise.classes_per_task;
    const int first = static_cast<int>(task_index(t)) * cpt;
    for (int c = first; c < first + cpt; ++c) out.push_back(c);
  } else if (spec_.kind == StreamKind::kRotatingGaussian) {
    for (int c = 0; c < spec_.n_classes; ++c) out.push_back(c);
  }
  return out;
}

Eigen::VectorXd Stream::class_mean(int c, std::uint64_t t) const {
  if (!spec_.is_classification()) throw ConfigError("class_mean on a regression stream");
  if (c < 0 || c >= spec_.n_classes) throw ConfigError("class index out of range");
  if (spec_.kind == StreamKind::kRotatingGaussian)
    return rotate_pairs(base_means_[c], spec_.rotating.angular_velocity * static_cast<double>(t));
  return base_means_[c];
}

Eigen::VectorXd Stream::center(std::uint64_t t) const {
  if (spec_.kind != StreamKind::kDriftingQuadratic)
    throw ConfigError("center() is only defined for the drifting quadratic stream");
  return center0_ + velocity_ * static_cast<double>(t);
}

Example Stream::sample(CounterRng& rng, std::uint64_t t) const {
  const int d = spec_.d_in;
  Example ex;
  ex.x.resize(d);
  switch (spec_.kind) {
    case StreamKind::kDriftingQuadratic: {
      const double half_width = std::sqrt(3.0) * spec_.quadratic.noise_std;
      ex.x = center(t);
      for (int i = 0; i < d; ++i) ex.x[i] += rng.uniform(-half_width, half_width);
      break;
    }
    case StreamKind::kRotatingGaussian: {
      ex.label = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec_.n_classes)));
      ex.x = class_mean(ex.label, t);
      for (int i = 0; i < d; ++i) ex.x[i] += spec_.rotating.noise_std * rng.normal();
      break;
    }
    case StreamKind::kPiecewiseTask: {
      const auto active = active_classes(t);
      ex.label = active[rng.below(active.size())];
      ex.x = base_means_[ex.label];
      for (int i = 0; i < d; ++i) ex.x[i] += spec_.piecewise.noise_std * rng.normal();
      break;
    }
  }
  return ex;
}

StreamBatch Stream::next_batch(std::uint64_t t) const {
  if (t < 1 || t > spec_.horizon)
    throw HorizonExceeded("step " + std::to_string(t) + " outside [1, " +
                          std::to_string(spec_.horizon) + "]");
  CounterRng rng(spec_.seed, Purpose::kBatch, t);
  StreamBatch batch;
  batch.t = t;
  batch.examples.reserve(spec_.batch_size);
  for (int i = 0; i < spec_.batch_size; ++i) batch.examples.push_back(sample(rng, t));
  return batch;
}

std::vector<Example> Stream::evaluation_batch(std::uint64_t t, int count) const {
  if (t < 1 || t > spec_.horizon)
    throw HorizonExceeded("evaluation step " + std::to_string(t) + " outside [1, " +
                          std::to_string(spec_.horizon) + "]");
  CounterRng rng(spec_.seed, Purpose::kEvaluation, t);
  std::vector<Example> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(sample(rng, t));
  return out;
}

QuadraticConstants Stream::constants() const {
  if (spec_.kind != StreamKind::kDriftingQuadratic)
    throw ConfigError("analytic constants are only available for the drifting quadratic");
  const auto& q = spec_.quadratic;
  QuadraticConstants out;
  out.lipschitz = q.lipschitz;
  out.mu = q.mu;
  // ξ̄ lies in the cube [-a, a]^d with a = √3·std, so ‖Aξ̄‖ ≤ L·a·√d.
  out.rho = q.lipschitz * std::sqrt(3.0) * q.noise_std * std::sqrt(static_cast<double>(spec_.d_in));
  out.domain_radius = q.domain_radius > 0.0 ? q.domain_radius : 10.0 * q.center_norm;
  return out;
}

double Stream::quadratic_loss(const Eigen::VectorXd& theta, std::uint64_t t) const {
  const Eigen::VectorXd diff = theta - center(t);
  return 0.5 * diff.dot(curvature_ * diff);
}

Eigen::VectorXd Stream::quadratic_gradient(const Eigen::VectorXd& theta, std::uint64_t t) const {
  return curvature_ * (theta - center(t));
}

double Stream::chi(std::uint64_t t) const {
  // l_{t+1}(θ) − l_t(θ) = −vᵀA(θ − c_t) + ½vᵀAv is affine in θ, so its
  // supremum over the ball is |a| + R‖Av‖ with a the value at θ = 0.
  const Eigen::VectorXd av = curvature_ * velocity_;
  const double offset = av.dot(center(t)) + 0.5 * velocity_.dot(av);
  return std::abs(offset) + constants().domain_radius * av.norm();
}

StreamBatch next_batch(const StreamSpec& spec, std::uint64_t t) {
  return Stream(spec).next_batch(t);
}

}  // namespace oclopt
