#include "oclopt/model.hpp"

#include <cmath>
#include <limits>

#include "oclopt/errors.hpp"
#include "oclopt/rng.hpp"

namespace oclopt {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kQuadraticProbe:
      return "quadratic-probe";
    case ModelKind::kLinearSoftmax:
      return "linear-softmax";
    case ModelKind::kMlp:
      return "mlp-1-hidden";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "quadratic-probe") return ModelKind::kQuadraticProbe;
  if (name == "linear-softmax") return ModelKind::kLinearSoftmax;
  if (name == "mlp-1-hidden" || name == "mlp") return ModelKind::kMlp;
  throw ConfigError("unknown model kind '" + name + "'");
}

const Block& ParamVector::block(const std::string& name) const {
  for (const auto& b : *layout)
    if (b.name == name) return b;
  throw ConfigError("no parameter block named '" + name + "'");
}

Eigen::Map<const Eigen::MatrixXd> ParamVector::view(const std::string& name) const {
  const Block& b = block(name);
  return {values.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<Eigen::MatrixXd> ParamVector::view(const std::string& name) {
  const Block& b = block(name);
  return {values.data() + b.offset, b.rows, b.cols};
}

std::shared_ptr<const Layout> ModelSpec::layout() const {
  auto layout = std::make_shared<Layout>();
  Eigen::Index offset = 0;
  auto add = [&](const char* name, Eigen::Index rows, Eigen::Index cols) {
    layout->push_back({name, offset, rows, cols});
    offset += rows * cols;
  };
  switch (kind) {
    case ModelKind::kQuadraticProbe:
      add("theta", d_in, 1);
      break;
    case ModelKind::kLinearSoftmax:
      add("W", n_classes, d_in);
      add("b", n_classes, 1);
      break;
    case ModelKind::kMlp:
      add("W1", hidden, d_in);
      add("b1", hidden, 1);
      add("W2", n_classes, hidden);
      add("b2", n_classes, 1);
      break;
  }
  return layout;
}

Eigen::Index ModelSpec::dim() const {
  switch (kind) {
    case ModelKind::kQuadraticProbe:
      return d_in;
    case ModelKind::kLinearSoftmax:
      return static_cast<Eigen::Index>(n_classes) * (d_in + 1);
    case ModelKind::kMlp:
      return static_cast<Eigen::Index>(hidden) * (d_in + 1) + static_cast<Eigen::Index>(n_classes) * (hidden + 1);
  }
  return 0;
}

void ModelSpec::validate() const {
  if (d_in < 1) throw ConfigError("model.d_in must be >= 1");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  const bool quadratic = kind == ModelKind::kQuadraticProbe;
  if (quadratic != (loss == LossKind::kQuadratic))
    throw ConfigError("quadratic-probe requires the quadratic loss and vice versa");
  if (quadratic) {
    if (curvature.rows() != d_in || curvature.cols() != d_in)
      throw ConfigError("quadratic-probe curvature must be d_in x d_in");
  } else {
    if (n_classes < 2) throw ConfigError("classifiers need n_classes >= 2");
    if (kind == ModelKind::kMlp && hidden < 1) throw ConfigError("mlp hidden width must be >= 1");
  }
}

ModelSpec model_for_stream(ModelKind kind, const Stream& stream, int hidden, double weight_decay) {
  ModelSpec spec;
  spec.kind = kind;
  spec.loss = kind == ModelKind::kQuadraticProbe ? LossKind::kQuadratic : LossKind::kCrossEntropy;
  spec.d_in = stream.spec().d_in;
  spec.n_classes = stream.spec().n_classes;
  spec.hidden = hidden;
  spec.weight_decay = weight_decay;
  if (kind == ModelKind::kQuadraticProbe) spec.curvature = stream.curvature();
  spec.validate();
  if (kind == ModelKind::kQuadraticProbe && stream.spec().is_classification())
    throw ConfigError("quadratic-probe needs the drifting-quadratic stream");
  if (kind != ModelKind::kQuadraticProbe && !stream.spec().is_classification())
    throw ConfigError("classifiers need a classification stream");
  return spec;
}

ParamVector zeros_like(const ModelSpec& spec) {
  return {Eigen::VectorXd::Zero(spec.dim()), spec.layout()};
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamVector theta = zeros_like(spec);
  if (spec.kind == ModelKind::kMlp) {
    CounterRng rng(seed, Purpose::kModelInit);
    auto w1 = theta.view("W1");
    auto w2 = theta.view("W2");
    const double s1 = spec.init_scale / std::sqrt(static_cast<double>(spec.d_in));
    const double s2 = spec.init_scale / std::sqrt(static_cast<double>(spec.hidden));
    for (Eigen::Index j = 0; j < w1.cols(); ++j)
      for (Eigen::Index i = 0; i < w1.rows(); ++i) w1(i, j) = s1 * rng.normal();
    for (Eigen::Index j = 0; j < w2.cols(); ++j)
      for (Eigen::Index i = 0; i < w2.rows(); ++i) w2(i, j) = s2 * rng.normal();
  }
  return theta;
}

int argmax_lowest(const Eigen::VectorXd& scores) {
  int best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  return best;
}

namespace {

void check_dims(const ModelSpec& spec, const ParamVector& theta, const Eigen::VectorXd& x) {
  if (theta.size() != spec.dim()) throw ConfigError("parameter dimension mismatch");
  if (x.size() != spec.d_in) throw ConfigError("input dimension mismatch");
}

// Softmax cross-entropy on logits z for label y; writes p − onehot into dz.
double cross_entropy(const Eigen::VectorXd& z, int y, Eigen::VectorXd& dz) {
  const double zmax = z.maxCoeff();
  dz = (z.array() - zmax).exp();
  const double sum = dz.sum();
  dz /= sum;
  const double loss = std::log(sum) + zmax - z[y];
  dz[y] -= 1.0;
  return loss;
}

double cross_entropy_loss(const Eigen::VectorXd& z, int y) {
  const double zmax = z.maxCoeff();
  return std::log((z.array() - zmax).exp().sum()) + zmax - z[y];
}

void check_label(const ModelSpec& spec, const Example& ex) {
  if (ex.label < 0 || ex.label >= spec.n_classes) throw ConfigError("label outside [0, n_classes)");
}

}  // namespace

Eigen::VectorXd output(const ModelSpec& spec, const ParamVector& theta, const Eigen::VectorXd& x) {
  check_dims(spec, theta, x);
  switch (spec.kind) {
    case ModelKind::kQuadraticProbe:
      return theta.values;
    case ModelKind::kLinearSoftmax:
      return theta.view("W") * x + theta.view("b");
    case ModelKind::kMlp: {
      const Eigen::VectorXd h = (theta.view("W1") * x + theta.view("b1")).array().tanh().matrix();
      return theta.view("W2") * h + theta.view("b2");
    }
  }
  return {};
}

LossGrad loss_and_grad(const ModelSpec& spec, const ParamVector& theta,
                       std::span<const Example* const> batch) {
  if (batch.empty()) throw ConfigError("loss_and_grad on an empty minibatch");
  if (theta.size() != spec.dim()) throw ConfigError("parameter dimension mismatch");
  LossGrad out;
  out.grad = Eigen::VectorXd::Zero(theta.size());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;

  switch (spec.kind) {
    case ModelKind::kQuadraticProbe: {
      const auto& a = spec.curvature;
      Eigen::VectorXd mean_diff = Eigen::VectorXd::Zero(spec.d_in);
      for (const Example* ex : batch) {
        check_dims(spec, theta, ex->x);
        const Eigen::VectorXd diff = theta.values - ex->x;
        total += 0.5 * diff.dot(a * diff);
        mean_diff += diff;
      }
      out.grad = a * (mean_diff * inv_n);
      break;
    }
    case ModelKind::kLinearSoftmax: {
      const auto w = theta.view("W");
      const auto b = theta.view("b");
      ParamVector g{Eigen::VectorXd::Zero(theta.size()), theta.layout};
      auto gw = g.view("W");
      auto gb = g.view("b");
      Eigen::VectorXd z, dz;
      for (const Example* ex : batch) {
        check_dims(spec, theta, ex->x);
        check_label(spec, *ex);
        z = w * ex->x + b;
        total += cross_entropy(z, ex->label, dz);
        gw.noalias() += dz * ex->x.transpose();
        gb += dz;
      }
      out.grad = std::move(g.values) * inv_n;
      break;
    }
    case ModelKind::kMlp: {
      const auto w1 = theta.view("W1");
      const auto b1 = theta.view("b1");
      const auto w2 = theta.view("W2");
      const auto b2 = theta.view("b2");
      ParamVector g{Eigen::VectorXd::Zero(theta.size()), theta.layout};
      auto gw1 = g.view("W1");
      auto gb1 = g.view("b1");
      auto gw2 = g.view("W2");
      auto gb2 = g.view("b2");
      Eigen::VectorXd h, z, dz, da;
      for (const Example* ex : batch) {
        check_dims(spec, theta, ex->x);
        check_label(spec, *ex);
        h = (w1 * ex->x + b1).array().tanh().matrix();
        z = w2 * h + b2;
        total += cross_entropy(z, ex->label, dz);
        gw2.noalias() += dz * h.transpose();
        gb2 += dz;
        da = (w2.transpose() * dz).array() * (1.0 - h.array().square());
        gw1.noalias() += da * ex->x.transpose();
        gb1 += da;
      }
      out.grad = std::move(g.values) * inv_n;
      break;
    }
  }

  out.loss = total * inv_n;
  if (spec.weight_decay > 0.0) {
    out.loss += 0.5 * spec.weight_decay * theta.values.squaredNorm();
    out.grad += spec.weight_decay * theta.values;
  }
  if (!std::isfinite(out.loss) || !out.grad.allFinite())
    throw DivergenceError("non-finite loss or gradient");
  return out;
}

Minibatch as_minibatch(const std::vector<Example>& data) {
  Minibatch out;
  out.reserve(data.size());
  for (const auto& ex : data) out.push_back(&ex);
  return out;
}

LossGrad loss_and_grad(const ModelSpec& spec, const ParamVector& theta,
                       const std::vector<Example>& batch) {
  const Minibatch view = as_minibatch(batch);
  return loss_and_grad(spec, theta, view);
}

Evaluation evaluate(const ModelSpec& spec, const ParamVector& theta,
                    std::span<const Example* const> data) {
  if (data.empty()) throw ConfigError("evaluation on an empty dataset");
  Evaluation ev;
  double correct = 0.0, total = 0.0;
  for (const Example* ex : data) {
    const Eigen::VectorXd z = output(spec, theta, ex->x);
    if (spec.is_classifier()) {
      check_label(spec, *ex);
      total += cross_entropy_loss(z, ex->label);
      if (argmax_lowest(z) == ex->label) correct += 1.0;
    } else {
      const Eigen::VectorXd diff = z - ex->x;
      total += 0.5 * diff.dot(spec.curvature * diff);
    }
  }
  const double n = static_cast<double>(data.size());
  ev.loss = total / n;
  ev.accuracy = spec.is_classifier() ? correct / n : std::numeric_limits<double>::quiet_NaN();
  return ev;
}

double accuracy(const ModelSpec& spec, const ParamVector& theta,
                std::span<const Example* const> data) {
  if (!spec.is_classifier()) throw ConfigError("accuracy is undefined for regression models");
  return evaluate(spec, theta, data).accuracy;
}

double accuracy(const ModelSpec& spec, const ParamVector& theta, const std::vector<Example>& data) {
  const Minibatch view = as_minibatch(data);
  return accuracy(spec, theta, view);
}

double performance(const ModelSpec& spec, const ParamVector& theta,
                   std::span<const Example* const> data) {
  const Evaluation ev = evaluate(spec, theta, data);
  return spec.is_classifier() ? ev.accuracy : -ev.loss;
}

double performance_from_outputs(const ModelSpec& spec, std::span<const Eigen::VectorXd> outputs,
                                std::span<const Example> examples) {
  if (outputs.size() != examples.size() || examples.empty())
    throw ConfigError("outputs and examples must be non-empty and of equal length");
  double total = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (spec.is_classifier()) {
      total += argmax_lowest(outputs[i]) == examples[i].label ? 1.0 : 0.0;
    } else {
      const Eigen::VectorXd diff = outputs[i] - examples[i].x;
      total -= 0.5 * diff.dot(spec.curvature * diff);
    }
  }
  return total / static_cast<double>(examples.size());
}

}  // namespace oclopt
