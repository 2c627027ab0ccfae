#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oclopt/datapool.hpp"
#include "oclopt/stream.hpp"

namespace oclopt {

enum class ModelKind { kQuadraticProbe, kLinearSoftmax, kMlp };
enum class LossKind { kQuadratic, kCrossEntropy };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// A named, column-major block of the flat parameter vector.
struct Block {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 1;

  Eigen::Index size() const { return rows * cols; }
};
using Layout = std::vector<Block>;

struct ParamVector {
  Eigen::VectorXd values;
  std::shared_ptr<const Layout> layout;

  Eigen::Index size() const { return values.size(); }
  const Block& block(const std::string& name) const;
  Eigen::Map<const Eigen::MatrixXd> view(const std::string& name) const;
  Eigen::Map<Eigen::MatrixXd> view(const std::string& name);
  bool all_finite() const { return values.allFinite(); }
};

struct ModelSpec {
  ModelKind kind = ModelKind::kLinearSoftmax;
  LossKind loss = LossKind::kCrossEntropy;
  int d_in = 2;
  int n_classes = 2;
  int hidden = 16;  ///< mlp only
  double weight_decay = 0.0;
  double init_scale = 1.0;    ///< mlp weight init multiplier
  Eigen::MatrixXd curvature;  ///< quadratic probe only (A)

  bool is_classifier() const { return kind != ModelKind::kQuadraticProbe; }
  Eigen::Index dim() const;
  std::shared_ptr<const Layout> layout() const;
  void validate() const;
};

/// Builds a model spec matching the stream (dimensions, curvature).
ModelSpec model_for_stream(ModelKind kind, const Stream& stream, int hidden = 16,
                           double weight_decay = 0.0);

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);
ParamVector zeros_like(const ModelSpec& spec);

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

/// Mean per-example loss plus ½λ‖θ‖², and its exact gradient.
/// Throws DivergenceError when the result is not finite.
LossGrad loss_and_grad(const ModelSpec& spec, const ParamVector& theta,
                       std::span<const Example* const> batch);
LossGrad loss_and_grad(const ModelSpec& spec, const ParamVector& theta,
                       const std::vector<Example>& batch);

/// Logits (classifiers) or the point estimate θ (quadratic probe).
Eigen::VectorXd output(const ModelSpec& spec, const ParamVector& theta, const Eigen::VectorXd& x);

/// argmax with ties broken toward the lowest class index.
int argmax_lowest(const Eigen::VectorXd& scores);

struct Evaluation {
  double accuracy = 0.0;  ///< NaN for the quadratic probe
  double loss = 0.0;      ///< mean data loss, no weight decay
};

Evaluation evaluate(const ModelSpec& spec, const ParamVector& theta,
                    std::span<const Example* const> data);

/// Fraction of argmax-correct predictions. Throws ConfigError for
/// regression models.
double accuracy(const ModelSpec& spec, const ParamVector& theta,
                std::span<const Example* const> data);
double accuracy(const ModelSpec& spec, const ParamVector& theta, const std::vector<Example>& data);

/// Higher-is-better score: accuracy for classifiers, −loss otherwise.
double performance(const ModelSpec& spec, const ParamVector& theta,
                   std::span<const Example* const> data);

/// Score of already computed outputs against the examples they were made for.
double performance_from_outputs(const ModelSpec& spec, std::span<const Eigen::VectorXd> outputs,
                                std::span<const Example> examples);

Minibatch as_minibatch(const std::vector<Example>& data);

}  // namespace oclopt
