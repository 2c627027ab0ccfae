#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oclopt/rng.hpp"

namespace oclopt {

enum class StreamKind { kDriftingQuadratic, kRotatingGaussian, kPiecewiseTask };

std::string to_string(StreamKind kind);
StreamKind stream_kind_from_string(const std::string& name);

/// l_t(θ) = ½(θ − c_t)ᵀ A (θ − c_t) with c_t = c₀ + v·t and eig(A) evenly
/// spaced in [mu, lipschitz]. Samples are x = c_t + ξ with ξ uniform per
/// coordinate, so gradient noise is bounded (not just finite-variance).
struct DriftingQuadraticSpec {
  double mu = 0.5;
  double lipschitz = 4.0;
  double noise_std = 0.5;      ///< per-coordinate std of ξ
  double velocity = 0.0;       ///< ‖v‖ per step
  double center_norm = 1.0;    ///< ‖c₀‖
  double domain_radius = 0.0;  ///< R of the ball used for χ_k; 0 → 10·‖c₀‖
};

/// Class means rotate in every coordinate pair (0,1), (2,3), ... by
/// angular_velocity radians per step; samples are isotropic Gaussians.
struct RotatingGaussianSpec {
  double angular_velocity = 0.0;
  double mean_scale = 2.0;
  double noise_std = 1.0;
};

/// Class-incremental stream: task τ exposes classes [τ·cpt, (τ+1)·cpt).
struct PiecewiseTaskSpec {
  int n_tasks = 10;
  int classes_per_task = 2;
  std::uint64_t task_length = 100;
  double mean_scale = 2.0;
  double noise_std = 1.0;
  bool cyclic = false;  ///< revisit tasks after the last one
};

struct StreamSpec {
  StreamKind kind = StreamKind::kRotatingGaussian;
  int d_in = 2;
  int n_classes = 2;  ///< ignored for the quadratic stream
  int batch_size = 16;
  std::uint64_t horizon = 1000;
  std::uint64_t seed = 0;
  DriftingQuadraticSpec quadratic;
  RotatingGaussianSpec rotating;
  PiecewiseTaskSpec piecewise;

  bool is_classification() const { return kind != StreamKind::kDriftingQuadratic; }
  /// Throws ConfigError on an inconsistent spec.
  void validate() const;
};

/// One datum. For classification `label` is the class index; for the
/// quadratic stream `x` is the noisy target point and `label` is -1.
struct Example {
  Eigen::VectorXd x;
  int label = -1;
};

struct StreamBatch {
  std::uint64_t t = 0;
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
};

/// Analytic constants of a drifting quadratic stream.
struct QuadraticConstants {
  double lipschitz = 0.0;  ///< L (A1)
  double mu = 0.0;
  double rho = 0.0;        ///< bound on ‖g − ∇l‖ (A3), any batch size
  double domain_radius = 0.0;
};

/// Materialized stream. Construction draws the seed-dependent structure
/// (class means, curvature, drift direction); batches are then pure
/// functions of (seed, t) and can be requested in any order.
class Stream {
 public:
  explicit Stream(StreamSpec spec);

  const StreamSpec& spec() const { return spec_; }

  StreamBatch next_batch(std::uint64_t t) const;
  /// Held-out evaluation data for step t, drawn from the same distribution
  /// as next_batch(t) but from a disjoint substream.
  std::vector<Example> evaluation_batch(std::uint64_t t, int count) const;

  /// Mean of class `c` at step t (classification streams). t = 0 is the
  /// reference configuration.
  Eigen::VectorXd class_mean(int c, std::uint64_t t) const;
  /// Active classes at step t.
  std::vector<int> active_classes(std::uint64_t t) const;
  /// Task index at step t (piecewise stream), 0-based.
  std::uint64_t task_index(std::uint64_t t) const;

  // Drifting quadratic only.
  Eigen::VectorXd center(std::uint64_t t) const;
  Eigen::VectorXd velocity() const { return velocity_; }
  const Eigen::MatrixXd& curvature() const { return curvature_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  QuadraticConstants constants() const;
  /// Noiseless per-step loss l_t(θ).
  double quadratic_loss(const Eigen::VectorXd& theta, std::uint64_t t) const;
  Eigen::VectorXd quadratic_gradient(const Eigen::VectorXd& theta, std::uint64_t t) const;
  /// sup over ‖θ‖ ≤ R of |l_{t+1}(θ) − l_t(θ)| in closed form.
  double chi(std::uint64_t t) const;

 private:
  Example sample(CounterRng& rng, std::uint64_t t) const;

  StreamSpec spec_;
  std::vector<Eigen::VectorXd> base_means_;
  Eigen::MatrixXd curvature_;
  Eigen::VectorXd eigenvalues_;
  Eigen::VectorXd center0_;
  Eigen::VectorXd velocity_;
};

/// Convenience wrapper: Stream(spec).next_batch(t).
StreamBatch next_batch(const StreamSpec& spec, std::uint64_t t);

/// Rotates every coordinate pair (0,1), (2,3), ... of `v` by `angle`.
Eigen::VectorXd rotate_pairs(const Eigen::VectorXd& v, double angle);

}  // namespace oclopt
