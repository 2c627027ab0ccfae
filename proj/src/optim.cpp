#include "oclopt/optim.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <cstdlib>

#include "oclopt/errors.hpp"

namespace oclopt {

SgdState make_sgd(ParamVector theta, double momentum) {
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  SgdState s;
  s.momentum_buffer = Eigen::VectorXd::Zero(theta.size());
  s.theta = std::move(theta);
  s.momentum = momentum;
  return s;
}

void sgd_step(SgdState& state, const Eigen::VectorXd& grad, double alpha) {
  if (grad.size() != state.theta.size()) throw ConfigError("gradient shape mismatch");
  if (!(alpha > 0.0)) throw ConfigError("learning rate must be positive");
  if (!grad.allFinite()) throw DivergenceError("non-finite gradient");
  if (state.momentum == 0.0) {
    state.momentum_buffer = grad;
  } else {
    state.momentum_buffer = state.momentum * state.momentum_buffer + grad;
  }
  state.theta.values -= alpha * state.momentum_buffer;
  state.alpha = alpha;
}

AdamState make_adam(ParamVector theta, double beta1, double beta2, double epsilon) {
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("adam betas must lie in [0, 1)");
  AdamState s;
  s.first_moment = Eigen::VectorXd::Zero(theta.size());
  s.second_moment = Eigen::VectorXd::Zero(theta.size());
  s.theta = std::move(theta);
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  return s;
}

void adam_step(AdamState& state, const Eigen::VectorXd& grad, double alpha) {
  if (grad.size() != state.theta.size()) throw ConfigError("gradient shape mismatch");
  if (!(alpha > 0.0)) throw ConfigError("learning rate must be positive");
  if (!grad.allFinite()) throw DivergenceError("non-finite gradient");
  ++state.step;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad;
  state.second_moment =
      state.beta2 * state.second_moment + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  state.theta.values.array() -= alpha * (state.first_moment.array() / c1) /
                                ((state.second_moment.array() / c2).sqrt() + state.epsilon);
  state.alpha = alpha;
}

void ma_update(Eigen::VectorXd& ma, double gamma, const Eigen::VectorXd& theta) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("MA weight must lie in [0, 1]");
  if (ma.size() != theta.size()) throw ConfigError("MA shape mismatch");
  if (gamma == 1.0) return;
  if (gamma == 0.0) {
    ma = theta;
    return;
  }
  ma = gamma * ma + (1.0 - gamma) * theta;
}

EmaState make_ema(const ParamVector& theta0, double gamma, std::uint64_t update_interval) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("EMA weight must lie in [0, 1]");
  if (update_interval < 1) throw ConfigError("EMA update interval must be >= 1");
  return {theta0, gamma, update_interval};
}

bool ema_step(EmaState& state, const ParamVector& theta, std::uint64_t k) {
  if (k % state.update_interval != 0) return false;
  ma_update(state.ma.values, state.gamma, theta.values);
  return true;
}

void AmaConfig::validate() const {
  if (!(gamma0 >= 0.0 && gamma0 <= 1.0)) throw ConfigError("ama.gamma0 must lie in [0, 1]");
  if (!(delta > 0.0)) throw ConfigError("ama.delta must be > 0");
  if (weight_interval < 1 || update_interval < 1 || validation_interval < 1)
    throw ConfigError("ama intervals must be >= 1");
}

AmaState make_ama(const ParamVector& theta0, const AmaConfig& config) {
  config.validate();
  AmaState s;
  s.ma1 = theta0;
  s.ma2 = theta0;
  s.gamma1 = config.gamma0;
  s.gamma2 = std::min(1.0, config.gamma0 / config.delta);
  s.config = config;
  return s;
}

AmaEvents ama_step(AmaState& s, const ParamVector& sgd_theta, std::uint64_t k,
                   const ValidationSource& validation) {
  if (k < 1) throw ConfigError("ama_step iterations start at 1");
  const AmaConfig& c = s.config;
  AmaEvents ev;

  if (k % c.update_interval == 0) {
    ma_update(s.ma1.values, s.gamma1, sgd_theta.values);
    ma_update(s.ma2.values, s.gamma2, sgd_theta.values);
    ev.ma_updated = true;
  }

  if (k % c.validation_interval == 0) {
    std::optional<Scorer> scorer = validation ? validation() : std::nullopt;
    if (scorer) {
      // Both members are scored on the same minibatch.
      const double a1 = (*scorer)(s.ma1);
      const double a2 = (*scorer)(s.ma2);
      const double n = static_cast<double>(s.n);
      s.acc1 = (n * s.acc1 + a1) / (n + 1.0);
      s.acc2 = (n * s.acc2 + a2) / (n + 1.0);
      ++s.n;
      if (s.acc1 > s.acc2) {
        s.i_best = 1;
      } else if (s.acc2 > s.acc1) {
        s.i_best = 2;
      }
      ev.validated = true;
      ev.acc1 = s.acc1;
      ev.acc2 = s.acc2;
      ev.i_best = s.i_best;
      ev.scorer = std::move(scorer);
    } else {
      ev.validation_skipped = true;
    }
  }

  if (c.adapt && k % c.weight_interval == 0) {
    s.acc1 = 0.0;
    s.acc2 = 0.0;
    s.n = 0;
    if (s.i_best == 1) {
      s.gamma1 = std::min(1.0, c.delta * s.gamma1);
      s.gamma2 = s.gamma1 / c.delta;
      s.ma2 = s.ma1;
      s.i_best = 2;
    } else {
      s.gamma1 = s.gamma1 / c.delta;
      s.gamma2 = s.gamma2 / c.delta;
      s.gamma1 = std::min(1.0, s.gamma1);
      s.ma1 = s.ma2;
      s.i_best = 1;
    }
    s.gamma2 = std::min(1.0, s.gamma2);
    ev.adapted = true;
  }
  return ev;
}

const ParamVector& best_ma(const AmaState& state) {
  return state.i_best == 1 ? state.ma1 : state.ma2;
}

namespace {

void put_real(std::ostream& out, const char* key, double v) {
  out << key << ' ' << std::hexfloat << v << std::defaultfloat << '\n';
}

void put_int(std::ostream& out, const char* key, std::uint64_t v) { out << key << ' ' << v << '\n'; }

void put_vec(std::ostream& out, const char* key, const Eigen::VectorXd& v) {
  out << key << ' ' << v.size();
  out << std::hexfloat;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << v[i];
  out << std::defaultfloat << '\n';
}

std::string expect_key(std::istream& in, const char* key) {
  std::string k;
  if (!(in >> k) || k != key) throw Error(std::string("checkpoint: expected key '") + key + "', got '" + k + "'");
  return k;
}

double parse_real(const std::string& token) {
  // operator>> does not accept hex floats portably; strtod does.
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str()) throw Error("checkpoint: bad real '" + token + "'");
  return v;
}

double get_real(std::istream& in, const char* key) {
  expect_key(in, key);
  std::string tok;
  in >> tok;
  return parse_real(tok);
}

std::uint64_t get_int(std::istream& in, const char* key) {
  expect_key(in, key);
  std::uint64_t v = 0;
  if (!(in >> v)) throw Error(std::string("checkpoint: bad integer for ") + key);
  return v;
}

Eigen::VectorXd get_vec(std::istream& in, const char* key) {
  expect_key(in, key);
  Eigen::Index n = 0;
  if (!(in >> n)) throw Error(std::string("checkpoint: bad length for ") + key);
  Eigen::VectorXd v(n);
  std::string tok;
  for (Eigen::Index i = 0; i < n; ++i) {
    in >> tok;
    v[i] = parse_real(tok);
  }
  return v;
}

}  // namespace

void save(std::ostream& out, const SgdState& s) {
  out << "sgd\n";
  put_real(out, "momentum", s.momentum);
  put_real(out, "alpha", s.alpha);
  put_vec(out, "theta", s.theta.values);
  put_vec(out, "momentum_buffer", s.momentum_buffer);
}

SgdState load_sgd(std::istream& in, std::shared_ptr<const Layout> layout) {
  expect_key(in, "sgd");
  SgdState s;
  s.momentum = get_real(in, "momentum");
  s.alpha = get_real(in, "alpha");
  s.theta = {get_vec(in, "theta"), std::move(layout)};
  s.momentum_buffer = get_vec(in, "momentum_buffer");
  return s;
}

void save(std::ostream& out, const AdamState& s) {
  out << "adam\n";
  put_real(out, "beta1", s.beta1);
  put_real(out, "beta2", s.beta2);
  put_real(out, "epsilon", s.epsilon);
  put_int(out, "step", s.step);
  put_real(out, "alpha", s.alpha);
  put_vec(out, "theta", s.theta.values);
  put_vec(out, "first_moment", s.first_moment);
  put_vec(out, "second_moment", s.second_moment);
}

AdamState load_adam(std::istream& in, std::shared_ptr<const Layout> layout) {
  expect_key(in, "adam");
  AdamState s;
  s.beta1 = get_real(in, "beta1");
  s.beta2 = get_real(in, "beta2");
  s.epsilon = get_real(in, "epsilon");
  s.step = get_int(in, "step");
  s.alpha = get_real(in, "alpha");
  s.theta = {get_vec(in, "theta"), std::move(layout)};
  s.first_moment = get_vec(in, "first_moment");
  s.second_moment = get_vec(in, "second_moment");
  return s;
}

void save(std::ostream& out, const AmaState& s) {
  out << "ama\n";
  put_real(out, "gamma0", s.config.gamma0);
  put_real(out, "delta", s.config.delta);
  put_int(out, "K_W", s.config.weight_interval);
  put_int(out, "K_M", s.config.update_interval);
  put_int(out, "K_V", s.config.validation_interval);
  put_int(out, "adapt", s.config.adapt ? 1 : 0);
  put_real(out, "gamma1", s.gamma1);
  put_real(out, "gamma2", s.gamma2);
  put_real(out, "acc1", s.acc1);
  put_real(out, "acc2", s.acc2);
  put_int(out, "n", s.n);
  put_int(out, "i_best", static_cast<std::uint64_t>(s.i_best));
  put_vec(out, "ma1", s.ma1.values);
  put_vec(out, "ma2", s.ma2.values);
}

AmaState load_ama(std::istream& in, std::shared_ptr<const Layout> layout) {
  expect_key(in, "ama");
  AmaState s;
  s.config.gamma0 = get_real(in, "gamma0");
  s.config.delta = get_real(in, "delta");
  s.config.weight_interval = get_int(in, "K_W");
  s.config.update_interval = get_int(in, "K_M");
  s.config.validation_interval = get_int(in, "K_V");
  s.config.adapt = get_int(in, "adapt") != 0;
  s.gamma1 = get_real(in, "gamma1");
  s.gamma2 = get_real(in, "gamma2");
  s.acc1 = get_real(in, "acc1");
  s.acc2 = get_real(in, "acc2");
  s.n = get_int(in, "n");
  s.i_best = static_cast<int>(get_int(in, "i_best"));
  s.ma1 = {get_vec(in, "ma1"), layout};
  s.ma2 = {get_vec(in, "ma2"), layout};
  return s;
}

}  // namespace oclopt
