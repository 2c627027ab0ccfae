#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oclopt/errors.hpp"
#include "oclopt/harness.hpp"
#include "oclopt/stats.hpp"

namespace py = pybind11;
using namespace oclopt;
using nlohmann::json;

namespace {

ParamVector flat(const Eigen::VectorXd& v) {
  ParamVector p;
  p.values = v;
  p.layout = std::make_shared<const Layout>(Layout{{"theta", 0, v.size(), 1}});
  return p;
}

std::vector<Example> examples(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != x.rows())
    throw ConfigError("labels and inputs differ in length");
  std::vector<Example> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[i].x = x.row(i).transpose();
    out[i].label = labels.empty() ? -1 : labels[i];
  }
  return out;
}

py::dict run_to_dict(const RunResult& r) {
  py::dict d;
  d["arm"] = r.arm;
  d["seed"] = r.seed;
  d["P_LE"] = r.final_le;
  d["P_IR"] = r.final_ir;
  d["P_FT"] = r.final_ft;
  d["iterations"] = r.iterations;
  d["reductions"] = r.reductions;
  d["diverged"] = r.diverged;
  d["alpha"] = r.alpha_trace;
  d["step_perf"] = r.step_perf;
  d["ops"] = py::make_tuple(r.ops.forward, r.ops.gradient, r.ops.update);
  py::list rows;
  for (const auto& m : r.metrics)
    rows.append(py::dict(py::arg("t") = m.t, py::arg("k") = m.k, py::arg("P_LE") = m.le, py::arg("P_IR") = m.ir,
                         py::arg("P_FT") = m.ft, py::arg("alpha") = m.alpha, py::arg("sigma") = m.sigma,
                         py::arg("gamma1") = m.gamma1, py::arg("gamma2") = m.gamma2, py::arg("i_best") = m.i_best));
  d["metrics"] = rows;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "online continual learning optimizers (C++ core)";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<HorizonExceeded>(m, "HorizonExceeded", PyExc_IndexError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<EmptyPoolError>(m, "EmptyPoolError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  m.def("preset_names", &preset_names);
  m.def("preset_json", [](const std::string& name) { return to_json(preset(name)).dump(); });
  m.def("validate_json", [](const std::string& text) {
    ExperimentConfig c = config_from_json(json::parse(text));
    c.validate();
    return to_json(c).dump();
  });
  m.def(
      "run_experiment_json",
      [](const std::string& text) {
        const ExperimentConfig c = config_from_json(json::parse(text));
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(c);
        }
        py::dict out;
        for (const auto& arm : res.arms) {
          py::list runs;
          for (const auto& r : res.runs.at(arm)) runs.append(run_to_dict(r));
          out[py::str(arm)] = runs;
        }
        return out;
      },
      py::arg("config"));

  m.def(
      "next_batch_json",
      [](const std::string& stream_json, std::uint64_t t) {
        const StreamSpec spec = config_from_json(json{{"stream", json::parse(stream_json)}}).stream;
        const StreamBatch b = next_batch(spec, t);
        Eigen::MatrixXd x(static_cast<Eigen::Index>(b.size()), spec.d_in);
        std::vector<int> y;
        for (std::size_t i = 0; i < b.size(); ++i) {
          x.row(static_cast<Eigen::Index>(i)) = b.examples[i].x.transpose();
          y.push_back(b.examples[i].label);
        }
        return py::make_tuple(x, y);
      },
      py::arg("stream"), py::arg("t"));

  m.def(
      "loss_and_grad",
      [](const std::string& kind, int d_in, int n_classes, const Eigen::VectorXd& theta, const Eigen::MatrixXd& x,
         const std::vector<int>& labels, int hidden, double weight_decay) {
        ModelSpec spec;
        spec.kind = model_kind_from_string(kind);
        spec.loss = spec.kind == ModelKind::kQuadraticProbe ? LossKind::kQuadratic : LossKind::kCrossEntropy;
        spec.d_in = d_in;
        spec.n_classes = n_classes;
        spec.hidden = hidden;
        spec.weight_decay = weight_decay;
        if (spec.kind == ModelKind::kQuadraticProbe) spec.curvature = Eigen::MatrixXd::Identity(d_in, d_in);
        spec.validate();
        if (theta.size() != spec.dim()) throw ConfigError("theta has the wrong dimension");
        ParamVector p;
        p.values = theta;
        p.layout = spec.layout();
        const LossGrad lg = loss_and_grad(spec, p, examples(x, labels));
        return py::make_tuple(lg.loss, lg.grad);
      },
      py::arg("kind"), py::arg("d_in"), py::arg("n_classes"), py::arg("theta"), py::arg("x"), py::arg("labels"),
      py::arg("hidden") = 16, py::arg("weight_decay") = 0.0);

  m.def(
      "ma_update",
      [](Eigen::VectorXd ma, double gamma, const Eigen::VectorXd& theta) {
        ma_update(ma, gamma, theta);
        return ma;
      },
      py::arg("ma"), py::arg("gamma"), py::arg("theta"));

  py::class_<AmaState>(m, "Ama")
      .def(py::init([](const Eigen::VectorXd& theta0, double gamma0, double delta, std::uint64_t weight_interval,
                       std::uint64_t update_interval, std::uint64_t validation_interval, bool adapt) {
             AmaConfig c;
             c.gamma0 = gamma0;
             c.delta = delta;
             c.weight_interval = weight_interval;
             c.update_interval = update_interval;
             c.validation_interval = validation_interval;
             c.adapt = adapt;
             return make_ama(flat(theta0), c);
           }),
           py::arg("theta0"), py::arg("gamma0") = 0.99, py::arg("delta") = 5.0, py::arg("weight_interval") = 10000,
           py::arg("update_interval") = 10, py::arg("validation_interval") = 20, py::arg("adapt") = true)
      .def(
          "step",
          [](AmaState& s, const Eigen::VectorXd& theta, std::uint64_t k,
             std::optional<std::function<double(const Eigen::VectorXd&)>> scorer) {
            ValidationSource src = [&]() -> std::optional<Scorer> {
              if (!scorer) return std::nullopt;
              auto fn = *scorer;
              return Scorer([fn](const ParamVector& p) { return fn(p.values); });
            };
            const AmaEvents ev = ama_step(s, flat(theta), k, src);
            return py::dict(py::arg("ma_updated") = ev.ma_updated, py::arg("validated") = ev.validated,
                            py::arg("adapted") = ev.adapted, py::arg("validation_skipped") = ev.validation_skipped);
          },
          py::arg("theta"), py::arg("k"), py::arg("scorer") = py::none())
      .def_property_readonly("gamma1", [](const AmaState& s) { return s.gamma1; })
      .def_property_readonly("gamma2", [](const AmaState& s) { return s.gamma2; })
      .def_property_readonly("acc1", [](const AmaState& s) { return s.acc1; })
      .def_property_readonly("acc2", [](const AmaState& s) { return s.acc2; })
      .def_property_readonly("i_best", [](const AmaState& s) { return s.i_best; })
      .def_property_readonly("ma1", [](const AmaState& s) { return s.ma1.values; })
      .def_property_readonly("ma2", [](const AmaState& s) { return s.ma2.values; })
      .def_property_readonly("best", [](const AmaState& s) { return best_ma(s).values; });

  py::class_<Schedule>(m, "Schedule")
      .def(py::init([](const std::string& kind, double alpha0, double reduction, std::uint64_t patience,
                       double epsilon, bool use_c2, bool use_c3) {
             ScheduleConfig c;
             c.kind = schedule_kind_from_string(kind);
             c.alpha0 = alpha0;
             c.reduction = reduction;
             c.patience = patience;
             c.epsilon = epsilon;
             c.use_c2 = use_c2;
             c.use_c3 = use_c3;
             return Schedule(c);
           }),
           py::arg("kind"), py::arg("alpha0") = 0.025, py::arg("reduction") = 0.5, py::arg("patience") = 60000,
           py::arg("epsilon") = 0.03, py::arg("use_c2") = true, py::arg("use_c3") = true)
      .def_property_readonly("alpha", &Schedule::alpha)
      .def_property_readonly("reductions", &Schedule::reductions)
      .def("rwp_update", &Schedule::rwp_update, py::arg("val_perf"), py::arg("k"))
      .def("malr_update", &Schedule::malr_update, py::arg("val_perf"), py::arg("sigma"), py::arg("k"));

  m.def("cyclic_lr", &cyclic_lr, py::arg("alpha0"), py::arg("k_within_task"), py::arg("task_length"));
  m.def("sigma", &oclopt::sigma, py::arg("val_perf_ma"), py::arg("val_perf_sgd"));

  m.def(
      "bound_terms",
      [](double L, double rho, std::vector<double> alpha, std::vector<double> chi, double initial_loss,
         std::vector<double> expected_loss, std::size_t k, bool stationary) {
        BoundInputs in{L, rho, std::move(alpha), std::move(chi), initial_loss, std::move(expected_loss)};
        const BoundTerms t = stationary ? stationary_terms(in, k) : bound_terms(in, k);
        return py::make_tuple(t.t1, t.t2, t.t3);
      },
      py::arg("lipschitz"), py::arg("rho"), py::arg("alpha"), py::arg("chi"), py::arg("initial_loss"),
      py::arg("expected_loss"), py::arg("k"), py::arg("stationary") = false);

  m.def(
      "verify_bounds",
      [](const std::string& which) {
        std::vector<VerifyConfig> configs;
        if (which == "theory-verify") {
          configs = theory_presets();
        } else {
          const json j = json::parse(which);
          if (j.is_array()) {
            for (const auto& e : j) configs.push_back(verify_config_from_json(e));
          } else {
            configs.push_back(verify_config_from_json(j));
          }
        }
        py::list out;
        for (const auto& v : configs) {
          const BoundReport r = verify_bound(v);
          py::list rows;
          for (const auto& c : r.checkpoints)
            rows.append(py::dict(py::arg("k") = c.k, py::arg("lhs") = c.lhs, py::arg("lhs_se") = c.lhs_se,
                                 py::arg("T1") = c.terms.t1, py::arg("T2") = c.terms.t2, py::arg("T3") = c.terms.t3,
                                 py::arg("holds") = c.holds));
          out.append(py::dict(py::arg("name") = r.name, py::arg("all_hold") = r.all_hold,
                              py::arg("domain_excursion") = r.domain_excursion, py::arg("checkpoints") = rows));
        }
        return out;
      },
      py::arg("configs") = "theory-verify");
}
