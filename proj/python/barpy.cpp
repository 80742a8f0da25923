#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bar/boolnet.hpp"
#include "bar/bounds.hpp"
#include "bar/exactchain.hpp"
#include "bar/infer.hpp"
#include "bar/model.hpp"
#include "bar/simulate.hpp"
#include "bar/sweep.hpp"

namespace py = pybind11;
using namespace bar;

namespace {

py::array_t<std::uint8_t> to_array(const Trajectory& t) {
  py::array_t<std::uint8_t> a({t.n(), t.p()});
  std::copy(t.bits().begin(), t.bits().end(), a.mutable_data());
  return a;
}

Trajectory from_array(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 2) throw Error(ErrorKind::InvalidParameter, "trajectory must be a 2-d array (n, p)");
  const auto n = static_cast<std::size_t>(a.shape(0));
  const auto p = static_cast<std::size_t>(a.shape(1));
  Trajectory t(p, TrajectoryKind::Bar, 0, 0);
  t.reserve(n);
  const std::uint8_t* d = a.data();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < p; ++i)
      if (d[k * p + i] > 1) throw Error(ErrorKind::InvalidParameter, "trajectory entries must be 0 or 1");
    t.push_back(std::span<const Bit>(d + k * p, p));
  }
  return t;
}

py::dict truth_dict(const GraphTruth& t) {
  py::dict d;
  d["parents"] = t.parents;
  d["positive"] = t.positive;
  d["negative"] = t.negative;
  d["degree"] = t.degree;
  d["d"] = t.d;
  return d;
}

py::dict estimate_dict(const GraphEstimate& e) {
  py::dict d;
  d["p"] = e.p;
  d["stage"] = std::string(to_string(e.stage));
  d["parents"] = e.parents;
  d["positive"] = e.positive;
  d["negative"] = e.negative;
  d["warnings"] = e.warnings;
  return d;
}

GraphTruth truth_from_dict(const py::dict& d) {
  GraphTruth t;
  t.parents = d["parents"].cast<std::vector<std::vector<NodeId>>>();
  t.positive = d["positive"].cast<std::vector<std::vector<NodeId>>>();
  t.negative = d["negative"].cast<std::vector<std::vector<NodeId>>>();
  for (const auto& s : t.parents) {
    t.degree.push_back(s.size());
    t.d = std::max(t.d, s.size());
  }
  return t;
}

}  // namespace

PYBIND11_MODULE(barpy, m) {
  m.doc() = "Bernoulli autoregressive processes (0-based node ids)";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<BarModel>(m, "Model")
      .def_static("from_json", &model_from_json, py::arg("text"))
      .def("to_json", &model_to_json, py::arg("indent") = 2)
      .def_property_readonly("p", &BarModel::p)
      .def_property_readonly("rho_w", &BarModel::rho_w)
      .def_property_readonly("a_min", &BarModel::a_min)
      .def_property_readonly("b_min", &BarModel::b_min)
      .def("b", &BarModel::b)
      .def("row_sum", &BarModel::row_sum)
      .def("max_row_sum", &BarModel::max_row_sum)
      .def("column_sums", &BarModel::column_sums)
      .def("sign_free", &BarModel::sign_free)
      .def("weights", &weight_matrix)
      .def("signed_weights", &signed_weight_matrix)
      .def("truth", [](const BarModel& mod) { return truth_dict(mod.truth()); })
      .def("hash", &BarModel::hash);

  m.def("d_star", &d_star, py::arg("a_min"), py::arg("b_min"));

  m.def(
      "random_model",
      [](std::size_t p, std::vector<std::size_t> degrees, double a_min, double b_min, double b_max, double rho_w,
         double sign_prob, std::uint64_t seed) {
        RandomModelSpec s{p, std::move(degrees), a_min, b_min, b_max, rho_w, sign_prob};
        return random_model(s, seed).model;
      },
      py::arg("p"), py::arg("degrees"), py::arg("a_min") = 0.1, py::arg("b_min") = 0.1, py::arg("b_max") = 0.2,
      py::arg("rho_w") = 0.5, py::arg("sign_prob") = 0.5, py::arg("seed") = 0);

  m.def(
      "sample_trajectory",
      [](const BarModel& model, std::size_t n, const std::string& init, std::uint64_t seed, std::uint64_t replica,
         const std::string& kind, double lazy_prob, std::optional<std::vector<std::uint8_t>> state) {
        InitSpec spec;
        if (state) spec = InitSpec::explicit_state(*state);
        else if (init == "stationary") spec = InitSpec::stationary();
        else if (init == "burn_in") spec = InitSpec::burn_in();
        else throw Error(ErrorKind::InvalidParameter, "init must be burn_in, stationary or given as state");
        return to_array(
            sample_trajectory(model, n, spec, seed, replica, trajectory_kind_from_string(kind), lazy_prob));
      },
      py::arg("model"), py::arg("n"), py::arg("init") = "burn_in", py::arg("seed") = 0, py::arg("replica") = 0,
      py::arg("kind") = "bar", py::arg("lazy_prob") = 0.0, py::arg("state") = py::none());

  m.def(
      "coupling_times",
      [](const BarModel& model, std::vector<std::uint8_t> x0, std::vector<std::uint8_t> y0, std::size_t max_steps,
         std::uint64_t seed, std::size_t replicas, bool random_walk, double lazy_prob) {
        CouplingOptions o{max_steps, replicas, seed, random_walk ? Walk::RandomWalk : Walk::Synchronous, lazy_prob};
        return coupling_time(model, x0, y0, o).times;
      },
      py::arg("model"), py::arg("x0"), py::arg("y0"), py::arg("max_steps") = 10000, py::arg("seed") = 0,
      py::arg("replicas") = 1000, py::arg("random_walk") = false, py::arg("lazy_prob") = 0.0);

  py::class_<ExactChain>(m, "ExactChain")
      .def(py::init(&build_transition), py::arg("model"))
      .def_property_readonly("p", &ExactChain::p)
      .def_property_readonly("transition", &ExactChain::transition)
      .def_property_readonly("stationary",
                             [](const ExactChain& c) {
                               return std::vector<double>(c.stationary().begin(), c.stationary().end());
                             })
      .def("tv", &tv_to_stationarity, py::arg("n"))
      .def("tv_curve", &tv_curve, py::arg("n_max"))
      .def("mixing_time", &exact_mixing_time, py::arg("theta"), py::arg("max_steps") = 100000)
      .def("nu", &exact_nu, py::arg("m"), py::arg("l"))
      .def("nu_matrix", &exact_nu_matrix)
      .def(
          "conditional",
          [](const ExactChain& c, NodeId i, std::vector<NodeId> subset, std::vector<std::uint8_t> values) {
            return exact_conditional(c, i, subset, values);
          },
          py::arg("i"), py::arg("subset"), py::arg("values"))
      .def("marginals", &exact_marginals)
      .def("margin", [](const ExactChain& c) {
        const auto mg = identifiability_margin(c, c.model().truth());
        return py::make_tuple(mg.chi, mg.identifiable);
      });

  m.def("stationary_marginals", &stationary_marginals, py::arg("model"));

  m.def(
      "mixing_bound",
      [](const BarModel& model, double theta) {
        const auto b = mixing_bound(model, theta);
        return py::make_tuple(b.primary, b.loose);
      },
      py::arg("model"), py::arg("theta") = 0.125);
  m.def(
      "mixing_bound_pr",
      [](std::size_t p, double r, double theta) {
        const auto b = mixing_bound(p, r, theta);
        return py::make_tuple(b.primary, b.loose);
      },
      py::arg("p"), py::arg("max_row_sum"), py::arg("theta") = 0.125);
  m.def(
      "stationary_floors",
      [](const BarModel& model, std::size_t d, double theta, bool refine) {
        return to_json(stationary_floors(model, d, theta, FloorOptions{refine}));
      },
      py::arg("model"), py::arg("d"), py::arg("theta") = 0.125, py::arg("refine") = true,
      "BoundsReport as a JSON string");
  m.def("sample_complexity_selection", &sample_complexity_selection, py::arg("p"), py::arg("gamma"),
        py::arg("theta"), py::arg("eps"), py::arg("beta_tilde"), py::arg("t_mix"), py::arg("C") = 1.0);
  m.def("sample_complexity_trimming", &sample_complexity_trimming, py::arg("p"), py::arg("d"), py::arg("gamma"),
        py::arg("eps_tilde"), py::arg("beta_bar"), py::arg("t_mix"), py::arg("C") = 1.0);
  m.def(
      "fano_lower_bound",
      [](std::size_t p, std::vector<std::size_t> degrees, double eps) { return fano_lower_bound(p, degrees, eps); },
      py::arg("p"), py::arg("degrees"), py::arg("eps"));
  m.def(
      "rw_analysis",
      [](const BarModel& model, double theta, double lazy_prob, double c) {
        const auto r = rw_analysis(model, theta, lazy_prob, c);
        py::dict d;
        d["col_substochastic"] = r.col_substochastic;
        d["column_sums"] = r.column_sums;
        d["contraction"] = r.contraction;
        d["bound_rw"] = r.bound_rw;
        d["bound_lazy"] = r.bound_lazy;
        d["weight_ceiling"] = r.weight_ceiling;
        return d;
      },
      py::arg("model"), py::arg("theta") = 0.125, py::arg("lazy_prob") = 0.0, py::arg("c") = 1.0);

  m.def(
      "nu_hat",
      [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> traj) {
        const auto stats = accumulate(from_array(traj));
        const auto flat = nu_hat_matrix(stats);
        py::array_t<double> out({stats.p(), stats.p()});
        std::copy(flat.begin(), flat.end(), out.mutable_data());
        return out;
      },
      py::arg("trajectory"));
  m.def(
      "observe",
      [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> traj, const std::string& mode,
         std::size_t d, double tau, std::vector<std::size_t> degrees) {
        ObserverConfig cfg{observer_mode_from_string(mode), d, tau, std::move(degrees)};
        return estimate_dict(observe(from_array(traj), cfg));
      },
      py::arg("trajectory"), py::arg("mode") = "full", py::arg("d") = 3, py::arg("tau") = 0.025,
      py::arg("degrees") = std::vector<std::size_t>{});
  m.def(
      "metrics",
      [](const py::dict& estimate, const py::dict& truth) {
        GraphEstimate e;
        e.parents = estimate["parents"].cast<std::vector<std::vector<NodeId>>>();
        e.positive = estimate["positive"].cast<std::vector<std::vector<NodeId>>>();
        e.negative = estimate["negative"].cast<std::vector<std::vector<NodeId>>>();
        e.p = e.parents.size();
        const auto r = metrics(e, truth_from_dict(truth));
        py::dict d;
        d["exact_unsigned"] = r.exact_unsigned;
        d["exact_signed"] = r.exact_signed;
        d["edge_recall"] = r.edge_recall;
        d["edge_accuracy"] = r.edge_accuracy;
        return d;
      },
      py::arg("estimate"), py::arg("truth"));

  m.def(
      "parse_rules",
      [](const std::string& text) { return rules_to_text(parse_rules(text)); }, py::arg("text"),
      "Parse and return the normalised rules text");
  m.def(
      "rules_truth", [](const std::string& text) { return truth_dict(truth_from_network(parse_rules(text))); },
      py::arg("text"));
  m.def(
      "random_andor_network",
      [](std::size_t p, std::size_t fan_in, double noise, std::uint64_t seed) {
        return rules_to_text(random_andor_network(p, fan_in, noise, seed));
      },
      py::arg("p"), py::arg("fan_in"), py::arg("noise"), py::arg("seed") = 0);
  m.def(
      "sample_boolean",
      [](const std::string& rules, std::size_t n, std::size_t burn_in, std::uint64_t seed) {
        return to_array(sample_boolean(parse_rules(rules), n, burn_in, seed));
      },
      py::arg("rules"), py::arg("n"), py::arg("burn_in") = 100, py::arg("seed") = 0);

  m.def(
      "run_sweep",
      [](const std::string& config_json) {
        SweepConfig cfg = sweep_config_from_json(config_json);
        std::ostringstream os;
        write_sweep_csv(run_sweep(cfg), os);
        return os.str();
      },
      py::arg("config"), "Run a sweep from its JSON config and return the CSV text");
}
