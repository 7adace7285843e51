#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "brwlab/config.hpp"
#include "brwlab/experiment.hpp"
#include "brwlab/randwalk.hpp"

namespace py = pybind11;
using namespace brwlab;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

StepDistribution measure(const Group& g, const std::string& kind, double laziness, double alpha) {
  return make_measure(g, MeasureConfig{.kind = kind, .laziness = laziness, .alpha = alpha});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random walks, branching random walks and boundary dimension on groups";
  m.attr("__version__") = BRWLAB_VERSION;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<CapExceeded>(m, "CapExceeded", PyExc_RuntimeError);
  py::register_exception<DivergentSeries>(m, "DivergentSeries", PyExc_ArithmeticError);

  py::class_<Group>(m, "Group")
      .def(py::init([](const std::string& label) { return Group(parse_group_spec(label)); }), py::arg("label"))
      .def_property_readonly("label", [](const Group& g) { return g.spec().label(); })
      .def("normal_form", [](const Group& g, const std::string& w) { return g.format(g.parse(w)); })
      .def("multiply",
           [](const Group& g, const std::string& a, const std::string& b) {
             return g.format(g.multiply(g.parse(a), g.parse(b)));
           })
      .def("inverse", [](const Group& g, const std::string& a) { return g.format(g.inverse(g.parse(a))); })
      .def("word_length", [](const Group& g, const std::string& a) { return g.word_length(g.parse(a)); })
      .def("sphere_sizes", &Group::sphere_sizes, py::arg("n_max"))
      .def("sphere", [](const Group& g, int n) {
        std::vector<std::string> out;
        for (const auto& x : g.sphere(n)) out.push_back(g.format(x));
        return out;
      });

  m.def(
      "spectral_radius",
      [](const Group& g, int N, const std::string& kind, double laziness, double alpha) {
        const auto e = spectral_radius(g, measure(g, kind, laziness, alpha), N);
        return py::dict(py::arg("rho_lower") = e.rho_lower, py::arg("rho_extrapolated") = e.rho_extrapolated,
                        py::arg("R_hat") = e.R_hat, py::arg("monotone") = e.monotone);
      },
      py::arg("group"), py::arg("N") = 40, py::arg("measure") = "simple", py::arg("laziness") = 0.0,
      py::arg("alpha") = 0.5);

  m.def(
      "green",
      [](const Group& g, double r, const std::string& x, int N, const std::string& kind, double alpha) {
        const auto v = green(g, measure(g, kind, 0.0, alpha), r, g.parse(x), N);
        return py::dict(py::arg("value") = v.value, py::arg("tail_bound") = v.tail_bound,
                        py::arg("certified") = v.certified);
      },
      py::arg("group"), py::arg("r"), py::arg("x") = "", py::arg("N") = 60, py::arg("measure") = "simple",
      py::arg("alpha") = 0.5);

  m.def(
      "omega",
      [](const Group& g, double r, int n_max, const std::string& kind, double alpha) {
        const auto engine = make_green_engine(g, measure(g, kind, 0.0, alpha));
        const auto e = omega_estimate(*engine, r, n_max);
        return py::dict(py::arg("omega_hat") = e.omega_hat, py::arg("residual") = e.residual,
                        py::arg("C_hat") = e.C_hat, py::arg("H") = e.H, py::arg("R_hat") = engine->critical_radius());
      },
      py::arg("group"), py::arg("r"), py::arg("n_max") = 14, py::arg("measure") = "simple", py::arg("alpha") = 0.5);

  m.def("render_config", [](const std::string& yaml) { return render_config(parse_config(yaml)); }, py::arg("yaml"));
  m.def("config_hash", [](const std::string& yaml) { return config_hash(parse_config(yaml)); }, py::arg("yaml"));

  m.def(
      "run_experiment",
      [](const std::string& yaml, const std::string& experiment, std::optional<std::string> out,
         std::optional<std::uint64_t> seed, std::optional<int> threads, bool check) {
        auto c = parse_config(yaml);
        if (!experiment.empty()) c.kind = parse_experiment_kind(experiment);
        if (out) c.out = *out;
        if (seed) c.seed = *seed;
        if (threads) c.threads = *threads;
        RunManifest man;
        {
          py::gil_scoped_release release;
          man = run_experiment(c, {.check = check});
        }
        auto d = to_python(man.to_json());
        d["exit_code"] = man.exit_code();
        return d;
      },
      py::arg("yaml") = "{}", py::arg("experiment") = "", py::arg("out") = py::none(), py::arg("seed") = py::none(),
      py::arg("threads") = py::none(), py::arg("check") = false);
}
