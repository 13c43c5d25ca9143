// Python bindings. Fields cross the boundary as (N, N) float64 arrays in
// row-major (i, j) order; everything else is plain numbers, strings or dicts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <filesystem>
#include <memory>

#include "nch/config.hpp"
#include "nch/driver.hpp"
#include "nch/errors.hpp"
#include "nch/io.hpp"

namespace py = pybind11;
using namespace nch;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Field to_field(const GridGeometry& g, const Array& a) {
  if (a.ndim() != 2 || a.shape(0) != g.n() || a.shape(1) != g.n()) {
    throw DimensionError("expected an array of shape (" + std::to_string(g.n()) + ", " +
                         std::to_string(g.n()) + ")");
  }
  return Field(g, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Field& f) {
  Array out({f.n(), f.n()});
  std::memcpy(out.mutable_data(), f.values().data(), f.size() * sizeof(double));
  return out;
}

py::dict records_dict(const std::vector<DiagnosticsRecord>& records) {
  const auto column = [&](auto get) {
    py::array_t<double> col(static_cast<py::ssize_t>(records.size()));
    auto* p = col.mutable_data();
    for (const auto& r : records) *p++ = get(r);
    return col;
  };
  py::dict d;
  d["step"] = column([](const auto& r) { return double(r.step); });
  d["time"] = column([](const auto& r) { return r.time; });
  d["mass"] = column([](const auto& r) { return r.mass; });
  d["energy"] = column([](const auto& r) { return r.energy; });
  d["modified_energy"] =
      column([](const auto& r) { return r.modified_energy.value_or(std::nan("")); });
  d["increment_l2"] = column([](const auto& r) { return r.increment_l2; });
  d["increment_hneg1"] = column([](const auto& r) { return r.increment_hneg1; });
  d["grad_omega_l2"] = column([](const auto& r) { return r.grad_omega_l2; });
  d["omega_variance"] = column([](const auto& r) { return r.omega_variance; });
  d["newton_iters"] = column([](const auto& r) { return double(r.newton_iters); });
  return d;
}

// Owns everything a run references, so the stepper's borrowed pointers stay valid.
class Simulation {
 public:
  explicit Simulation(RunConfig cfg)
      : cfg_(std::move(cfg)),
        geometry_(cfg_.grid_n, cfg_.grid_l),
        cache_(geometry_),
        kernel_(sample_kernel(kernel_params(cfg_), cache_)),
        scheme_(scheme_config(cfg_)) {}

  static std::unique_ptr<Simulation> from_text(const std::string& text) {
    return std::make_unique<Simulation>(parse_config(text));
  }
  static std::unique_ptr<Simulation> from_file(const std::string& path) {
    return std::make_unique<Simulation>(load_config(path));
  }

  int n() const { return geometry_.n(); }
  double length() const { return geometry_.length(); }
  double conv_one() const { return kernel_.conv_one(); }
  double gamma0() const { return nch::gamma0(kernel_, scheme_.epsilon); }
  std::string scheme() const { return std::string(to_string(scheme_.scheme)); }
  std::string config_text() const { return emit_config(cfg_); }

  py::dict solvability() const {
    const SolvabilityReport r = check_solvability(scheme_, kernel_, cache_);
    py::dict d;
    d["admissible"] = r.admissible;
    d["margin"] = r.margin;
    d["per_mode_min"] = r.per_mode_min;
    d["gamma0"] = r.gamma0;
    d["conv_one"] = r.conv_one;
    d["beta"] = r.beta;
    d["detail"] = r.detail;
    return d;
  }

  Array initial_field() const { return to_array(nch::initial_field(cfg_, geometry_)); }

  double energy(const Array& u) const { return nch::energy(to_field(geometry_, u), model()); }
  Array chemical_potential(const Array& u) const {
    return to_array(nch::chemical_potential(to_field(geometry_, u), model()));
  }
  Array laplacian(const Array& u) const { return to_array(nch::laplacian(to_field(geometry_, u))); }
  Array convolve(const Array& u) const {
    return to_array(nch::convolve(kernel_, to_field(geometry_, u), cache_));
  }
  Array kernel_symbol() const {
    return to_array(Field(geometry_, std::vector<double>(kernel_.symbol().begin(),
                                                         kernel_.symbol().end())));
  }

  // Advances `steps` steps from u (and u_prev for the two-step schemes).
  py::tuple step(const Array& u, std::optional<Array> u_prev, int steps) const {
    const Stepper stepper(scheme_, kernel_, cache_);
    SchemeState st{to_field(geometry_, u), std::nullopt, std::nullopt, 0, 0.0};
    if (u_prev) {
      st.u_prev = to_field(geometry_, *u_prev);
      st.step_index = 1;
    }
    {
      py::gil_scoped_release release;
      for (int k = 0; k < steps; ++k) stepper.advance(st);
    }
    py::object prev = st.u_prev ? py::object(to_array(*st.u_prev)) : py::none();
    return py::make_tuple(to_array(st.u_curr), prev);
  }

  py::dict run(std::optional<Array> u0, std::optional<long> max_steps) const {
    RunOptions opts = run_options(cfg_);
    if (max_steps) opts.max_steps = *max_steps;
    const Field start = u0 ? to_field(geometry_, *u0) : nch::initial_field(cfg_, geometry_);
    RunResult res = [&] {
      py::gil_scoped_release release;
      return nch::run(start, scheme_, kernel_, cache_, opts);
    }();
    py::dict d;
    d["u"] = to_array(res.final_state.u_curr);
    d["steps"] = res.final_state.step_index;
    d["time"] = res.final_state.time;
    d["termination"] = std::string(to_string(res.termination));
    d["error"] = res.error_detail;
    d["equilibrium_residual"] = res.equilibrium_residual;
    d["initial_energy"] = res.initial_energy;
    d["records"] = records_dict(res.records);
    return d;
  }

 private:
  Model model() const { return Model{kernel_, scheme_.epsilon, scheme_.potential, cache_}; }

  RunConfig cfg_;
  GridGeometry geometry_;
  SpectralCache cache_;
  SampledKernel kernel_;
  SchemeConfig scheme_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Periodic nonlocal Cahn-Hilliard solver";

  auto base = py::register_exception<Error>(m, "NchError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<StabilityError>(m, "StabilityError", base);
  py::register_exception<SolverError>(m, "SolverError", base);
  py::register_exception<DimensionError>(m, "DimensionError", base);
  py::register_exception<IoError>(m, "IoError", base);

  m.def("laplacian_eigenvalue",
        [](int n, double length, int k, int l) {
          return nch::laplacian_eigenvalue(GridGeometry(n, length), k, l);
        },
        py::arg("n"), py::arg("length"), py::arg("k"), py::arg("l"));
  m.def("laplacian",
        [](const Array& u, double length) {
          return to_array(nch::laplacian(to_field(GridGeometry(int(u.shape(0)), length), u)));
        },
        py::arg("u"), py::arg("length") = 1.0);
  m.def("default_config", [] { return emit_config(RunConfig{}); });

  py::class_<Simulation>(m, "Simulation")
      .def(py::init(&Simulation::from_text), py::arg("config_text") = "")
      .def_static("from_file", &Simulation::from_file, py::arg("path"))
      .def_property_readonly("n", &Simulation::n)
      .def_property_readonly("length", &Simulation::length)
      .def_property_readonly("conv_one", &Simulation::conv_one)
      .def_property_readonly("gamma0", &Simulation::gamma0)
      .def_property_readonly("scheme", &Simulation::scheme)
      .def("config_text", &Simulation::config_text)
      .def("solvability", &Simulation::solvability)
      .def("initial_field", &Simulation::initial_field)
      .def("energy", &Simulation::energy, py::arg("u"))
      .def("chemical_potential", &Simulation::chemical_potential, py::arg("u"))
      .def("laplacian", &Simulation::laplacian, py::arg("u"))
      .def("convolve", &Simulation::convolve, py::arg("u"))
      .def("kernel_symbol", &Simulation::kernel_symbol)
      .def("step", &Simulation::step, py::arg("u"), py::arg("u_prev") = py::none(),
           py::arg("steps") = 1)
      .def("run", &Simulation::run, py::arg("u0") = py::none(), py::arg("max_steps") = py::none());
}
