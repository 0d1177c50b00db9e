#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phaseless/config.hpp"
#include "phaseless/error.hpp"
#include "phaseless/forward_medium.hpp"
#include "phaseless/forward_obstacle.hpp"
#include "phaseless/forward_roughsurface.hpp"
#include "phaseless/inversion_lsm.hpp"
#include "phaseless/phase_recovery.hpp"
#include "phaseless/phaseless.hpp"
#include "phaseless/scenes.hpp"
#include "phaseless/specfun.hpp"
#include "phaseless/validation.hpp"

namespace py = pybind11;
using namespace phaseless;

namespace {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::Config: return "config";
    case ErrorKind::Data: return "data";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Ambiguous: return "ambiguous";
  }
  return "unknown";
}

DirectionGrid grid_from(const std::vector<double>& angles) {
  DirectionGrid g{angles};
  g.validate();
  return g;
}

// Default discretization per scene variant, matching the validate suite.
FarFieldMatrix far_field(const std::string& name, double k, int n, int quadrature, double cells_per_wavelength) {
  const Scene s = builtin_scene(name);
  const Wavenumber kw(k);
  switch (s.variant) {
    case SceneVariant::Obstacle:
      return ObstacleSolver(s, kw, quadrature).multistatic(DirectionGrid::uniform(n), DirectionGrid::uniform(n));
    case SceneVariant::Medium:
      return MediumSolver(s, kw, 2 * kPi / (k * cells_per_wavelength))
          .multistatic(DirectionGrid::uniform(n), DirectionGrid::uniform(n));
    case SceneVariant::RoughSurface:
      return RoughSurfaceSolver(s, kw, quadrature).multistatic(DirectionGrid::upper(n), DirectionGrid::lower(n));
  }
  fail(ErrorKind::Config, "unknown scene variant");
}

}  // namespace

PYBIND11_MODULE(_phaseless, m) {
  m.doc() = "Phaseless inverse scattering: forward solvers, phase recovery and sampling";

  // Leaked on purpose: the translator may run until interpreter shutdown.
  static const py::handle exc = py::exception<Error>(m, "PhaselessError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(exc)(e.what());
      inst.attr("kind") = kind_name(e.kind());
      PyErr_SetObject(exc.ptr(), inst.ptr());
    }
  });

  m.def("bessel_j", &bessel_j, py::arg("n"), py::arg("x"));
  m.def("bessel_y", &bessel_y, py::arg("n"), py::arg("x"));
  m.def("hankel1", &hankel1, py::arg("n"), py::arg("x"));
  m.def("builtin_scene_names", &builtin_scene_names);

  py::class_<FarFieldMatrix>(m, "FarField")
      .def(py::init([](Eigen::MatrixXcd values, std::vector<double> obs, std::vector<double> inc, double k) {
             FarFieldMatrix F{std::move(values), grid_from(obs), grid_from(inc), k};
             F.validate();
             return F;
           }),
           py::arg("values"), py::arg("obs_angles"), py::arg("inc_angles"), py::arg("k"))
      .def_readonly("values", &FarFieldMatrix::values)
      .def_property_readonly("obs_angles", [](const FarFieldMatrix& F) { return F.obs.angles; })
      .def_property_readonly("inc_angles", [](const FarFieldMatrix& F) { return F.inc.angles; })
      .def_readonly("k", &FarFieldMatrix::k)
      .def("write_csv", [](const FarFieldMatrix& F, const std::string& path) { write_farfield_csv(path, F); })
      .def_static("read_csv", [](const std::string& path) { return read_farfield_csv(path); });

  m.def("far_field", &far_field, py::arg("scene"), py::arg("k") = 5.0, py::arg("n") = 64,
        py::arg("quadrature") = 128, py::arg("cells_per_wavelength") = 16.0,
        "Multistatic far field of a builtin scene; rough surfaces use n upward x n downward directions.");
  m.def("translate", &translate_farfield, py::arg("F"), py::arg("z"));

  py::class_<PhaselessDataset>(m, "Dataset")
      .def_readonly("mod_single", &PhaselessDataset::mod_single)
      .def_readonly("mod_ref", &PhaselessDataset::mod_ref)
      .def_readonly("mod_super", &PhaselessDataset::mod_super)
      .def_readonly("d0_index", &PhaselessDataset::d0_index)
      .def_readonly("noise_level", &PhaselessDataset::noise_level);

  m.def("synthesize_dataset",
        py::overload_cast<const FarFieldMatrix&, int, double, std::uint64_t>(&synthesize_dataset),
        py::arg("F"), py::arg("d0_index") = 0, py::arg("noise_level") = 0.0, py::arg("seed") = 0);
  m.def("dataset_gap", &dataset_gap);

  m.def(
      "recover",
      [](const PhaselessDataset& data, const std::string& scene, bool fix_gauge) {
        const Scene s = builtin_scene(scene);
        if (!s.ball) fail(ErrorKind::Config, "scene '" + scene + "' has no reference ball");
        RecoveredField rec = recover(data, *s.ball);
        if (fix_gauge) rec = fix_global_phase(rec, *s.ball, s.enclosing_radius);
        py::dict out;
        out["F_rec"] = rec.F_rec;
        out["branch"] = to_string(rec.branch);
        out["branch_score_ratio"] = rec.branch_score_ratio;
        out["global_phase_fixed"] = rec.global_phase_fixed;
        out["gauge"] = rec.report.gauge;
        return out;
      },
      py::arg("data"), py::arg("scene"), py::arg("fix_gauge") = false,
      "Phase recovery with the reference ball of a builtin scene.");

  m.def(
      "indicator",
      [](const FarFieldMatrix& F, std::array<double, 4> box, int nx, int ny, double noise_level, bool log_scale) {
        const IndicatorMap map = indicator_map(F, SamplingGrid{box[0], box[1], box[2], box[3], nx, ny}, noise_level);
        return log_scale ? map.log_normalized() : map.normalized();
      },
      py::arg("F"), py::arg("box"), py::arg("nx"), py::arg("ny"), py::arg("noise_level") = 0.0,
      py::arg("log_scale") = true, "Normalized LSM indicator, rows along y.");
  m.def(
      "probe_ratio",
      [](const FarFieldMatrix& F, std::array<double, 2> b, double noise_level) {
        return probe_ratio(F, Point(b[0], b[1]), noise_level);
      },
      py::arg("F"), py::arg("b"), py::arg("noise_level") = 0.0);

  m.def(
      "validate",
      [](const std::string& suite) {
        py::list rows;
        for (const CheckResult& c : run_validation(suite).checks) {
          py::dict r;
          r["name"] = c.name;
          r["passed"] = c.passed;
          r["value"] = c.value;
          r["relation"] = c.relation;
          r["threshold"] = c.threshold;
          rows.append(r);
        }
        return rows;
      },
      py::arg("suite") = "fast");
  m.def("config_hash", [](const std::string& path) { return load_config(path).hash(); });
}
