#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "waveplatoon/error.hpp"
#include "waveplatoon/harness.hpp"

namespace py = pybind11;
using namespace waveplatoon;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> to_matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  py::array_t<double> out({rows.size(), cols});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return out;
}

wave::WaveFIR build_fir(double kp, double ki, double xi, int iterations, double fs, double duration) {
  const auto alpha = wave::make_alpha(kp, ki, xi);
  return wave::g1_fir(wave::g1_cf_approx(alpha, iterations), fs, duration);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wave transfer functions and wave-absorbing platoon control";

  static py::exception<Error> exc(m, "WavePlatoonError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(exc, e.what());
    }
  });

  py::enum_<boundary::Variant>(m, "Variant")
      .value("none", boundary::Variant::none)
      .value("front", boundary::Variant::front)
      .value("rear", boundary::Variant::rear)
      .value("two_sided", boundary::Variant::two_sided);

  m.def("alpha", [](double kp, double ki, double xi, std::complex<double> s) {
    return wave::make_alpha(kp, ki, xi)(s);
  }, py::arg("kp"), py::arg("ki"), py::arg("xi"), py::arg("s"));
  m.def("g1_exact", &wave::g1_exact, py::arg("alpha"));
  m.def("g2_exact", &wave::g2_exact, py::arg("alpha"));
  m.def("g1_cf_eval", &wave::g1_cf_eval, py::arg("alpha"), py::arg("iterations"));

  m.def("g1_fir_taps",
        [](double kp, double ki, double xi, int iterations, double fs, double duration) {
          return to_array(build_fir(kp, ki, xi, iterations, fs, duration).taps);
        },
        py::arg("kp") = 4.0, py::arg("ki") = 4.0, py::arg("xi") = 4.0, py::arg("iterations") = 20,
        py::arg("fs") = 100.0, py::arg("duration") = 15.0);

  m.def("kappa",
        [](double kp, double ki, double xi, int iterations) {
          const auto alpha = wave::make_alpha(kp, ki, xi);
          const auto approx = wave::g1_cf_approx(alpha, iterations);
          return py::make_tuple(boundary::kappa_front(alpha, approx, 1),
                                boundary::kappa_rear(alpha, approx).value);
        },
        py::arg("kp") = 4.0, py::arg("ki") = 4.0, py::arg("xi") = 4.0, py::arg("iterations") = 20);

  py::class_<platoon::PlatoonConfig>(m, "PlatoonConfig")
      .def(py::init<>())
      .def_readwrite("N", &platoon::PlatoonConfig::N)
      .def_readwrite("kp", &platoon::PlatoonConfig::kp)
      .def_readwrite("ki", &platoon::PlatoonConfig::ki)
      .def_readwrite("xi", &platoon::PlatoonConfig::xi)
      .def_readwrite("d_ref0", &platoon::PlatoonConfig::d_ref0)
      .def_readwrite("v_ref", &platoon::PlatoonConfig::v_ref)
      .def_readwrite("dt", &platoon::PlatoonConfig::dt)
      .def_readwrite("fs_ctrl", &platoon::PlatoonConfig::fs_ctrl)
      .def_readwrite("iterations", &platoon::PlatoonConfig::iterations)
      .def_readwrite("fir_duration", &platoon::PlatoonConfig::fir_duration)
      .def_readwrite("end_servo_gain", &platoon::PlatoonConfig::end_servo_gain);

  m.def("simulate",
        [](const platoon::PlatoonConfig& config, boundary::Variant variant, double duration,
           std::optional<double> sigma2, std::uint64_t seed, int record_stride) {
          platoon::ScenarioSpec s;
          s.variant = variant;
          s.duration = duration;
          s.record_stride = record_stride;
          if (sigma2) s.noise = platoon::NoiseSpec{*sigma2, seed};
          const auto tr = platoon::run_scenario(config, s);
          py::dict out;
          out["t"] = to_array(tr.t);
          out["positions"] = to_matrix(tr.positions);
          out["velocities"] = to_matrix(tr.velocities);
          out["distances"] = to_matrix(tr.distances);
          out["w0"] = tr.gains.w0;
          out["wr"] = tr.gains.wr;
          const auto ts = harness::settling_time(tr, config.v_ref == 0.0 ? 1.0 : config.v_ref);
          out["settling_time"] = ts ? py::cast(*ts) : py::none();
          out["mse_velocity"] = harness::mse_velocity(tr);
          return out;
        },
        py::arg("config"), py::arg("variant") = boundary::Variant::none, py::arg("duration") = 60.0,
        py::arg("sigma2") = py::none(), py::arg("seed") = 1, py::arg("record_stride") = 1);

  m.def("verify",
        [](std::vector<std::string> suites) {
          harness::VerifyOptions o;
          o.suites = std::move(suites);
          const auto rep = harness::verify(o);
          py::list checks;
          for (const auto& c : rep.checks)
            checks.append(py::dict(py::arg("suite") = c.suite, py::arg("name") = c.name,
                                   py::arg("passed") = c.passed, py::arg("measured") = c.measured,
                                   py::arg("threshold") = c.threshold));
          return py::make_tuple(rep.all_passed(), checks);
        },
        py::arg("suites") = std::vector<std::string>{});
}
