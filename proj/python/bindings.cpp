// pybind11 module mmlink._core. States are numpy arrays: pure states as
// length-4 complex vectors, density matrices as 4x4 complex matrices, and
// tomography counts as 9x4 integer arrays (settings ion-major over X, Y, Z;
// outcomes ++, +-, -+, --).

#include <numbers>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmlink/budget.hpp"
#include "mmlink/geometry.hpp"
#include "mmlink/link_sim.hpp"
#include "mmlink/metrics.hpp"
#include "mmlink/noise.hpp"
#include "mmlink/qstate.hpp"
#include "mmlink/tomography.hpp"
#include "mmlink/wavepacket.hpp"

namespace py = pybind11;
using namespace mmlink;

namespace {

constexpr double kTwoPiMega = 2.0 * std::numbers::pi * 1e6;

using CountsArray = py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>;

MeasurementRecord record_from_array(const CountsArray& counts) {
  if (counts.ndim() != 2 || counts.shape(0) != 9 || counts.shape(1) != 4) {
    throw std::invalid_argument("counts must have shape (9, 4)");
  }
  const auto c = counts.unchecked<2>();
  std::vector<MeasurementRecord::Entry> entries;
  const auto settings = all_settings();
  for (py::ssize_t k = 0; k < 9; ++k) {
    MeasurementRecord::Entry e{settings[static_cast<std::size_t>(k)], {}};
    for (py::ssize_t j = 0; j < 4; ++j) e.counts[static_cast<std::size_t>(j)] = c(k, j);
    entries.push_back(e);
  }
  return MeasurementRecord(std::move(entries));
}

CountsArray record_to_array(const MeasurementRecord& record) {
  CountsArray out({9, 4});
  auto o = out.mutable_unchecked<2>();
  const auto settings = all_settings();
  for (py::ssize_t k = 0; k < 9; ++k) {
    const auto& c = record.counts(settings[static_cast<std::size_t>(k)]);
    for (py::ssize_t j = 0; j < 4; ++j) o(k, j) = c[static_cast<std::size_t>(j)];
  }
  return out;
}

wavepacket::LevelScheme scheme_with(double omega_mhz, double gamma) {
  wavepacket::LevelScheme s;
  s.omega_total = omega_mhz * kTwoPiMega;
  s.gamma = gamma;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multimode ion-photon link toolkit";

  m.def("bell_state", [](double theta) { return Vec4(bell_state(theta).amplitudes()); }, py::arg("theta"),
        "Amplitudes of (|up,V> + e^{i theta}|down,H>)/sqrt(2).");
  m.def("werner", [](double p) { return Mat4(DensityMatrix::werner(p).matrix()); }, py::arg("p"));
  m.def("concurrence", [](const Mat4& rho) { return concurrence(DensityMatrix(rho)); }, py::arg("rho"));
  m.def("fidelity", [](const Mat4& rho, const Vec4& psi) { return fidelity(DensityMatrix(rho), PureState::normalized(psi)); },
        py::arg("rho"), py::arg("psi"));
  m.def(
      "optimize_local_rotation",
      [](const Mat4& rho, const Vec4& target, std::uint64_t seed) {
        RotationSearchOptions o;
        o.seed = seed;
        const auto r = optimize_local_rotation(DensityMatrix(rho), PureState::normalized(target), o);
        return py::make_tuple(r.fidelity, r.rotation.angles());
      },
      py::arg("rho"), py::arg("target"), py::arg("seed") = 0x5eed,
      "Maximum fidelity over local rotations and the six Euler angles reaching it.");

  m.def(
      "simulate_counts",
      [](const Mat4& rho, std::uint64_t shots, std::uint64_t seed) {
        return record_to_array(simulate_counts(DensityMatrix(rho), shots, seed));
      },
      py::arg("rho"), py::arg("shots"), py::arg("seed"));
  m.def(
      "mle_reconstruct",
      [](const CountsArray& counts) {
        const auto r = mle_reconstruct(record_from_array(counts));
        return py::make_tuple(Mat4(r.rho.matrix()), r.log_likelihood, r.converged);
      },
      py::arg("counts"), "Returns (rho, log_likelihood, converged).");

  m.def("success_probability", &success_probability, py::arg("p"));
  m.def(
      "multiplicity_distribution",
      [](const std::vector<double>& p) {
        const auto d = multiplicity_distribution(p);
        return py::make_tuple(d.single, d.two, d.three);
      },
      py::arg("p"));
  m.def(
      "detection_probability_with_error",
      [](std::uint64_t counts, std::uint64_t attempts) {
        const auto e = detection_probability_with_error(counts, attempts);
        return py::make_tuple(e.probability, e.stddev);
      },
      py::arg("counts"), py::arg("attempts"));
  m.def("effective_rate", &effective_rate, py::arg("probability"), py::arg("tau_us"));
  m.def(
      "enhancement_factor",
      [](double p_multi, double tau_multi, double p_single, double tau_single) {
        return enhancement_factor({p_multi, tau_multi}, {p_single, tau_single});
      },
      py::arg("p_multi"), py::arg("tau_multi_us"), py::arg("p_single"), py::arg("tau_single_us"));
  m.def(
      "run_link_simulation",
      [](const std::vector<double>& p, std::uint64_t attempts, std::uint64_t seed) {
        const auto r = run_link_simulation(AttemptSchedule::multimode(static_cast<int>(p.size())), p,
                                           {1e9, attempts}, seed);
        py::dict d;
        d["attempts"] = r.stats.attempts;
        d["successes"] = r.successes;
        d["single"] = r.stats.n_single;
        d["double"] = r.stats.n_double;
        d["triple"] = r.stats.n_triple;
        d["attempt_rate_hz"] = r.attempt_rate_hz;
        return d;
      },
      py::arg("p"), py::arg("attempts"), py::arg("seed"));

  m.def(
      "noisy_fidelity",
      [](double measured, double background_rate, double window_s) {
        const auto psi = bell_state(0.0);
        const auto model = ChannelModel::from_measured(measured, background_rate, window_s);
        return fidelity(noisy_state(DensityMatrix::from_pure(psi), model), psi);
      },
      py::arg("measured_probability"), py::arg("background_rate") = 2.0, py::arg("window_s") = 50e-6,
      "Fidelity with psi(0) of the background-contaminated Bell state.");

  m.def(
      "budget_chain",
      [](const std::vector<std::pair<std::string, std::string>>& quoted) {
        std::vector<budget::EfficiencyEntry> entries;
        for (const auto& [name, value] : quoted) entries.push_back(budget::parse_quoted(name, value));
        const auto r = budget::chain_product(entries);
        return py::make_tuple(r.value, r.sigma);
      },
      py::arg("entries"), "Product and sigma of (name, quoted value) pairs such as ('fiber', '0.0136(4)').");

  m.def(
      "equilibrium_positions",
      [](int n, double axial_mhz) { return geometry::equilibrium_positions(n, axial_mhz * kTwoPiMega); }, py::arg("n"),
      py::arg("axial_frequency_mhz"), "Axial positions in micrometres for 40Ca+.");
  m.def("string_angle_from_projection", &geometry::string_angle_from_projection, py::arg("spacing_um"),
        py::arg("projected_um"));
  m.def(
      "gaussian_coupling",
      [](double axial_mhz, double waist_um, double shift_um, double angle_deg) {
        geometry::StringGeometry g;
        g.omega_z = axial_mhz * kTwoPiMega;
        g.waist_um = waist_um;
        g.axial_shift_um = shift_um;
        g.angle_deg = angle_deg;
        return geometry::gaussian_coupling(g);
      },
      py::arg("axial_frequency_mhz") = 0.869, py::arg("waist_um") = 12.1, py::arg("shift_um") = 0.0,
      py::arg("angle_deg") = 85.3);

  m.def("split_drive", &wavepacket::split_drive, py::arg("omega_total"), py::arg("ratio"));
  m.def(
      "stark_shift", [](double omega_mhz) { return wavepacket::stark_shift(scheme_with(omega_mhz, 0.784)) / kTwoPiMega; },
      py::arg("omega_mhz"), "AC Stark shift of the Raman resonance in MHz for the default level scheme.");
  m.def(
      "calibrate_rabi",
      [](double shift_mhz) { return wavepacket::calibrate_rabi(shift_mhz * kTwoPiMega, wavepacket::LevelScheme{}) / kTwoPiMega; },
      py::arg("shift_mhz"), "Omega^- / 2pi in MHz giving the requested Stark shift.");
  m.def(
      "integrate_wavepacket",
      [](double pulse_us, double step_us, double omega_mhz, double gamma, int stride) {
        const auto w = wavepacket::integrate(scheme_with(omega_mhz, gamma), pulse_us, step_us, {stride});
        py::dict d;
        d["time_us"] = w.time_us;
        d["density_H"] = w.density_h;
        d["density_V"] = w.density_v;
        d["cumulative"] = w.cumulative;
        d["emission_probability"] = w.emission_probability();
        d["max_trace_error"] = w.max_trace_error;
        d["bookkeeping_total"] = w.bookkeeping_total();
        return d;
      },
      py::arg("pulse_us") = 50.0, py::arg("step_us") = 1e-3, py::arg("omega_mhz") = 31.47, py::arg("gamma") = 0.784,
      py::arg("output_stride") = 10);
}
