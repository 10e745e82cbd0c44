#include "mmlink/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mmlink/budget.hpp"
#include "mmlink/format.hpp"
#include "mmlink/geometry.hpp"
#include "mmlink/link_sim.hpp"
#include "mmlink/metrics.hpp"
#include "mmlink/noise.hpp"
#include "mmlink/seeds.hpp"
#include "mmlink/tomography.hpp"
#include "mmlink/wavepacket.hpp"

namespace mmlink {

namespace {

constexpr double kTwoPiMega = 2.0 * std::numbers::pi * 1e6;

std::string number_with_sigma(double v, double s) { return s > 0.0 ? format_uncertain(v, s) : format_general(v, 6); }

}  // namespace

bool ReportRow::pass() const { return std::abs(computed - published) <= tolerance; }

double ReportRow::sigma_distance() const {
  const double s = std::hypot(published_sigma, computed_sigma);
  if (!(s > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(computed - published) / s;
}

std::vector<ReportRow> reference_report(const RunConfig& config) {
  std::vector<ReportRow> rows;
  auto add = [&](std::string q, double published, double published_sigma, double computed, double computed_sigma, double tol) {
    rows.push_back({std::move(q), published, published_sigma, computed, computed_sigma, tol});
  };

  // Detection statistics.
  const auto& p854 = config.link.p_854;
  const auto& p1550 = config.link.p_1550;
  add("success probability, 854 nm", 0.693, 0.004, success_probability(p854), 0.0, 3.5 * 0.004);
  double mean = 0.0;
  for (double p : p854) mean += p;
  add("mean detections per attempt, 854 nm", 0.981, 0.005, mean, 0.0, 2.0 * 0.005);
  const double attempts_854 = 41645.0;
  const auto m = multiplicity_distribution(p854);
  add("N_single, A = 41645", 18337, std::sqrt(18337.0), attempts_854 * m.single, 0.0, 2.5 * std::sqrt(18337.0));
  add("N_double, A = 41645", 9037, std::sqrt(9037.0), attempts_854 * m.two, 0.0, 2.5 * std::sqrt(9037.0));
  add("N_triple, A = 41645", 1485, std::sqrt(1485.0), attempts_854 * m.three, 0.0, 2.5 * std::sqrt(1485.0));
  const auto w1 = detection_probability_with_error(13127, 41645);
  add("window 1 probability, 854 nm", 0.315, 0.003, w1.probability, w1.stddev, 0.0005);
  const auto w2 = detection_probability_with_error(693, 882982);
  add("window 2 probability, 101 km", 7.8e-4, 0.3e-4, w2.probability, w2.stddev, 0.05e-4);
  const double p_multi = success_probability(p1550);
  add("success probability, 101 km", 2.16e-3, 0.05e-3, p_multi, 0.0, 0.05e-3);

  // Rates.
  const auto multi = config.schedule.multimode();
  const auto single = config.schedule.single_ion();
  const double tau_multi = multi.attempt_duration_us();
  const double tau_single = single.attempt_duration_us();
  const double p_single = config.link.single_ion_p;
  add("multimode rate (Hz)", 2.85, 0.07, effective_rate(p_multi, tau_multi), 0.0, 0.01);
  add("single-ion rate (Hz)", 1.23, 0.05, effective_rate(p_single, tau_single), 0.0, 0.01);
  add("single-ion travel-limited rate (Hz)", 1.59, 0.07, effective_rate(p_single, config.schedule.single_travel_us), 0.0,
      0.07);
  add("multimode enhancement", 2.3, 0.1, enhancement_factor({p_multi, tau_multi}, {p_single, tau_single}), 0.0, 0.1);

  // Background-noise fidelities.
  const double published_f[] = {0.88, 0.90, 0.90};
  const auto psi = bell_state(0.0);
  const auto ideal = DensityMatrix::from_pure(psi);
  for (std::size_t i = 0; i < std::min<std::size_t>(3, p1550.size()); ++i) {
    const auto model = ChannelModel::from_measured(p1550[i], config.channel.background_rate, config.channel.window,
                                                   config.channel.transmission);
    add("noisy-state fidelity, window " + std::to_string(i + 1), published_f[i], 0.0, fidelity(noisy_state(ideal, model), psi), 0.0,
        0.01);
  }

  // Efficiency budgets.
  const auto b854 = budget::chain_product(budget::chain_854nm());
  add("854 nm path efficiency budget", 0.53, 0.03, b854.value, b854.sigma, 0.005);
  add("854 nm budget vs model 0.518", 0.518, 0.0, b854.value, b854.sigma, b854.sigma);
  const auto b1550 = budget::chain_product(budget::chain_1550nm());
  add("1550 nm path efficiency budget", 15e-4, 1.2e-4, b1550.value, b1550.sigma, 0.5e-4);
  add("1550 nm budget vs model 1.26e-3", 1.26e-3, 0.0, b1550.value, b1550.sigma, b1550.sigma);

  // Geometry.
  auto g = config.geometry.string;
  g.positions = geometry::equilibrium_positions(g.n_ions, g.omega_z, g.mass);
  const auto mid = static_cast<std::size_t>(g.n_ions / 2);
  const double spacing = g.positions[mid] - g.positions[mid - 1];
  add("ion spacing (um)", 5.26, 0.0, spacing, 0.0, 0.02);
  add("string angle (deg)", 85.3, 0.0, geometry::string_angle_from_projection(spacing, config.geometry.projection_um), 0.0,
      0.1);
  if (g.n_ions == 3) {
    const std::vector<geometry::CouplingTarget> targets{{0.0, {0.83, 1.0, 0.83}},
                                                        {config.geometry.fit_shift_um, {0.739, 0.987, 0.894}}};
    g.waist_um = geometry::fit_waist(g, targets);
    add("fitted waist in [11.5, 12.5] (um)", 12.0, 0.0, g.waist_um, 0.0, 0.5);
    for (const auto& t : targets) {
      g.axial_shift_um = t.axial_shift_um;
      const auto x = geometry::gaussian_coupling(g);
      const double tol = t.axial_shift_um == 0.0 ? 0.01 : 0.02;
      for (std::size_t i = 0; i < x.size(); ++i) {
        add("x_" + std::to_string(i + 1) + " at shift " + format_general(t.axial_shift_um, 3) + " um", t.x[i], 0.0, x[i], 0.0, tol);
      }
    }
  }

  // Drive calibration.
  const auto& scheme = config.wavepacket.scheme;
  const double o88 = wavepacket::calibrate_rabi(0.88 * kTwoPiMega, scheme);
  const double o82 = wavepacket::calibrate_rabi(0.82 * kTwoPiMega, scheme);
  add("Omega for 0.88 MHz Stark shift (MHz)", 31.47, 0.0, o88 / kTwoPiMega, 0.0, 0.05);
  add("Omega(0.82 MHz) / Omega(0.88 MHz)", 30.41 / 31.47, 0.0, o82 / o88, 0.0, 0.02);
  auto calibrated = scheme;
  calibrated.omega_total = o88;
  add("Stark shift after calibration (MHz)", 0.88, 0.0, wavepacket::stark_shift(calibrated) / kTwoPiMega, 0.0, 0.88e-3);

  // Property checks: the expected value is exact, the tolerance is the bound.
  const auto w = wavepacket::integrate(scheme, config.wavepacket.pulse_us, config.wavepacket.step_us,
                                       {config.wavepacket.output_stride});
  add("wavepacket trace error", 0.0, 0.0, w.max_trace_error, 0.0, 1e-9);
  add("wavepacket bookkeeping error", 0.0, 0.0, std::abs(w.bookkeeping_total() - 1.0), 0.0, 1e-6);

  const std::uint64_t seed = config.seed;
  const auto record = simulate_counts(DensityMatrix::werner(0.8), 100000, derive_seed(seed, "report", "werner"));
  const auto rec = mle_reconstruct(record);
  add("Werner(0.8) reconstructed concurrence", 0.7, 0.0, concurrence(rec.rho), 0.0, 0.02);
  add("Werner(0.8) reconstructed fidelity", 0.85, 0.0, fidelity(rec.rho, psi), 0.0, 0.01);
  const auto small = simulate_counts(DensityMatrix::werner(0.8), 2500, derive_seed(seed, "report", "bootstrap-counts"));
  BootstrapOptions bo;
  bo.resamples = 100;
  bo.seed = derive_seed(seed, "report", "bootstrap");
  const Statistic conc = [](const DensityMatrix& r) { return concurrence(r); };
  const double s1 = monte_carlo_uncertainty(small, conc, bo).stddev;
  const double s4 = monte_carlo_uncertainty(small.scaled(4), conc, bo).stddev;
  add("bootstrap stddev ratio at 4x counts", 2.0, 0.0, s1 / s4, 0.0, 0.6);

  double worst = 0.0;
  for (int k = 0; k < 8; ++k) {
    const double theta = 2.0 * std::numbers::pi * (k + 0.5) / 8.0;
    const auto r = optimize_local_rotation(DensityMatrix::from_pure(bell_state(theta)), psi);
    worst = std::max(worst, std::abs(r.fidelity - 1.0));
  }
  add("rotation search |F - 1|, pure Bell phases", 0.0, 0.0, worst, 0.0, 1e-6);

  const auto sim = run_link_simulation(multi, p854, {1e9, 1'000'000}, derive_seed(seed, "report", "link-sim"));
  const double n = static_cast<double>(sim.stats.attempts);
  const double ps = success_probability(p854);
  const double z = std::abs(static_cast<double>(sim.successes) - n * ps) / std::sqrt(n * ps * (1.0 - ps));
  add("simulated success count deviation (sigma)", 0.0, 0.0, z, 0.0, 5.0);
  return rows;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : rows) {
    const double d = r.sigma_distance();
    out += "\"" + r.quantity + "\"," + number_with_sigma(r.published, r.published_sigma) + "," +
           number_with_sigma(r.computed, r.computed_sigma) + "," + (std::isnan(d) ? std::string("") : format_fixed(d, 2)) + "," +
           format_general(r.tolerance, 3) + "," + (r.pass() ? "PASS" : "FAIL") + "\n";
  }
  return out;
}

std::string report_text(const std::vector<ReportRow>& rows) {
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.quantity.size());
  auto pad = [](std::string s, std::size_t n) {
    s.resize(std::max(n, s.size()), ' ');
    return s;
  };
  std::string out = pad("quantity", width) + "  " + pad("published", 14) + pad("computed", 16) + pad("sigma", 8) + "status\n";
  int failed = 0;
  for (const auto& r : rows) {
    const double d = r.sigma_distance();
    out += pad(r.quantity, width) + "  " + pad(number_with_sigma(r.published, r.published_sigma), 14) +
           pad(number_with_sigma(r.computed, r.computed_sigma), 16) + pad(std::isnan(d) ? "-" : format_fixed(d, 2), 8) +
           (r.pass() ? "PASS" : "FAIL") + "\n";
    failed += r.pass() ? 0 : 1;
  }
  out += std::to_string(rows.size() - static_cast<std::size_t>(failed)) + "/" + std::to_string(rows.size()) + " checks passed\n";
  return out;
}

}  // namespace mmlink
