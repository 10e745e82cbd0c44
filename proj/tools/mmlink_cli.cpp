// mmlink: command-line front end.
//
// Exit status: 0 success, 1 a check failed (or a computation failed),
// 2 usage or input error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmlink/budget.hpp"
#include "mmlink/config.hpp"
#include "mmlink/format.hpp"
#include "mmlink/geometry.hpp"
#include "mmlink/link_sim.hpp"
#include "mmlink/metrics.hpp"
#include "mmlink/noise.hpp"
#include "mmlink/qstate.hpp"
#include "mmlink/report.hpp"
#include "mmlink/seeds.hpp"
#include "mmlink/tomography.hpp"
#include "mmlink/wavepacket.hpp"

namespace fs = std::filesystem;
using namespace mmlink;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr double kTwoPiMega = 2.0 * std::numbers::pi * 1e6;

// Collects summary lines and pass/fail checks for one command.
class Summary {
 public:
  explicit Summary(std::string title) : text_(title + "\n" + std::string(title.size(), '=') + "\n\n") {}

  void line(const std::string& s) { text_ += s + "\n"; }
  void kv(const std::string& key, const std::string& value) { text_ += key + ": " + value + "\n"; }
  void check(const std::string& what, bool ok) {
    text_ += std::string(ok ? "[PASS] " : "[FAIL] ") + what + "\n";
    failed_ = failed_ || !ok;
  }
  bool failed() const { return failed_; }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
  bool failed_ = false;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int finish(const fs::path& out_dir, const std::string& command, const Summary& summary) {
  write_file(out_dir / (command + "_summary.txt"), summary.text());
  std::cout << summary.text();
  return summary.failed() ? kCheckFailed : kOk;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
  return out + "\n";
}

std::string g17(double v) { return format_general(v, 17); }

struct StateSpec {
  DensityMatrix rho = DensityMatrix::maximally_mixed();
  std::optional<PureState> pure;
};

// "bell:THETA", "werner:P", "product:ZION,ZPHOTON" or "file:PATH".
StateSpec parse_state(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("bad number '" + s + "' in state '" + spec + "'");
    return v;
  };
  if (kind == "bell") {
    const auto psi = bell_state(arg.empty() ? 0.0 : number(arg));
    return {DensityMatrix::from_pure(psi), psi};
  }
  if (kind == "werner") return {DensityMatrix::werner(number(arg)), std::nullopt};
  if (kind == "product") {
    const auto comma = arg.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("product state needs 'product:ZION,ZPHOTON'");
    const auto psi = product_state(static_cast<int>(number(arg.substr(0, comma))), static_cast<int>(number(arg.substr(comma + 1))));
    return {DensityMatrix::from_pure(psi), psi};
  }
  if (kind == "file") return {density_matrix_from_text(read_file(arg)), std::nullopt};
  throw std::invalid_argument("unknown state '" + spec + "' (use bell:THETA, werner:P, product:ZI,ZP or file:PATH)");
}

// ---------------------------------------------------------------- commands

int cmd_geometry(const RunConfig& cfg, const fs::path& out, std::optional<double> shift) {
  auto g = cfg.geometry.string;
  if (shift) g.axial_shift_um = *shift;
  g.positions = geometry::equilibrium_positions(g.n_ions, g.omega_z, g.mass);
  const auto x = geometry::gaussian_coupling(g);

  std::string csv = "ion,position_um,coupling_x\n";
  for (std::size_t i = 0; i < g.positions.size(); ++i) csv += csv_row({std::to_string(i + 1), g17(g.positions[i]), g17(x[i])});
  write_file(out / "geometry_positions.csv", csv);

  Summary s("geometry");
  s.kv("axial frequency (MHz)", format_general(g.omega_z / kTwoPiMega, 6));
  s.kv("length scale (um)", format_fixed(geometry::length_scale_um(g.omega_z, g.mass), 4));
  const auto mid = static_cast<std::size_t>(g.n_ions / 2);
  const double spacing = g.positions[mid] - g.positions[mid - 1];
  s.kv("central ion spacing (um)", format_fixed(spacing, 4));
  s.kv("angle from projected spacing " + format_general(cfg.geometry.projection_um, 4) + " um (deg)",
       format_fixed(geometry::string_angle_from_projection(spacing, cfg.geometry.projection_um), 3));
  s.kv("axial frequency for that projection at " + format_general(g.angle_deg, 4) + " deg (MHz)",
       format_fixed(geometry::find_axial_frequency(cfg.geometry.projection_um, g.angle_deg, g.mass, g.n_ions) / kTwoPiMega, 4));
  s.kv("waist (um)", format_fixed(g.waist_um, 3));
  s.kv("axial shift (um)", format_fixed(g.axial_shift_um, 3));
  std::string xs;
  for (std::size_t i = 0; i < x.size(); ++i) xs += (i ? ", " : "") + format_fixed(x[i], 3);
  s.kv("coupling factors x_i", xs);
  return finish(out, "geometry", s);
}

int cmd_rates(const RunConfig& cfg, const fs::path& out) {
  const auto multi = cfg.schedule.multimode();
  const auto single = cfg.schedule.single_ion();
  const double p_multi = success_probability(cfg.link.p_1550);
  const double p_single = cfg.link.single_ion_p;
  struct Row {
    std::string label;
    double p, tau;
  };
  const std::vector<Row> rows{{"multimode", p_multi, multi.attempt_duration_us()},
                              {"single_ion", p_single, single.attempt_duration_us()},
                              {"single_ion_travel_limited", p_single, cfg.schedule.single_travel_us}};
  std::string csv = "schedule,probability,tau_us,rate_hz\n";
  Summary s("rates");
  for (const auto& r : rows) {
    const double rate = effective_rate(r.p, r.tau);
    csv += csv_row({r.label, g17(r.p), g17(r.tau), g17(rate)});
    s.kv(r.label + " rate (Hz)", format_fixed(rate, 2) + "  [P = " + format_general(r.p, 4) + ", tau = " +
                                     format_general(r.tau, 6) + " us]");
  }
  const double enh = enhancement_factor({p_multi, rows[0].tau}, {p_single, rows[1].tau});
  csv += csv_row({"enhancement", "", "", g17(enh)});
  s.kv("multimode enhancement", format_fixed(enh, 2));
  s.kv("multimode segment sum (us)", format_general(multi.segment_sum_us(), 6));
  write_file(out / "rates.csv", csv);
  return finish(out, "rates", s);
}

int cmd_budget(const RunConfig& cfg, const fs::path& out, const std::string& file_opt, int samples) {
  const std::string file = file_opt.empty() ? cfg.budget_file : file_opt;
  const auto entries = file.empty() ? budget::chain_854nm() : budget::load_budget(file);
  const auto first = budget::chain_product(entries);
  const auto mc = budget::monte_carlo_chain(entries, samples, derive_seed(cfg.seed, "budget", "monte_carlo"));

  std::string csv = "name,value,sigma\n";
  Summary s("budget");
  s.kv("source", file.empty() ? std::string("built-in 854 nm chain") : file);
  for (const auto& e : entries) {
    csv += csv_row({e.name, g17(e.value), g17(budget::implicit_sigma(e))});
    s.kv("  " + e.name, format_uncertain(e.value, budget::implicit_sigma(e)));
  }
  csv += csv_row({"product", g17(first.value), g17(first.sigma)});
  write_file(out / "budget.csv", csv);
  s.kv("product", format_uncertain(first.value, first.sigma) + "  (" + format_general(first.value, 4) + " +- " +
                      format_general(first.sigma, 2) + ")");
  s.kv("Monte Carlo (" + std::to_string(samples) + " samples)", format_uncertain(mc.value, mc.sigma));
  s.check("Monte Carlo sigma within 10% of first-order sigma",
          first.sigma == 0.0 ? mc.sigma == 0.0 : std::abs(mc.sigma - first.sigma) <= 0.1 * first.sigma);
  return finish(out, "budget", s);
}

int cmd_tomo_simulate(const RunConfig& cfg, const fs::path& out, const std::string& state, std::optional<long long> shots_opt) {
  const auto spec = parse_state(state);
  const long long shots = shots_opt ? *shots_opt : static_cast<long long>(cfg.tomography.shots);
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  const auto record = simulate_counts(spec.rho, static_cast<std::uint64_t>(shots), derive_seed(cfg.seed, "tomography", "counts"));
  write_file(out / "counts.csv", to_csv(record));
  write_file(out / "state.txt", to_text(spec.rho));
  Summary s("tomo-simulate");
  s.kv("state", state);
  s.kv("shots per setting", std::to_string(shots));
  s.kv("total counts", std::to_string(record.total()));
  s.kv("concurrence of input", format_fixed(concurrence(spec.rho), 6));
  return finish(out, "tomo-simulate", s);
}

int cmd_tomo_reconstruct(const RunConfig& cfg, const fs::path& out, const std::string& counts_path, int resamples_opt,
                         const std::string& target_spec) {
  const auto record = record_from_csv(read_file(counts_path));
  const auto target = parse_state(target_spec);
  if (!target.pure) throw std::invalid_argument("--target must be a pure state (bell:THETA or product:ZI,ZP)");
  const PureState psi = *target.pure;
  const auto result = mle_reconstruct(record);
  write_file(out / "rho.txt", to_text(result.rho));

  BootstrapOptions bo;
  bo.resamples = resamples_opt > 0 ? resamples_opt : cfg.tomography.resamples;
  bo.seed = derive_seed(cfg.seed, "tomography", "bootstrap");
  const std::map<std::string, Statistic> stats{
      {"concurrence", [](const DensityMatrix& r) { return concurrence(r); }},
      {"fidelity", [&](const DensityMatrix& r) { return fidelity(r, psi); }},
      {"purity", [](const DensityMatrix& r) { return r.purity(); }},
  };
  const auto boot = monte_carlo_uncertainty(record, stats, bo);
  const auto rot = optimize_local_rotation(result.rho, bell_state(0.0), {.seed = derive_seed(cfg.seed, "metrics", "rotation")});

  Summary s("tomo-reconstruct");
  s.kv("counts file", counts_path);
  s.kv("total counts", std::to_string(record.total()));
  s.kv("MLE iterations", std::to_string(result.iterations));
  s.kv("log-likelihood", format_general(result.log_likelihood, 12));
  for (const auto& [name, v] : boot.values) s.kv(name, format_uncertain(v.value, v.stddev));
  s.kv("bootstrap resamples (succeeded/failed)", std::to_string(boot.succeeded) + "/" + std::to_string(boot.failed));
  s.kv("fidelity with psi(0) after local rotation", format_fixed(rot.fidelity, 6));
  try {
    s.kv("coherence phase (rad)", format_fixed(coherence_phase(result.rho), 4));
  } catch (const std::domain_error&) {
    s.kv("coherence phase (rad)", "undefined");
  }
  s.check("maximum-likelihood reconstruction converged", result.converged);
  return finish(out, "tomo-reconstruct", s);
}

int cmd_noise(const RunConfig& cfg, const fs::path& out, std::vector<double> measured) {
  if (measured.empty()) measured = cfg.link.p_1550;
  const auto psi = bell_state(0.0);
  const auto ideal = DensityMatrix::from_pure(psi);
  std::string csv = "window,measured_probability,background_probability,background_fraction,fidelity,concurrence\n";
  Summary s("noise-fidelity");
  s.kv("background rate (1/s)", format_general(cfg.channel.background_rate, 6));
  s.kv("window (us)", format_general(cfg.channel.window * 1e6, 6));
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const auto model =
        ChannelModel::from_measured(measured[i], cfg.channel.background_rate, cfg.channel.window, cfg.channel.transmission);
    const double lambda = background_fraction(model);
    const auto rho = noisy_state(ideal, model);
    const double f = fidelity(rho, psi);
    const double c = concurrence(rho);
    csv += csv_row({std::to_string(i + 1), g17(measured[i]), g17(model.background_probability()), g17(lambda), g17(f), g17(c)});
    s.kv("window " + std::to_string(i + 1) + " (p = " + format_general(measured[i], 3) + ")",
         "fidelity " + format_fixed(f, 3) + ", background fraction " + format_fixed(lambda, 4));
  }
  write_file(out / "noise.csv", csv);
  return finish(out, "noise-fidelity", s);
}

std::string wavepacket_csv(const wavepacket::Wavepacket& w) {
  std::string csv = "time_us,density_H,density_V,cumulative\n";
  for (std::size_t i = 0; i < w.time_us.size(); ++i) {
    csv += csv_row({format_fixed(w.time_us[i], 6), g17(w.density_h[i]), g17(w.density_v[i]), g17(w.cumulative[i])});
  }
  return csv;
}

int cmd_wavepacket(const RunConfig& cfg, const fs::path& out, bool calibrate) {
  auto scheme = cfg.wavepacket.scheme;
  Summary s("wavepacket");
  if (calibrate) {
    scheme.omega_total = wavepacket::calibrate_rabi(cfg.wavepacket.stark_target_mhz * kTwoPiMega, scheme);
    s.kv("calibrated to Stark shift (MHz)", format_general(cfg.wavepacket.stark_target_mhz, 6));
  }
  const auto [o1, o2] = scheme.omega_total > 0.0 ? wavepacket::split_drive(scheme.omega_total, scheme.drive_ratio)
                                                 : std::pair<double, double>{0.0, 0.0};
  s.kv("Omega^- / 2pi (MHz)", format_fixed(scheme.omega_total / kTwoPiMega, 4));
  s.kv("Omega_1^-, Omega_2^- / 2pi (MHz)", format_fixed(o1 / kTwoPiMega, 4) + ", " + format_fixed(o2 / kTwoPiMega, 4));
  if (scheme.omega_total > 0.0) s.kv("AC Stark shift / 2pi (MHz)", format_fixed(wavepacket::stark_shift(scheme) / kTwoPiMega, 4));

  const auto w = wavepacket::integrate(scheme, cfg.wavepacket.pulse_us, cfg.wavepacket.step_us,
                                       {.output_stride = cfg.wavepacket.output_stride});
  const auto d = wavepacket::detected(w, cfg.wavepacket.path_efficiency);
  write_file(out / "wavepacket.csv", wavepacket_csv(w));
  write_file(out / "wavepacket_detected.csv", wavepacket_csv(d));

  s.kv("two-photon detuning / 2pi (MHz)", format_fixed(w.raman_detuning / kTwoPiMega, 6));
  s.kv("step (us)", format_general(w.step_us, 6));
  s.kv("emission probability (H, V)", format_fixed(w.emission_probability(), 4) + " (" + format_fixed(w.cumulative_h.back(), 4) +
                                          ", " + format_fixed(w.cumulative_v.back(), 4) + ")");
  s.kv("detected probability (path efficiency " + format_general(cfg.wavepacket.path_efficiency, 4) + ")",
       format_general(d.emission_probability(), 4));
  s.kv("peak time (us)", format_fixed(w.peak_time_us(), 3));
  s.kv("max trace error", format_general(w.max_trace_error, 3));
  s.check("trace preserved within 1e-9", w.max_trace_error <= 1e-9);
  s.check("probability bookkeeping within 1e-6", std::abs(w.bookkeeping_total() - 1.0) <= 1e-6);
  return finish(out, "wavepacket", s);
}

int cmd_link_sim(const RunConfig& cfg, const fs::path& out, const std::string& band, std::optional<double> duration,
                 std::optional<long long> attempts, bool log) {
  std::vector<double> p;
  if (band == "1550") {
    p = cfg.link.p_1550;
  } else if (band == "854") {
    p = cfg.link.p_854;
  } else {
    throw std::invalid_argument("--band must be 1550 or 854");
  }
  const auto schedule = cfg.schedule.multimode();
  SimulationLimits limits{duration ? *duration : cfg.link.duration_s, cfg.link.max_total_attempts};
  if (attempts) {
    if (*attempts < 1) throw std::invalid_argument("--attempts must be >= 1");
    limits.max_total_attempts = static_cast<std::uint64_t>(*attempts);
  }
  const auto r = run_link_simulation(schedule, p, limits, derive_seed(cfg.seed, "link_sim", "windows"), log);
  if (log) {
    std::ofstream ev(out / "events.csv", std::ios::binary);
    if (!ev) throw std::runtime_error("cannot write events.csv");
    write_event_log(ev, r.log);
  }

  const double A = static_cast<double>(r.stats.attempts);
  const auto m = multiplicity_distribution(p);
  const double p_any = success_probability(p);
  std::string csv = "statistic,simulated,expected,sigma\n";
  Summary s("link-sim");
  s.kv("band", band);
  s.kv("attempts", std::to_string(r.stats.attempts));
  s.kv("sequences", std::to_string(r.sequences));
  s.kv("elapsed (s)", format_general(r.elapsed_us * 1e-6, 8));
  auto stat = [&](const std::string& name, double observed_count, double prob) {
    const double expected = A * prob;
    const double sigma = std::sqrt(A * prob * (1.0 - prob));
    csv += csv_row({name, g17(observed_count), g17(expected), g17(sigma)});
    s.kv(name, format_general(observed_count, 10) + " (expected " + format_fixed(expected, 1) + ")");
    s.check(name + " within 5 sigma", std::abs(observed_count - expected) <= 5.0 * sigma + 1e-9);
  };
  if (A > 0) {
    stat("successes", static_cast<double>(r.successes), p_any);
    stat("single", static_cast<double>(r.stats.n_single), m.single);
    stat("double", static_cast<double>(r.stats.n_double), m.two);
    stat("triple", static_cast<double>(r.stats.n_triple), m.three);
  }
  s.kv("attempt-time rate (Hz)", format_fixed(r.attempt_rate_hz, 3) + " (analytic " +
                                     format_fixed(effective_rate(p_any, schedule.attempt_duration_us()), 3) + ")");
  s.kv("wall-clock rate (Hz)", format_fixed(r.wall_clock_rate_hz, 3));
  write_file(out / "link_stats.csv", csv);
  return finish(out, "link-sim", s);
}

int cmd_report(const RunConfig& cfg, const fs::path& out) {
  const auto rows = reference_report(cfg);
  write_file(out / "report.csv", report_csv(rows));
  Summary s("report");
  s.line(report_text(rows));
  for (const auto& r : rows) {
    if (!r.pass()) s.check(r.quantity, false);
  }
  return finish(out, "report", s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimode ion-photon link toolkit: rates, tomography, noise, geometry, budgets and wavepackets."};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_opt;
  app.add_option("--config", config_path, "config file (section.key = value)")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "global seed, overrides run.seed");
  app.add_option("--out", out_opt, "output directory, overrides run.output_dir");

  auto* geometry = app.add_subcommand("geometry", "ion positions, string angle and cavity coupling factors");
  std::optional<double> shift;
  geometry->add_option("--shift", shift, "axial string displacement in um (overrides geometry.axial_shift_um)");

  auto* rates = app.add_subcommand("rates", "effective success rates and multimode enhancement");

  auto* budget = app.add_subcommand("budget", "detection-path efficiency budget");
  std::string budget_file;
  int budget_samples = 200000;
  budget->add_option("--file", budget_file, "budget file (name,value,sigma)")->check(CLI::ExistingFile);
  budget->add_option("--samples", budget_samples, "Monte Carlo samples")->check(CLI::Range(2, 100000000));

  auto* tomo_sim = app.add_subcommand("tomo-simulate", "simulate tomography counts for a state");
  std::string sim_state = "bell:0";
  std::optional<long long> shots;
  tomo_sim->add_option("--state", sim_state, "bell:THETA, werner:P, product:ZI,ZP or file:PATH");
  tomo_sim->add_option("--shots", shots, "shots per measurement setting");

  auto* tomo_rec = app.add_subcommand("tomo-reconstruct", "maximum-likelihood reconstruction with bootstrap errors");
  std::string counts_path;
  int resamples = 0;
  std::string target = "bell:0";
  tomo_rec->add_option("--counts", counts_path, "counts file")->required()->check(CLI::ExistingFile);
  tomo_rec->add_option("--resamples", resamples, "bootstrap resamples (default tomography.resamples)");
  tomo_rec->add_option("--target", target, "target pure state for the fidelity");

  auto* noise = app.add_subcommand("noise-fidelity", "fidelity of background-contaminated Bell states");
  std::vector<double> measured;
  noise->add_option("--measured", measured, "measured per-window detection probabilities")->delimiter(',');

  auto* wp = app.add_subcommand("wavepacket", "integrate the photon-generation master equation");
  bool calibrate = false;
  wp->add_flag("--calibrate", calibrate, "set Omega^- from wavepacket.stark_target_mhz first");

  auto* link = app.add_subcommand("link-sim", "discrete-event simulation of the attempt sequence");
  std::string band = "1550";
  std::optional<double> duration;
  std::optional<long long> attempts;
  bool log = false;
  link->add_option("--band", band, "1550 or 854: which detection probabilities to use");
  link->add_option("--duration", duration, "simulated time in seconds");
  link->add_option("--attempts", attempts, "maximum number of attempts");
  link->add_flag("--log", log, "write the event log");

  auto* report = app.add_subcommand("report", "compare computed values with published ones");

  auto* config = app.add_subcommand("config", "configuration utilities");
  config->require_subcommand(1);
  auto* config_show = config->add_subcommand("show", "print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  RunConfig cfg;
  fs::path out_dir;
  try {
    cfg = config_path.empty() ? parse_config("") : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_opt.empty()) cfg.output_dir = out_opt;
    if (config_show->parsed()) {
      std::cout << show_config(cfg);
      return kOk;
    }
    out_dir = cfg.output_dir;
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (geometry->parsed()) return cmd_geometry(cfg, out_dir, shift);
    if (rates->parsed()) return cmd_rates(cfg, out_dir);
    if (budget->parsed()) return cmd_budget(cfg, out_dir, budget_file, budget_samples);
    if (tomo_sim->parsed()) return cmd_tomo_simulate(cfg, out_dir, sim_state, shots);
    if (tomo_rec->parsed()) return cmd_tomo_reconstruct(cfg, out_dir, counts_path, resamples, target);
    if (noise->parsed()) return cmd_noise(cfg, out_dir, measured);
    if (wp->parsed()) return cmd_wavepacket(cfg, out_dir, calibrate);
    if (link->parsed()) return cmd_link_sim(cfg, out_dir, band, duration, attempts, log);
    if (report->parsed()) return cmd_report(cfg, out_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  std::cerr << app.help();
  return kUsage;
}
