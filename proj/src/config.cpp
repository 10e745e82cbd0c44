#include "mmlink/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mmlink {

namespace {

constexpr double kTwoPiMega = 2.0 * std::numbers::pi * 1e6;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view s) {
  std::vector<double> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_double(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

bool is_none(std::string_view s) { return trim(s) == "none"; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

struct Field {
  ConfigKey doc;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Field for a double member, stored as value * scale.
template <class Access>
Field number(std::string key, std::string unit, std::string description, Access access, double scale = 1.0,
             std::function<bool(double)> ok = {}, std::string rule = {}) {
  return {{std::move(key), std::move(unit), std::move(description)},
          [=](RunConfig& c, std::string_view v) {
            const double x = parse_double(v);
            if (ok) require(ok(x), "must be " + rule);
            access(c) = x * scale;
          },
          [=](const RunConfig& c) { return fmt(access(const_cast<RunConfig&>(c)) / scale); }};
}

template <class Access>
Field integer(std::string key, std::string description, Access access, std::int64_t min) {
  return {{std::move(key), "", std::move(description)},
          [=](RunConfig& c, std::string_view v) {
            const auto x = parse_int(v);
            require(x >= min, "must be >= " + std::to_string(min));
            using T = std::remove_reference_t<decltype(access(c))>;
            access(c) = static_cast<T>(x);
          },
          [=](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
}

template <class Access>
Field optional_number(std::string key, std::string unit, std::string description, Access access, double scale = 1.0) {
  return {{std::move(key), std::move(unit), std::move(description)},
          [=](RunConfig& c, std::string_view v) {
            if (is_none(v)) {
              access(c).reset();
            } else {
              access(c) = parse_double(v) * scale;
            }
          },
          [=](const RunConfig& c) {
            const auto& o = access(const_cast<RunConfig&>(c));
            return o ? fmt(*o / scale) : std::string("none");
          }};
}

template <class Access>
Field probability_list(std::string key, std::string description, Access access) {
  return {{std::move(key), "", std::move(description)},
          [=](RunConfig& c, std::string_view v) {
            auto list = parse_list(v);
            for (double p : list) require(p >= 0.0 && p <= 1.0, "entries must lie in [0,1]");
            access(c) = std::move(list);
          },
          [=](const RunConfig& c) { return fmt_list(access(const_cast<RunConfig&>(c))); }};
}

const auto positive = [](double x) { return x > 0.0; };
const auto nonneg = [](double x) { return x >= 0.0; };
const auto unit_interval = [](double x) { return x >= 0.0 && x <= 1.0; };

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(integer("run.seed", "global seed; sub-seeds derive from (seed, module, purpose)",
                        [](RunConfig& c) -> std::uint64_t& { return c.seed; }, 0));
    f.push_back({{"run.output_dir", "", "directory for command outputs"},
                 [](RunConfig& c, std::string_view v) { c.output_dir = std::string(trim(v)); },
                 [](const RunConfig& c) { return c.output_dir; }});
    f.push_back({{"run.budget_file", "", "efficiency budget file; empty selects the built-in 854 nm chain"},
                 [](RunConfig& c, std::string_view v) { c.budget_file = std::string(trim(v)); },
                 [](const RunConfig& c) { return c.budget_file; }});

    f.push_back(number("channel.transmission", "", "fiber transmission", [](RunConfig& c) -> double& { return c.channel.transmission; },
                       1.0, unit_interval, "in [0,1]"));
    f.push_back(number("channel.background_rate", "1/s", "background click rate, both detectors",
                       [](RunConfig& c) -> double& { return c.channel.background_rate; }, 1.0, nonneg, ">= 0"));
    f.push_back(number("channel.window_us", "us", "detection window", [](RunConfig& c) -> double& { return c.channel.window; },
                       1e-6, positive, "> 0"));
    f.push_back(number("channel.signal_probability", "", "per-window signal detection probability",
                       [](RunConfig& c) -> double& { return c.channel.signal_probability; }, 1.0, unit_interval, "in [0,1]"));

    auto sched = [&](const char* key, const char* desc, double ScheduleConfig::*m, bool strictly) {
      f.push_back(number(std::string("schedule.") + key, "us", desc, [m](RunConfig& c) -> double& { return c.schedule.*m; },
                         1.0, strictly ? std::function<bool(double)>(positive) : std::function<bool(double)>(nonneg),
                         strictly ? "> 0" : ">= 0"));
    };
    f.push_back(integer("schedule.n_ions", "ions per attempt", [](RunConfig& c) -> int& { return c.schedule.n_ions; }, 1));
    sched("reinit_us", "re-initialisation at attempt start", &ScheduleConfig::reinit_us, false);
    sched("raman_us", "Raman pulse per ion", &ScheduleConfig::raman_us, true);
    sched("switch_us", "switching time per ion", &ScheduleConfig::switch_us, false);
    sched("travel_us", "photon travel wait", &ScheduleConfig::travel_us, false);
    f.push_back(optional_number("schedule.total_us", "us", "calibrated attempt duration, or none for the segment sum",
                                [](RunConfig& c) -> std::optional<double>& { return c.schedule.total_us; }));
    f.push_back(integer("schedule.max_attempts", "attempts per initialisation",
                        [](RunConfig& c) -> int& { return c.schedule.max_attempts; }, 1));
    sched("init_us", "cooling and pumping before each attempt block", &ScheduleConfig::init_us, false);
    sched("measurement_us", "ion state detection after a herald", &ScheduleConfig::measurement_us, false);
    sched("single_travel_us", "single-ion photon travel wait", &ScheduleConfig::single_travel_us, false);
    sched("single_margin_us", "single-ion detection margin", &ScheduleConfig::single_margin_us, false);

    f.push_back(probability_list("link.p_1550", "per-window detection probabilities, 101 km",
                                 [](RunConfig& c) -> std::vector<double>& { return c.link.p_1550; }));
    f.push_back(probability_list("link.p_854", "per-window detection probabilities, 854 nm",
                                 [](RunConfig& c) -> std::vector<double>& { return c.link.p_854; }));
    f.push_back(number("link.single_ion_p", "", "single-ion detection probability",
                       [](RunConfig& c) -> double& { return c.link.single_ion_p; }, 1.0, unit_interval, "in [0,1]"));
    f.push_back(number("link.duration_s", "s", "simulated time for link-sim",
                       [](RunConfig& c) -> double& { return c.link.duration_s; }, 1.0, positive, "> 0"));
    f.push_back({{"link.max_total_attempts", "", "attempt cap for link-sim, or none"},
                 [](RunConfig& c, std::string_view v) {
                   if (is_none(v)) {
                     c.link.max_total_attempts.reset();
                   } else {
                     const auto x = parse_int(v);
                     require(x >= 1, "must be >= 1");
                     c.link.max_total_attempts = static_cast<std::uint64_t>(x);
                   }
                 },
                 [](const RunConfig& c) {
                   return c.link.max_total_attempts ? std::to_string(*c.link.max_total_attempts) : std::string("none");
                 }});

    f.push_back(integer("geometry.n_ions", "ions in the string", [](RunConfig& c) -> int& { return c.geometry.string.n_ions; }, 1));
    f.push_back(number("geometry.axial_frequency_mhz", "MHz", "axial trap frequency omega_z / 2 pi",
                       [](RunConfig& c) -> double& { return c.geometry.string.omega_z; }, kTwoPiMega, positive, "> 0"));
    f.push_back(number("geometry.mass_u", "u", "ion mass", [](RunConfig& c) -> double& { return c.geometry.string.mass; },
                       geometry::constants::atomic_mass_unit, positive, "> 0"));
    f.push_back(number("geometry.angle_deg", "deg", "angle between string and cavity axis",
                       [](RunConfig& c) -> double& { return c.geometry.string.angle_deg; }, 1.0,
                       [](double x) { return x >= 0.0 && x <= 90.0; }, "in [0,90]"));
    f.push_back(number("geometry.antinode_spacing_um", "um", "cavity standing-wave antinode spacing",
                       [](RunConfig& c) -> double& { return c.geometry.string.antinode_spacing_um; }, 1.0, positive, "> 0"));
    f.push_back(number("geometry.projection_um", "um", "target projected spacing of neighbouring ions",
                       [](RunConfig& c) -> double& { return c.geometry.projection_um; }, 1.0, positive, "> 0"));
    f.push_back(number("geometry.waist_um", "um", "cavity mode waist", [](RunConfig& c) -> double& { return c.geometry.string.waist_um; },
                       1.0, positive, "> 0"));
    f.push_back(number("geometry.axial_shift_um", "um", "string displacement towards ion 1",
                       [](RunConfig& c) -> double& { return c.geometry.string.axial_shift_um; }));
    f.push_back(number("geometry.fit_shift_um", "um", "displacement of the second coupling set used in the waist fit",
                       [](RunConfig& c) -> double& { return c.geometry.fit_shift_um; }));

    using wavepacket::LevelScheme;
    auto level = [&](const char* key, const char* unit, const char* desc, double LevelScheme::*m, double scale,
                     std::function<bool(double)> ok = {}, std::string rule = {}) {
      f.push_back(number(std::string("level.") + key, unit, desc,
                         [m](RunConfig& c) -> double& { return c.wavepacket.scheme.*m; }, scale, std::move(ok), std::move(rule)));
    };
    level("g0_mhz", "MHz", "maximum ion-cavity coupling g0 / 2 pi", &LevelScheme::g0, kTwoPiMega, nonneg, ">= 0");
    level("gamma", "", "common coupling reduction", &LevelScheme::gamma, 1.0, unit_interval, "in [0,1]");
    level("coupling_x", "", "Gaussian-mode coupling factor of the simulated ion", &LevelScheme::coupling_x, 1.0, unit_interval,
          "in [0,1]");
    level("cg_h", "", "Clebsch-Gordan x projection factor, P-D / H", &LevelScheme::cg_h, 1.0, nonneg, ">= 0");
    level("cg_v", "", "Clebsch-Gordan x projection factor, P-D' / V", &LevelScheme::cg_v, 1.0, nonneg, ">= 0");
    level("kappa_mhz", "MHz", "cavity field decay rate / 2 pi", &LevelScheme::kappa, kTwoPiMega, nonneg, ">= 0");
    level("p_decay_rate", "1/s", "total P population decay rate", &LevelScheme::gamma_p, 1.0, nonneg, ">= 0");
    level("branching_s", "", "P decay fraction to S", &LevelScheme::branching_s, 1.0, unit_interval, "in [0,1]");
    level("branching_d", "", "P decay fraction to D", &LevelScheme::branching_d, 1.0, unit_interval, "in [0,1]");
    level("branching_dprime", "", "P decay fraction to D'", &LevelScheme::branching_dprime, 1.0, unit_interval, "in [0,1]");
    level("detuning_mhz", "MHz", "drive tone 1 detuning from S-P / 2 pi", &LevelScheme::detuning, kTwoPiMega);
    level("drive_splitting_mhz", "MHz", "E_D - E_D' = detuning_2 - detuning_1, / 2 pi", &LevelScheme::drive_splitting, kTwoPiMega);
    level("omega_mhz", "MHz", "total drive Rabi frequency Omega^- / 2 pi", &LevelScheme::omega_total, kTwoPiMega, nonneg, ">= 0");
    level("drive_ratio", "", "Omega_1 / Omega_2", &LevelScheme::drive_ratio, 1.0, nonneg, ">= 0");
    level("sigma_plus_ratio", "", "sigma+ Rabi frequency relative to Omega^-", &LevelScheme::sigma_plus_ratio, 1.0, nonneg, ">= 0");
    f.push_back(optional_number("level.sigma_plus_detuning_mhz", "MHz", "sigma+ detuning / 2 pi, or none for detuning_mhz",
                                [](RunConfig& c) -> std::optional<double>& { return c.wavepacket.scheme.sigma_plus_detuning; },
                                kTwoPiMega));
    f.push_back(optional_number("level.raman_detuning_mhz", "MHz", "two-photon detuning / 2 pi, or none for Stark-compensated",
                                [](RunConfig& c) -> std::optional<double>& { return c.wavepacket.scheme.raman_detuning; },
                                kTwoPiMega));
    f.push_back(number("wavepacket.pulse_us", "us", "Raman pulse length",
                       [](RunConfig& c) -> double& { return c.wavepacket.pulse_us; }, 1.0, positive, "> 0"));
    f.push_back(number("wavepacket.step_us", "us", "integrator step", [](RunConfig& c) -> double& { return c.wavepacket.step_us; },
                       1.0, positive, "> 0"));
    f.push_back(integer("wavepacket.output_stride", "steps between output rows",
                        [](RunConfig& c) -> int& { return c.wavepacket.output_stride; }, 1));
    f.push_back(number("wavepacket.path_efficiency", "", "detection-path efficiency for the detected overlay",
                       [](RunConfig& c) -> double& { return c.wavepacket.path_efficiency; }, 1.0, unit_interval, "in [0,1]"));
    f.push_back(number("wavepacket.stark_target_mhz", "MHz", "measured AC Stark shift used to calibrate Omega^-",
                       [](RunConfig& c) -> double& { return c.wavepacket.stark_target_mhz; }, 1.0, nonneg, ">= 0"));

    f.push_back(integer("tomography.shots", "shots per setting for tomo-simulate",
                        [](RunConfig& c) -> std::uint64_t& { return c.tomography.shots; }, 1));
    f.push_back(integer("tomography.resamples", "bootstrap resamples",
                        [](RunConfig& c) -> int& { return c.tomography.resamples; }, 2));
    return f;
  }();
  return table;
}

const Field& find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.doc.key == key) return f;
  }
  throw std::invalid_argument("unknown key '" + std::string(key) + "'");
}

}  // namespace

AttemptSchedule ScheduleConfig::multimode() const {
  auto s = AttemptSchedule::multimode(n_ions, reinit_us, raman_us, switch_us, travel_us, total_us);
  s.max_attempts = max_attempts;
  s.init_duration_us = init_us;
  s.measurement_duration_us = measurement_us;
  s.validate();
  return s;
}

AttemptSchedule ScheduleConfig::single_ion() const {
  auto s = AttemptSchedule::single_ion(reinit_us, raman_us, switch_us, single_travel_us, single_margin_us);
  s.max_attempts = max_attempts;
  s.init_duration_us = init_us;
  s.measurement_duration_us = measurement_us;
  s.validate();
  return s;
}

void RunConfig::validate() const {
  auto wrap = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("config section '") + section + "': " + e.what());
    }
  };
  wrap("channel", [&] { channel.validate(); });
  wrap("schedule", [&] {
    (void)schedule.multimode();
    (void)schedule.single_ion();
  });
  wrap("link", [&] {
    if (static_cast<int>(link.p_1550.size()) != schedule.n_ions) throw std::invalid_argument("link.p_1550 needs one entry per ion");
    if (static_cast<int>(link.p_854.size()) != schedule.n_ions) throw std::invalid_argument("link.p_854 needs one entry per ion");
  });
  wrap("geometry", [&] {
    if (geometry.string.n_ions < 2) throw std::invalid_argument("geometry.n_ions must be >= 2");
  });
  wrap("level", [&] { wavepacket.scheme.validate(); });
  if (!budget_file.empty() && !std::filesystem::exists(budget_file)) {
    throw std::invalid_argument("run.budget_file: file '" + budget_file + "' does not exist");
  }
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  const Field& f = find_field(key);
  try {
    f.set(config, value);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("key '" + std::string(key) + "': " + e.what());
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw std::invalid_argument(where + ": expected 'section.key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.find('.') == std::string_view::npos) {
      throw std::invalid_argument(where + ": key '" + std::string(key) + "' is not of the form section.key");
    }
    try {
      set_config_value(config, key, line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string show_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const auto dot = f.doc.key.find('.');
    const auto s = f.doc.key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out += '\n';
      section = s;
    }
    out += f.doc.key + " = " + f.get(config) + '\n';
  }
  return out;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& f : fields()) k.push_back(f.doc);
    return k;
  }();
  return keys;
}

}  // namespace mmlink
