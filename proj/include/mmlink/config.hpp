#pragma once

// Run configuration: line-oriented "section.key = value" files.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmlink/geometry.hpp"
#include "mmlink/link_sim.hpp"
#include "mmlink/noise.hpp"
#include "mmlink/wavepacket.hpp"

namespace mmlink {

struct ScheduleConfig {
  int n_ions = 3;
  double reinit_us = 70.0;
  double raman_us = 50.0;
  double switch_us = 12.0;
  double travel_us = 503.0;
  std::optional<double> total_us = 757.0;
  int max_attempts = 15;
  double init_us = 7020.0;
  double measurement_us = 1500.0;
  double single_travel_us = 494.0;
  double single_margin_us = 7.0;

  AttemptSchedule multimode() const;
  AttemptSchedule single_ion() const;
};

struct LinkConfig {
  std::vector<double> p_1550{6.5e-4, 7.8e-4, 7.3e-4};
  std::vector<double> p_854{0.315, 0.347, 0.320};
  double single_ion_p = 7.8e-4;
  double duration_s = 10.0;
  std::optional<std::uint64_t> max_total_attempts;
};

struct GeometryConfig {
  geometry::StringGeometry string;
  double projection_um = 0.427;
  double fit_shift_um = 1.4;
};

struct WavepacketConfig {
  wavepacket::LevelScheme scheme;
  double pulse_us = 50.0;
  double step_us = 1e-3;
  int output_stride = 10;
  double path_efficiency = 0.518;
  double stark_target_mhz = 0.88;
};

struct TomographyConfig {
  std::uint64_t shots = 100'000;
  int resamples = 200;
};

struct RunConfig {
  std::uint64_t seed = 1;
  ChannelModel channel;
  ScheduleConfig schedule;
  LinkConfig link;
  GeometryConfig geometry;
  WavepacketConfig wavepacket;
  TomographyConfig tomography;
  std::string budget_file;  // empty: built-in 854 nm chain
  std::string output_dir = "out";

  void validate() const;
};

/// Parses config text. Blank lines and '#' comments are ignored; unknown keys
/// and malformed values raise std::invalid_argument naming line and key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Applies one "section.key" assignment.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Every key with its current value, as loadable config text.
std::string show_config(const RunConfig& config);

struct ConfigKey {
  std::string key;
  std::string unit;
  std::string description;
};
const std::vector<ConfigKey>& config_keys();

}  // namespace mmlink
