#pragma once

// Attempt timing, detection statistics and a discrete-event simulator of the
// repeated photon-generation attempts of a multimode node.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mmlink {

enum class SegmentKind { Reinit, Generation, Travel, Margin };

struct Segment {
  std::string label;
  double duration_us = 0.0;
  SegmentKind kind = SegmentKind::Reinit;
  int ion = -1;  // generation slots only
};

struct AttemptSchedule {
  std::vector<Segment> segments;
  int n_ions = 3;
  int max_attempts = 15;
  double init_duration_us = 7020.0;         // Doppler cooling + optical pumping
  double measurement_duration_us = 1500.0;  // state detection after a herald
  /// Calibrated attempt length; when set it replaces the segment sum and the
  /// final segment is shortened or stretched to match.
  std::optional<double> total_override_us;
  double pi_pulse_us = 6.4;
  double echo_delay_us = 243.6;

  void validate() const;
  double segment_sum_us() const;
  double attempt_duration_us() const;

  /// Reinit, one generation slot per ion (Raman pulse + switch), travel wait.
  static AttemptSchedule multimode(int n_ions = 3, double reinit_us = 70.0, double raman_us = 50.0,
                                   double switch_us = 12.0, double travel_us = 503.0,
                                   std::optional<double> total_override_us = 757.0);
  /// Reinit, one slot, photon travel and a detection margin.
  static AttemptSchedule single_ion(double reinit_us = 70.0, double raman_us = 50.0, double switch_us = 12.0,
                                    double travel_us = 494.0, double margin_us = 7.0);
};

/// 1 - prod(1 - p_i) for independent windows.
double success_probability(const std::vector<double>& p);

/// Probability of exactly k detections, k = 0..n, for independent windows.
std::vector<double> detection_count_distribution(const std::vector<double>& p);

struct Multiplicity {
  double single = 0.0;
  double two = 0.0;
  double three = 0.0;
};
Multiplicity multiplicity_distribution(const std::vector<double>& p);

struct ProbabilityEstimate {
  double probability = 0.0;
  double stddev = 0.0;
};
/// counts / attempts with Poisson error sqrt(counts) / attempts.
ProbabilityEstimate detection_probability_with_error(std::uint64_t counts, std::uint64_t attempts);

/// P / tau in Hz for tau in microseconds.
double effective_rate(double probability, double tau_us);

struct RateInput {
  double probability = 0.0;
  double tau_us = 0.0;
};
double enhancement_factor(const RateInput& multi, const RateInput& single);

struct DetectionStatistics {
  std::uint64_t attempts = 0;
  std::vector<std::uint64_t> window_counts;
  std::vector<double> per_window_probabilities;
  std::uint64_t n_single = 0;
  std::uint64_t n_double = 0;
  std::uint64_t n_triple = 0;
  std::uint64_t n_higher = 0;  // four or more windows (n_ions > 3)
  double p_any = 0.0;
  double mean_detections = 0.0;
};

struct LinkEvent {
  double time_us = 0.0;
  std::string event;
  int ion = -1;
  std::string detail;
};

struct SimulationLimits {
  double duration_s = 1.0;
  std::optional<std::uint64_t> max_total_attempts;
};

struct SimulationResult {
  DetectionStatistics stats;
  std::uint64_t sequences = 0;
  std::uint64_t successes = 0;
  double elapsed_us = 0.0;
  double attempt_time_us = 0.0;
  /// successes / (attempts * attempt duration), comparable to P / tau.
  double attempt_rate_hz = 0.0;
  /// successes / elapsed time including initialisation and measurement.
  double wall_clock_rate_hz = 0.0;
  std::vector<LinkEvent> log;
};

/// Runs sequences of init, up to max_attempts attempts, and measurement after
/// a herald. Each attempt draws every window independently with probability
/// p_i; the run stops before a block would cross the time or attempt limit.
SimulationResult run_link_simulation(const AttemptSchedule& schedule, const std::vector<double>& p,
                                     const SimulationLimits& limits, std::uint64_t seed, bool keep_log = false);

inline constexpr const char* kEventLogHeader = "time_us,event,ion_index,detail";
void write_event_log(std::ostream& os, const std::vector<LinkEvent>& log);

}  // namespace mmlink
