#include "mmlink/link_sim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

#include "mmlink/seeds.hpp"

namespace mmlink {

namespace {

void check_probabilities(const std::vector<double>& p) {
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("window probabilities must lie in [0,1]");
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void AttemptSchedule::validate() const {
  if (segments.empty()) throw std::invalid_argument("schedule: no segments");
  if (n_ions < 1) throw std::invalid_argument("schedule.n_ions must be >= 1");
  if (max_attempts < 1) throw std::invalid_argument("schedule.max_attempts must be >= 1");
  if (!(init_duration_us >= 0.0)) throw std::invalid_argument("schedule.init_us must be >= 0");
  if (!(measurement_duration_us >= 0.0)) throw std::invalid_argument("schedule.measurement_us must be >= 0");
  int slots = 0;
  for (const auto& s : segments) {
    if (!(s.duration_us > 0.0)) throw std::invalid_argument("schedule: segment '" + s.label + "' must have duration > 0");
    if (s.kind == SegmentKind::Generation) {
      if (s.ion < 0 || s.ion >= n_ions) throw std::invalid_argument("schedule: generation slot with invalid ion index");
      ++slots;
    }
  }
  if (slots != n_ions) throw std::invalid_argument("schedule: need one generation slot per ion");
  if (total_override_us) {
    const double excess = segment_sum_us() - *total_override_us;
    if (!(*total_override_us > 0.0) || excess >= segments.back().duration_us) {
      throw std::invalid_argument("schedule.total_us is incompatible with the segment durations");
    }
  }
}

double AttemptSchedule::segment_sum_us() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration_us;
  return t;
}

double AttemptSchedule::attempt_duration_us() const { return total_override_us.value_or(segment_sum_us()); }

AttemptSchedule AttemptSchedule::multimode(int n_ions, double reinit_us, double raman_us, double switch_us,
                                           double travel_us, std::optional<double> total_override_us) {
  AttemptSchedule s;
  s.n_ions = n_ions;
  s.segments.push_back({"reinit", reinit_us, SegmentKind::Reinit, -1});
  for (int i = 0; i < n_ions; ++i) s.segments.push_back({"raman", raman_us + switch_us, SegmentKind::Generation, i});
  s.segments.push_back({"travel_wait", travel_us, SegmentKind::Travel, -1});
  s.total_override_us = total_override_us;
  return s;
}

AttemptSchedule AttemptSchedule::single_ion(double reinit_us, double raman_us, double switch_us, double travel_us,
                                            double margin_us) {
  AttemptSchedule s;
  s.n_ions = 1;
  s.segments.push_back({"reinit", reinit_us, SegmentKind::Reinit, -1});
  s.segments.push_back({"raman", raman_us + switch_us, SegmentKind::Generation, 0});
  s.segments.push_back({"travel_wait", travel_us, SegmentKind::Travel, -1});
  s.segments.push_back({"detection_margin", margin_us, SegmentKind::Margin, -1});
  return s;
}

double success_probability(const std::vector<double>& p) {
  check_probabilities(p);
  double none = 1.0;
  for (double x : p) none *= 1.0 - x;
  return 1.0 - none;
}

std::vector<double> detection_count_distribution(const std::vector<double>& p) {
  check_probabilities(p);
  std::vector<double> dist{1.0};
  for (double x : p) {
    std::vector<double> next(dist.size() + 1, 0.0);
    for (std::size_t k = 0; k < dist.size(); ++k) {
      next[k] += dist[k] * (1.0 - x);
      next[k + 1] += dist[k] * x;
    }
    dist = std::move(next);
  }
  return dist;
}

Multiplicity multiplicity_distribution(const std::vector<double>& p) {
  const auto d = detection_count_distribution(p);
  Multiplicity m;
  if (d.size() > 1) m.single = d[1];
  if (d.size() > 2) m.two = d[2];
  if (d.size() > 3) m.three = d[3];
  return m;
}

ProbabilityEstimate detection_probability_with_error(std::uint64_t counts, std::uint64_t attempts) {
  if (attempts == 0) throw std::invalid_argument("attempts must be > 0");
  const double a = static_cast<double>(attempts);
  return {static_cast<double>(counts) / a, std::sqrt(static_cast<double>(counts)) / a};
}

double effective_rate(double probability, double tau_us) {
  if (!(tau_us > 0.0)) throw std::invalid_argument("effective_rate: tau must be > 0");
  return probability / (tau_us * 1e-6);
}

double enhancement_factor(const RateInput& multi, const RateInput& single) {
  const double num = effective_rate(multi.probability, multi.tau_us);
  const double den = effective_rate(single.probability, single.tau_us);
  if (!(num > 0.0) || !(den > 0.0)) throw std::invalid_argument("enhancement_factor: rates must be > 0");
  return num / den;
}

SimulationResult run_link_simulation(const AttemptSchedule& schedule, const std::vector<double>& p,
                                     const SimulationLimits& limits, std::uint64_t seed, bool keep_log) {
  schedule.validate();
  check_probabilities(p);
  if (static_cast<int>(p.size()) != schedule.n_ions) {
    throw std::invalid_argument("run_link_simulation: need one window probability per ion");
  }
  const double attempt_us = schedule.attempt_duration_us();
  const double horizon_us = limits.duration_s * 1e6;
  if (!(horizon_us > schedule.init_duration_us + attempt_us)) {
    throw std::invalid_argument("run_link_simulation: duration shorter than one init block plus one attempt");
  }

  // Segment start offsets within an attempt; the last segment absorbs any
  // difference between the segment sum and the calibrated attempt length.
  std::vector<double> offsets;
  double t_seg = 0.0;
  for (const auto& s : schedule.segments) {
    offsets.push_back(t_seg);
    t_seg += s.duration_us;
  }
  const double last_len = attempt_us - offsets.back();
  double last_generation_end = 0.0;
  for (std::size_t k = 0; k < schedule.segments.size(); ++k) {
    if (schedule.segments[k].kind == SegmentKind::Generation) {
      last_generation_end = offsets[k] + schedule.segments[k].duration_us;
    }
  }

  const std::size_t n = p.size();
  auto rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  SimulationResult res;
  res.attempt_time_us = attempt_us;
  auto& st = res.stats;
  st.window_counts.assign(n, 0);
  auto log = [&](double t, const char* ev, int ion, std::string detail) {
    if (keep_log) res.log.push_back({t, ev, ion, std::move(detail)});
  };

  const std::uint64_t attempt_cap = limits.max_total_attempts.value_or(UINT64_MAX);
  double now = 0.0;
  std::vector<char> hit(n, 0);
  bool done = false;
  while (!done) {
    if (now + schedule.init_duration_us + attempt_us > horizon_us || st.attempts >= attempt_cap) break;
    ++res.sequences;
    log(now, "init", -1, "sequence " + std::to_string(res.sequences));
    now += schedule.init_duration_us;

    bool heralded = false;
    for (int a = 0; a < schedule.max_attempts; ++a) {
      if (now + attempt_us > horizon_us || st.attempts >= attempt_cap) {
        done = true;
        break;
      }
      ++st.attempts;
      if (keep_log) {
        for (std::size_t k = 0; k < schedule.segments.size(); ++k) {
          const auto& s = schedule.segments[k];
          const double len = (k + 1 == schedule.segments.size()) ? last_len : s.duration_us;
          std::string detail = "attempt " + std::to_string(a + 1) + " duration_us=" + fixed(len, 3);
          if (k + 1 == schedule.segments.size() && std::abs(len - s.duration_us) > 1e-9) {
            detail += " (calibrated total)";
          }
          log(now + offsets[k], s.label.c_str(), s.ion, std::move(detail));
          if (s.kind == SegmentKind::Travel) {
            // Zero-effect annotations: pi pulse at the start of the wait and
            // an echo pulse after the echo delay.
            log(now + offsets[k], "pi_729", -1, "duration_us=" + fixed(schedule.pi_pulse_us, 3));
            log(now + offsets[k] + schedule.pi_pulse_us + schedule.echo_delay_us, "echo_729", -1,
                "duration_us=" + fixed(schedule.pi_pulse_us, 3));
          }
        }
      }
      std::size_t detections = 0;
      for (std::size_t i = 0; i < n; ++i) {
        hit[i] = uniform(rng) < p[i] ? 1 : 0;
        detections += hit[i];
      }
      const double window_time = now + last_generation_end;
      for (std::size_t i = 0; i < n; ++i) {
        if (!hit[i]) continue;
        ++st.window_counts[i];
        log(window_time, "detection", static_cast<int>(i), "window " + std::to_string(i + 1));
      }
      switch (detections) {
        case 0: break;
        case 1: ++st.n_single; break;
        case 2: ++st.n_double; break;
        case 3: ++st.n_triple; break;
        default: ++st.n_higher; break;
      }
      now += attempt_us;
      if (detections > 0) {
        heralded = true;
        break;
      }
    }
    if (done) break;
    if (heralded) {
      ++res.successes;
      log(now, "measure", -1, "heralded");
      now += schedule.measurement_duration_us;
    } else {
      log(now, "restart", -1, "max attempts reached");
    }
  }

  res.elapsed_us = now;
  if (st.attempts > 0) {
    const double a = static_cast<double>(st.attempts);
    for (auto c : st.window_counts) st.per_window_probabilities.push_back(static_cast<double>(c) / a);
    st.p_any = static_cast<double>(st.n_single + st.n_double + st.n_triple + st.n_higher) / a;
    double det = 0.0;
    for (auto c : st.window_counts) det += static_cast<double>(c);
    st.mean_detections = det / a;
    res.attempt_rate_hz = static_cast<double>(res.successes) / (a * attempt_us * 1e-6);
  }
  if (now > 0.0) res.wall_clock_rate_hz = static_cast<double>(res.successes) / (now * 1e-6);
  return res;
}

void write_event_log(std::ostream& os, const std::vector<LinkEvent>& log) {
  os << kEventLogHeader << '\n';
  char buf[64];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%.3f", e.time_us);
    os << buf << ',' << e.event << ',' << e.ion << ',' << e.detail << '\n';
  }
}

}  // namespace mmlink
