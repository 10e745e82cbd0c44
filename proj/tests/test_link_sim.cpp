#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mmlink/link_sim.hpp"

using namespace mmlink;

namespace {

const std::vector<double> k854{0.315, 0.347, 0.320};
const std::vector<double> k1550{6.5e-4, 7.8e-4, 7.3e-4};

// Brute-force sum over all 2^n detection patterns.
std::vector<double> pattern_oracle(const std::vector<double>& p) {
  const std::size_t n = p.size();
  std::vector<double> by_count(n + 1, 0.0);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double prob = 1.0;
    int k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool on = mask & (1u << i);
      prob *= on ? p[i] : 1.0 - p[i];
      k += on;
    }
    by_count[static_cast<std::size_t>(k)] += prob;
  }
  return by_count;
}

}  // namespace

TEST_CASE("success probability") {
  CHECK(success_probability(k854) == doctest::Approx(0.696).epsilon(5e-4));
  CHECK(std::abs(success_probability(k854) - 0.693) < 3.5 * 0.004);
  CHECK(success_probability(k1550) == doctest::Approx(2.16e-3).epsilon(2e-3));
  CHECK(success_probability({0.0}) == 0.0);
  CHECK(success_probability(k854) < 0.315 + 0.347 + 0.320);
  CHECK_THROWS(success_probability({1.2}));
}

TEST_CASE("multiplicity distribution matches the pattern oracle") {
  for (const auto& p : {k854, k1550, std::vector<double>{1, 1, 1}, std::vector<double>{0.5, 0.1, 0.9}}) {
    const auto d = multiplicity_distribution(p);
    const auto o = pattern_oracle(p);
    CHECK(d.single == doctest::Approx(o[1]).epsilon(1e-12));
    CHECK(d.two == doctest::Approx(o[2]).epsilon(1e-12));
    CHECK(d.three == doctest::Approx(o[3]).epsilon(1e-12));
    CHECK(std::abs(d.single + d.two + d.three + o[0] - 1.0) < 1e-12);
  }
  const auto ones = multiplicity_distribution({1, 1, 1});
  CHECK(ones.single == 0.0);
  CHECK(ones.three == 1.0);

  // Observed counts at A = 41645 within 2.5 sigma Poisson.
  const auto d = multiplicity_distribution(k854);
  const double a = 41645;
  const double observed[] = {18337, 9037, 1485};
  const double expected[] = {a * d.single, a * d.two, a * d.three};
  for (int i = 0; i < 3; ++i) CHECK(std::abs(observed[i] - expected[i]) < 2.5 * std::sqrt(expected[i]));

  const auto dist = detection_count_distribution(k854);
  double mean = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) mean += double(k) * dist[k];
  CHECK(mean == doctest::Approx(0.982).epsilon(1e-12));
}

TEST_CASE("Poisson detection errors") {
  const auto a = detection_probability_with_error(13127, 41645);
  CHECK(a.probability == doctest::Approx(0.3152).epsilon(1e-3));
  CHECK(a.stddev == doctest::Approx(std::sqrt(13127.0) / 41645).epsilon(1e-12));
  CHECK(std::round(a.stddev * 1e3) == 3);
  const auto b = detection_probability_with_error(693, 882982);
  CHECK(b.probability == doctest::Approx(7.85e-4).epsilon(1e-2));
  CHECK(std::round(b.stddev * 1e5) == 3);
  const auto z = detection_probability_with_error(0, 1000);
  CHECK(z.probability == 0.0);
  CHECK(z.stddev == 0.0);
  CHECK_THROWS(detection_probability_with_error(1, 0));
}

TEST_CASE("rates and enhancement") {
  CHECK(std::abs(effective_rate(2.16e-3, 757) - 2.85) < 0.01);
  CHECK(std::abs(effective_rate(7.8e-4, 633) - 1.23) < 0.01);
  CHECK(std::abs(effective_rate(7.8e-4, 494) - 1.58) < 0.01);
  CHECK(std::abs(enhancement_factor({2.16e-3, 757}, {7.8e-4, 633}) - 2.31) < 0.02);
  CHECK(enhancement_factor({0.1, 500}, {0.1, 500}) == doctest::Approx(1.0));
  CHECK(enhancement_factor({0.3, 500}, {0.1, 500}) == doctest::Approx(3.0));
  CHECK_THROWS(effective_rate(0.1, 0.0));
}

TEST_CASE("schedules") {
  const auto multi = AttemptSchedule::multimode();
  CHECK(multi.segment_sum_us() == doctest::Approx(759.0));
  CHECK(multi.attempt_duration_us() == doctest::Approx(757.0));
  const auto uncal = AttemptSchedule::multimode(3, 70, 50, 12, 503, std::nullopt);
  CHECK(uncal.attempt_duration_us() == doctest::Approx(759.0));
  CHECK(AttemptSchedule::single_ion().attempt_duration_us() == doctest::Approx(633.0));
  CHECK_THROWS(AttemptSchedule::multimode(3, -1.0).validate());
}

TEST_CASE("simulator converges to the analytic distribution") {
  const auto r = run_link_simulation(AttemptSchedule::multimode(), k854, {1e9, 1'000'000}, 2024);
  const double n = double(r.stats.attempts);
  CHECK(r.stats.attempts == 1'000'000);
  const auto d = multiplicity_distribution(k854);
  auto within = [n](double count, double prob) { return std::abs(count - n * prob) <= 5.0 * std::sqrt(n * prob * (1 - prob)); };
  CHECK(within(double(r.successes), success_probability(k854)));
  CHECK(within(double(r.stats.n_single), d.single));
  CHECK(within(double(r.stats.n_double), d.two));
  CHECK(within(double(r.stats.n_triple), d.three));
  for (std::size_t i = 0; i < 3; ++i) CHECK(within(double(r.stats.window_counts[i]), k854[i]));
  CHECK(r.stats.n_single + 2 * r.stats.n_double + 3 * r.stats.n_triple <= 3 * r.stats.attempts);
}

TEST_CASE("simulated 1550 rate matches P / tau") {
  const auto r = run_link_simulation(AttemptSchedule::multimode(), k1550, {1e4, std::nullopt}, 99);
  const double analytic = effective_rate(success_probability(k1550), 757.0);
  const double n = double(r.stats.attempts);
  const double p = success_probability(k1550);
  const double sigma_rate = std::sqrt(n * p * (1 - p)) / (n * 757e-6);
  CHECK(std::abs(r.attempt_rate_hz - analytic) < 3 * sigma_rate);
  CHECK(r.wall_clock_rate_hz < r.attempt_rate_hz);
}

TEST_CASE("degenerate probabilities") {
  const auto schedule = AttemptSchedule::multimode();
  const auto none = run_link_simulation(schedule, {0, 0, 0}, {1.0, std::nullopt}, 1);
  CHECK(none.successes == 0);
  // Independent count of the attempts that fit into one second.
  const double horizon = 1e6, init = 7020, att = 757;
  std::uint64_t expected = 0;
  double t = 0;
  while (t + init + att <= horizon) {
    t += init;
    for (int a = 0; a < 15 && t + att <= horizon; ++a, ++expected) t += att;
  }
  CHECK(none.stats.attempts == expected);

  const auto all = run_link_simulation(schedule, {1, 0, 0}, {1.0, std::nullopt}, 1);
  CHECK(all.successes == all.sequences);
  CHECK(all.stats.attempts == all.sequences);
  CHECK(all.stats.window_counts[0] == all.successes);
  CHECK(all.stats.window_counts[1] == 0);
}

TEST_CASE("event logs are deterministic per seed") {
  auto render = [](std::uint64_t seed) {
    const auto r = run_link_simulation(AttemptSchedule::multimode(), k854, {0.2, std::nullopt}, seed, true);
    std::ostringstream os;
    write_event_log(os, r.log);
    return os.str();
  };
  const auto a = render(5);
  CHECK(a == render(5));
  CHECK(a != render(6));
  CHECK(a.rfind(kEventLogHeader, 0) == 0);
  CHECK(a.find("echo_729") != std::string::npos);
}
