#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include "mmlink/budget.hpp"
#include "mmlink/config.hpp"
#include "mmlink/format.hpp"
#include "mmlink/link_sim.hpp"
#include "mmlink/report.hpp"

using namespace mmlink;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("empty config gives the defaults") {
  const auto c = parse_config("");
  const RunConfig d;
  CHECK(c.seed == d.seed);
  CHECK(c.schedule.multimode().attempt_duration_us() == doctest::Approx(757.0));
  CHECK(c.schedule.single_ion().attempt_duration_us() == doctest::Approx(633.0));
  CHECK(effective_rate(success_probability(c.link.p_1550), c.schedule.multimode().attempt_duration_us()) ==
        doctest::Approx(2.85).epsilon(0.004));
  CHECK(c.geometry.string.omega_z == doctest::Approx(2 * std::numbers::pi * 0.869e6));
  CHECK(parse_config("# only a comment\n\n   \n").seed == 1);
}

TEST_CASE("values are parsed and scaled") {
  const auto c = parse_config(
      "run.seed = 42\n"
      "schedule.total_us = none\n"
      "link.p_1550 = 0.1, 0.2, 0.3\n"
      "level.omega_mhz = 30.41   # trailing comment\n"
      "channel.window_us = 25\n");
  CHECK(c.seed == 42);
  CHECK_FALSE(c.schedule.total_us.has_value());
  CHECK(c.schedule.multimode().attempt_duration_us() == doctest::Approx(759.0));
  CHECK(c.link.p_1550 == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(c.wavepacket.scheme.omega_total == doctest::Approx(2 * std::numbers::pi * 30.41e6));
  CHECK(c.channel.window == doctest::Approx(25e-6));
}

TEST_CASE("config errors name line and key") {
  const auto banana = error_of("run.seed = 3\nchannel.transmission = banana\n");
  CHECK(banana.find("line 2") != std::string::npos);
  CHECK(banana.find("channel.transmission") != std::string::npos);
  CHECK(banana.find("banana") != std::string::npos);

  const auto unknown = error_of("channel.colour = blue\n");
  CHECK(unknown.find("unknown key") != std::string::npos);
  CHECK(unknown.find("line 1") != std::string::npos);

  CHECK(error_of("channel.transmission = 1.5\n").find("[0,1]") != std::string::npos);
  CHECK_FALSE(error_of("just words\n").empty());
  CHECK_FALSE(error_of("link.p_1550 = 0.1, 0.2\n").empty());
  CHECK_FALSE(error_of("schedule.max_attempts = 2.5\n").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), std::invalid_argument);
}

TEST_CASE("show_config round trips") {
  RunConfig c;
  set_config_value(c, "run.seed", "99");
  set_config_value(c, "geometry.waist_um", "12.06");
  set_config_value(c, "link.max_total_attempts", "5000");
  const auto text = show_config(c);
  const auto back = parse_config(text);
  CHECK(back.seed == 99);
  CHECK(back.geometry.string.waist_um == doctest::Approx(12.06));
  CHECK(back.link.max_total_attempts.value() == 5000);
  CHECK(show_config(back) == text);
  for (const auto& k : config_keys()) CHECK(text.find(k.key + " = ") != std::string::npos);
}

TEST_CASE("uncertainty formatting") {
  CHECK(format_uncertain(0.528, 0.027) == "0.53(3)");
  CHECK(format_uncertain(2.16e-3, 5e-5) == "2.16(5)e-3");
  CHECK(format_uncertain(0.3152, 0.00275) == "0.315(3)");
  CHECK(format_uncertain(7.85e-4, 2.98e-5) == "7.8(3)e-4");
  CHECK(format_uncertain(2.853, 0.066) == "2.85(7)");
  CHECK(format_uncertain(1.463e-3, 1.147e-4) == "1.46(11)e-3");
  CHECK(format_uncertain(0.5, 0.0) == "0.5");
  CHECK(format_fixed(1.23456, 2) == "1.23");
  CHECK(format_general(0.000123, 3) == "0.000123");
}

TEST_CASE("shipped budget files match the built-in chains") {
  const char* dir = std::getenv("MMLINK_DATA_DIR");
  REQUIRE(dir != nullptr);
  const auto a = budget::chain_product(budget::load_budget(std::string(dir) + "/854.budget"));
  const auto b = budget::chain_product(budget::chain_854nm());
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-14));
  CHECK(a.sigma == doctest::Approx(b.sigma).epsilon(1e-12));
  const auto c = budget::chain_product(budget::load_budget(std::string(dir) + "/1550.budget"));
  const auto d = budget::chain_product(budget::chain_1550nm());
  CHECK(c.value == doctest::Approx(d.value).epsilon(1e-14));
  CHECK(c.sigma == doctest::Approx(d.sigma).epsilon(1e-12));
}

TEST_CASE("reference report mirrors the acceptance outcome") {
  const auto rows = reference_report(RunConfig{});
  CHECK(rows.size() >= 30);
  // Every row passes except the 1550 nm budget against the model efficiency,
  // which sits 1.8 sigma away under a 1 sigma rule.
  for (const auto& r : rows) {
    INFO(r.quantity);
    const bool known_gap = r.quantity == "1550 nm budget vs model 1.26e-3";
    CHECK(r.pass() == !known_gap);
    if (known_gap) CHECK(r.sigma_distance() == doctest::Approx(1.77).epsilon(0.01));
  }
  const auto csv = report_csv(rows);
  CHECK(csv.rfind(kReportHeader, 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(rows.size() + 1));

  ReportRow none{"x", 1.0, 0.0, 1.0, 0.0, 0.1};
  CHECK(std::isnan(none.sigma_distance()));
  CHECK(none.pass());
}
