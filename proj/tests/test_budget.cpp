#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mmlink/budget.hpp"

using namespace mmlink::budget;

TEST_CASE("implicit sigma") {
  CHECK(implicit_sigma(parse_quoted("joiner", "0.95")) == doctest::Approx(0.005));
  EfficiencyEntry e{"det", 0.75, 0.02, 2};
  CHECK(implicit_sigma(e) == 0.02);
  CHECK(implicit_sigma(parse_quoted("conv", "0.30(1)")) == doctest::Approx(0.01));
  CHECK(implicit_sigma(parse_quoted("fiber", "0.0136(4)")) == doctest::Approx(0.0004));
  CHECK(implicit_sigma(parse_quoted("x", "0.123")) == doctest::Approx(0.0005));
  CHECK_THROWS(parse_quoted("bad", "1.5"));
  CHECK_THROWS(parse_quoted("bad", "0.3(x)"));
}

TEST_CASE("854 nm and 1550 nm chains") {
  const auto a = chain_product(chain_854nm());
  CHECK(a.value == doctest::Approx(0.78 * 0.96 * 0.81 * 0.87));
  CHECK(a.value == doctest::Approx(0.528).epsilon(1e-3));
  CHECK(a.sigma == doctest::Approx(0.027).epsilon(0.05));

  const auto b = chain_product(chain_1550nm());
  CHECK(b.value == doctest::Approx(1.46e-3).epsilon(5e-3));
  CHECK(b.sigma == doctest::Approx(1.2e-4).epsilon(0.06));

  CHECK(compare_with_model(a, {0.518, 0.0}) < 1.0);
  CHECK(compare_with_model(b, {1.26e-3, 0.0}) < 2.0);
  CHECK(compare_with_model(a, a) == 0.0);

  const auto single = chain_product({parse_quoted("only", "0.81(3)")});
  CHECK(single.value == 0.81);
  CHECK(single.sigma == doctest::Approx(0.03));
}

TEST_CASE("first-order propagation against direct quadrature") {
  const auto entries = chain_1550nm();
  double v = 1.0, rel2 = 0.0;
  for (const auto& e : entries) {
    v *= e.value;
    const double s = implicit_sigma(e);
    rel2 += (s / e.value) * (s / e.value);
  }
  const auto r = chain_product(entries);
  CHECK(r.value == doctest::Approx(v).epsilon(1e-14));
  CHECK(r.sigma == doctest::Approx(v * std::sqrt(rel2)).epsilon(1e-12));
}

TEST_CASE("order invariance and perfect entries") {
  auto entries = chain_1550nm();
  const auto base = chain_product(entries);
  std::reverse(entries.begin(), entries.end());
  std::rotate(entries.begin(), entries.begin() + 3, entries.end());
  const auto shuffled = chain_product(entries);
  CHECK(std::abs(shuffled.value - base.value) < 1e-12 * base.value);
  CHECK(std::abs(shuffled.sigma - base.sigma) < 1e-12 * base.sigma);

  entries.push_back({"perfect", 1.0, 0.0, 2});
  const auto with = chain_product(entries);
  CHECK(with.value == doctest::Approx(base.value).epsilon(1e-14));
  CHECK(with.sigma == doctest::Approx(base.sigma).epsilon(1e-12));

  CHECK_THROWS(chain_product({}));
  CHECK_THROWS(chain_product({{"dead", 0.0, 0.1, 2}}));
  CHECK(chain_product({{"dead", 0.0, 0.0, 2}}).value == 0.0);
}

TEST_CASE("Monte Carlo cross-check") {
  for (const auto& chain : {chain_854nm(), chain_1550nm()}) {
    const auto fo = chain_product(chain);
    const auto mc = monte_carlo_chain(chain, 200000, 42);
    CHECK(std::abs(mc.sigma / fo.sigma - 1.0) < 0.1);
    CHECK(std::abs(mc.value - fo.value) < 0.02 * fo.value);
    CHECK(monte_carlo_chain(chain, 1000, 7).value == monte_carlo_chain(chain, 1000, 7).value);
  }
}

TEST_CASE("budget file parsing") {
  const auto entries = parse_budget("# 854 nm path\n\ncavity,0.78,0.02\njoiner,0.95,\n");
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].name == "cavity");
  CHECK(entries[0].sigma.value() == 0.02);
  CHECK_FALSE(entries[1].sigma.has_value());
  CHECK(implicit_sigma(entries[1]) == doctest::Approx(0.005));

  CHECK_THROWS(parse_budget("cavity,abc,0.02\n"));
  CHECK_THROWS(parse_budget("cavity,0.78\n"));
  CHECK_THROWS(parse_budget("cavity,0.78,-0.1\n"));
  CHECK_THROWS(load_budget("/nonexistent/file.budget"));
}
