#include <doctest.h>

#include <cmath>

#include "mmlink/metrics.hpp"
#include "mmlink/noise.hpp"
#include "oracles.hpp"

using namespace mmlink;

namespace {

ChannelModel model_with(double rate, double signal) {
  ChannelModel m;
  m.background_rate = rate;
  m.window = 50e-6;
  m.signal_probability = signal;
  return m;
}

}  // namespace

TEST_CASE("background fraction") {
  const double l = background_fraction(model_with(2.0, 7.8e-4));
  CHECK(l == doctest::Approx(1e-4 / 8.8e-4));
  CHECK(l > 0.10);
  CHECK(l < 0.15);
  CHECK(background_fraction(model_with(0.0, 7.8e-4)) == 0.0);
  CHECK(background_fraction(model_with(2.0, 1e-4)) == doctest::Approx(0.5));
  CHECK_THROWS(background_fraction(model_with(0.0, 0.0)));
}

TEST_CASE("from_measured subtracts the background") {
  const auto m = ChannelModel::from_measured(7.8e-4, 2.0, 50e-6);
  CHECK(m.signal_probability == doctest::Approx(6.8e-4));
  CHECK(background_fraction(m) == doctest::Approx(1e-4 / 7.8e-4));
  CHECK_THROWS(ChannelModel::from_measured(5e-5, 2.0, 50e-6));
}

TEST_CASE("noisy probabilities mix in a uniform photon") {
  const auto ideal = DensityMatrix::from_pure(bell_state(0.0));
  const auto p = noisy_probabilities(ideal, 0.2);
  const oracle::M4 mixed = 0.8 * oracle::projector(oracle::bell(0.0)) + 0.2 * oracle::M4::Identity() / 4.0;
  const auto settings = all_settings();
  for (std::size_t s = 0; s < 9; ++s) {
    double sum = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char ion = basis_name(settings[s].ion), ph = basis_name(settings[s].photon);
      CHECK(p[s][k] == doctest::Approx(oracle::born(mixed, ion, kOutcomes[k][0], ph, kOutcomes[k][1])).epsilon(1e-12));
      sum += p[s][k];
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("noisy Bell fidelity follows 1 - 3 lambda / 4") {
  const auto psi = bell_state(0.0);
  const auto ideal = DensityMatrix::from_pure(psi);
  double previous = 2.0;
  for (int i = 0; i <= 6; ++i) {
    const double lambda = 0.05 * i;
    const auto rho = noisy_state(ideal, lambda);
    CHECK(std::abs(fidelity(rho, psi) - (1.0 - 0.75 * lambda)) < 0.005);
    const double c = concurrence(rho);
    CHECK(c < previous);
    previous = c;
  }
  CHECK(trace_distance(noisy_state(ideal, 0.0), ideal) < 1e-6);
}

TEST_CASE("fidelity ceilings from measured probabilities") {
  const auto psi = bell_state(0.0);
  const auto ideal = DensityMatrix::from_pure(psi);
  const double measured[] = {6.5e-4, 7.8e-4, 7.3e-4};
  const double expected[] = {0.88, 0.90, 0.90};
  for (int i = 0; i < 3; ++i) {
    const auto rho = noisy_state(ideal, ChannelModel::from_measured(measured[i], 2.0, 50e-6));
    CHECK(std::abs(fidelity(rho, psi) - expected[i]) < 0.01);
  }
}

TEST_CASE("loss") {
  ChannelModel m;
  CHECK(apply_loss(1.0, m) == doctest::Approx(0.0136));
  CHECK(apply_loss(0.0, m) == 0.0);
  ChannelModel half = m;
  half.transmission = 0.5;
  CHECK(apply_loss(apply_loss(0.3, m), half) == doctest::Approx(apply_loss(apply_loss(0.3, half), m)));
  CHECK(apply_loss(apply_loss(0.3, m), half) == doctest::Approx(0.3 * 0.0136 * 0.5));
  CHECK_THROWS(apply_loss(1.5, m));
}
