#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mmlink/metrics.hpp"
#include "oracles.hpp"

using namespace mmlink;
using std::numbers::pi;
using oracle::M4;

TEST_CASE("concurrence of reference states") {
  for (double t : {0.0, 0.4, pi, 5.0}) CHECK(concurrence(DensityMatrix::from_pure(bell_state(t))) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(concurrence(DensityMatrix::from_pure(product_state(1, -1))) == doctest::Approx(0.0));
  CHECK(concurrence(DensityMatrix::maximally_mixed()) == 0.0);
  // Werner: max(0, (3p - 1) / 2).
  for (double p : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 0.95}) {
    CHECK(concurrence(DensityMatrix::werner(p)) == doctest::Approx(std::max(0.0, (3 * p - 1) / 2)).epsilon(1e-9));
  }
}

TEST_CASE("concurrence agrees with the non-Hermitian spectrum oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const M4 m = oracle::random_state(rng, 1 + trial % 4);
    CHECK(concurrence(DensityMatrix(m)) == doctest::Approx(oracle::concurrence(m)).epsilon(1e-8));
  }
}

TEST_CASE("fidelity") {
  CHECK(fidelity(DensityMatrix::from_pure(bell_state(0.0)), bell_state(0.0)) == doctest::Approx(1.0));
  CHECK(fidelity(DensityMatrix::from_pure(bell_state(pi)), bell_state(0.0)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(fidelity(DensityMatrix::maximally_mixed(), bell_state(0.0)) == doctest::Approx(0.25));
  CHECK(fidelity(DensityMatrix::werner(0.8), bell_state(0.0)) == doctest::Approx(0.85));

  // Linear in rho.
  std::mt19937_64 rng(5);
  const M4 a = oracle::random_state(rng), b = oracle::random_state(rng);
  const auto psi = bell_state(1.1);
  const double mix = fidelity(DensityMatrix(0.3 * a + 0.7 * b), psi);
  CHECK(mix == doctest::Approx(0.3 * fidelity(DensityMatrix(a), psi) + 0.7 * fidelity(DensityMatrix(b), psi)).epsilon(1e-13));
}

TEST_CASE("modulus fidelity discards the Bell phase") {
  for (double t : {0.0, 1.3, 2.9}) {
    CHECK(modulus_fidelity(DensityMatrix::from_pure(bell_state(t)), bell_state(0.0)) == doctest::Approx(1.0));
  }
  CHECK(modulus_fidelity(DensityMatrix::werner(0.8), bell_state(0.0)) == doctest::Approx(0.85));
}

TEST_CASE("coherence phase") {
  CHECK(coherence_phase(DensityMatrix::from_pure(bell_state(0.731 * pi))) == doctest::Approx(0.731 * pi).epsilon(1e-12));
  CHECK(coherence_phase(DensityMatrix::from_pure(bell_state(1.5 * pi))) == doctest::Approx(-pi / 2).epsilon(1e-12));
  CHECK(coherence_phase(DensityMatrix::from_pure(bell_state(pi))) == doctest::Approx(pi));
  CHECK_THROWS_AS(coherence_phase(DensityMatrix::from_pure(product_state(1, 1))), std::domain_error);
  CHECK_THROWS_AS(coherence_phase(DensityMatrix::maximally_mixed()), std::domain_error);
}

TEST_CASE("su2 parametrization is unitary with unit determinant") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (int i = 0; i < 20; ++i) {
    const Mat2 r = su2_from_angles(u(rng), u(rng), u(rng));
    CHECK(oracle::max_abs(r * r.adjoint() - Mat2::Identity()) < 1e-14);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-14);
  }
  const LocalRotation id;
  CHECK(oracle::max_abs(id.unitary() - Mat4::Identity()) < 1e-15);
}

TEST_CASE("rotation search recovers rotated Bell states") {
  for (double t : {0.6 * pi, 0.25 * pi, 1.7 * pi}) {
    const auto r = optimize_local_rotation(DensityMatrix::from_pure(bell_state(t)), bell_state(0.0));
    CHECK(std::abs(r.fidelity - 1.0) < 1e-6);
    const double check = fidelity(r.rotation.apply(DensityMatrix::from_pure(bell_state(t))), bell_state(0.0));
    CHECK(check == doctest::Approx(r.fidelity).epsilon(1e-12));
  }
}

TEST_CASE("rotation search on mixed states") {
  CHECK(optimize_local_rotation(DensityMatrix::maximally_mixed(), bell_state(0.0)).fidelity == doctest::Approx(0.25).epsilon(1e-9));

  // Werner(0.8) scrambled by random local unitaries.
  std::mt19937_64 rng(17);
  const M4 u = oracle::kron(oracle::random_unitary(rng), oracle::random_unitary(rng));
  const DensityMatrix scrambled(u * oracle::werner(0.8) * u.adjoint());
  CHECK(fidelity(scrambled, bell_state(0.0)) < 0.8);
  const auto r = optimize_local_rotation(scrambled, bell_state(0.0));
  CHECK(std::abs(r.fidelity - 0.85) < 1e-4);
}

TEST_CASE("local rotations leave concurrence invariant") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const M4 m = oracle::random_state(rng, 1 + trial % 4);
    const M4 u = oracle::kron(oracle::random_unitary(rng), oracle::random_unitary(rng));
    const double before = concurrence(DensityMatrix(m));
    const double after = concurrence(DensityMatrix(u * m * u.adjoint()));
    CHECK(std::abs(before - after) < 1e-9);
  }
}
