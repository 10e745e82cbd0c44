#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mmlink/qstate.hpp"
#include "oracles.hpp"

using namespace mmlink;
using std::numbers::pi;
using oracle::M4;

namespace {

char axis(Basis b) { return basis_name(b); }

}  // namespace

TEST_CASE("bell_state amplitudes") {
  const auto psi0 = bell_state(0.0);
  CHECK(std::abs(psi0.amplitudes()(1) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(psi0.amplitudes()(2) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(psi0.amplitudes()(0)) == 0.0);
  CHECK(std::abs(psi0.amplitudes()(3)) == 0.0);
  CHECK(std::abs(psi0.amplitudes().norm() - 1.0) < 1e-15);

  const auto psipi = bell_state(pi);
  CHECK(std::abs(psipi.amplitudes()(2) + 1.0 / std::sqrt(2.0)) < 1e-15);

  const double overlap = std::norm(bell_state(0.0).amplitudes().dot(bell_state(pi / 2).amplitudes()));
  CHECK(overlap == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("pure state normalization is enforced") {
  Vec4 v = Vec4::Zero();
  v(0) = 1.0 + 1e-9;
  CHECK_THROWS_AS(PureState{v}, std::invalid_argument);
  CHECK(std::abs(PureState::normalized(v).amplitudes().norm() - 1.0) < 1e-15);
  CHECK_THROWS_AS(PureState::normalized(Vec4::Zero()), std::invalid_argument);
}

TEST_CASE("density matrix invariants are diagnosed") {
  Mat4 m = Mat4::Identity() * 0.25;
  CHECK_NOTHROW(DensityMatrix{m});

  Mat4 non_hermitian = m;
  non_hermitian(0, 1) = 0.1;
  CHECK_THROWS_WITH_AS(DensityMatrix{non_hermitian}, doctest::Contains("Hermitian"), std::invalid_argument);

  Mat4 bad_trace = m * 2.0;
  CHECK_THROWS_WITH_AS(DensityMatrix{bad_trace}, doctest::Contains("trace"), std::invalid_argument);

  Mat4 negative = Mat4::Zero();
  negative(0, 0) = 1.1;
  negative(1, 1) = -0.1;
  CHECK_THROWS_WITH_AS(DensityMatrix{negative}, doctest::Contains("eigenvalue"), std::invalid_argument);

  Mat4 nan = m;
  nan(2, 2) = std::nan("");
  CHECK_THROWS_AS(DensityMatrix{nan}, std::invalid_argument);

  // Tolerances: -1e-9 eigenvalues are accepted.
  Mat4 edge = Mat4::Zero();
  edge(0, 0) = 1.0 + 5e-10;
  edge(1, 1) = -5e-10;
  CHECK_NOTHROW(DensityMatrix{edge});
}

TEST_CASE("constructors produce valid states") {
  for (double t = 0; t < 2 * pi; t += 0.3) CHECK_FALSE(density_matrix_violation(DensityMatrix::from_pure(bell_state(t)).matrix()));
  for (int a : {1, -1})
    for (int b : {1, -1}) CHECK_FALSE(density_matrix_violation(DensityMatrix::from_pure(product_state(a, b)).matrix()));
  CHECK_FALSE(density_matrix_violation(DensityMatrix::maximally_mixed().matrix()));
  for (double p : {0.0, 0.3, 0.8, 1.0}) {
    CHECK(oracle::max_abs(DensityMatrix::werner(p).matrix() - oracle::werner(p)) < 1e-15);
  }
  CHECK_THROWS_AS(DensityMatrix::werner(1.2), std::invalid_argument);
}

TEST_CASE("nearest_physical repairs small violations") {
  Mat4 m = oracle::werner(0.9);
  m(0, 0) -= 0.05;  // negative eigenvalue and wrong trace
  const auto rho = DensityMatrix::nearest_physical(m);
  CHECK_FALSE(density_matrix_violation(rho.matrix()));
}

TEST_CASE("born_probabilities: Bell and mixed examples") {
  const auto rho = DensityMatrix::from_pure(bell_state(0.0));
  const auto zz = born_probabilities(rho, {Basis::Z, Basis::Z});
  CHECK(zz[outcome_index(+1, +1)] == doctest::Approx(0.0));  // up,H
  CHECK(zz[outcome_index(+1, -1)] == doctest::Approx(0.5));  // up,V
  CHECK(zz[outcome_index(-1, +1)] == doctest::Approx(0.5));  // down,H
  CHECK(zz[outcome_index(-1, -1)] == doctest::Approx(0.0));

  for (const auto& s : all_settings()) {
    for (double p : born_probabilities(DensityMatrix::maximally_mixed(), s)) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));
  }

  // (X,X) on psi(0): the trace oracle decides which pairs are populated.
  const auto xx = born_probabilities(rho, {Basis::X, Basis::X});
  const M4 r = oracle::projector(oracle::bell(0.0));
  for (std::size_t k = 0; k < 4; ++k) CHECK(xx[k] == doctest::Approx(oracle::born(r, 'X', kOutcomes[k][0], 'X', kOutcomes[k][1])));
  CHECK(xx[outcome_index(+1, +1)] == doctest::Approx(0.5));
  CHECK(xx[outcome_index(-1, -1)] == doctest::Approx(0.5));
  CHECK(xx[outcome_index(+1, -1)] == doctest::Approx(0.0));
}

TEST_CASE("born_probabilities agree with the trace oracle on random states") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const M4 m = oracle::random_state(rng, 1 + trial % 4);
    const DensityMatrix rho(m);
    for (const auto& s : all_settings()) {
      const auto p = born_probabilities(rho, s);
      double sum = 0.0;
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(p[k] >= 0.0);
        CHECK(p[k] == doctest::Approx(oracle::born(m, axis(s.ion), kOutcomes[k][0], axis(s.photon), kOutcomes[k][1])).epsilon(1e-12));
        sum += p[k];
      }
      CHECK(std::abs(sum - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("partial_trace") {
  for (int k = 0; k < 16; ++k) {
    const auto rho = DensityMatrix::from_pure(bell_state(2 * pi * k / 16.0));
    for (auto side : {Subsystem::Ion, Subsystem::Photon}) {
      CHECK(oracle::max_abs(partial_trace(rho, side) - Mat2::Identity() / 2.0) < 1e-12);
    }
  }
  const auto up_h = DensityMatrix::from_pure(product_state(+1, +1));
  Mat2 up = Mat2::Zero();
  up(0, 0) = 1.0;
  CHECK(oracle::max_abs(partial_trace(up_h, Subsystem::Ion) - up) < 1e-15);
  CHECK(oracle::max_abs(partial_trace(DensityMatrix::werner(0.8), Subsystem::Ion) - Mat2::Identity() / 2.0) < 1e-15);

  // Direct summation oracle on a random state.
  std::mt19937_64 rng(3);
  const M4 m = oracle::random_state(rng);
  Mat2 ion = Mat2::Zero(), photon = Mat2::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 2; ++k) {
        ion(a, b) += m(2 * a + k, 2 * b + k);
        photon(a, b) += m(2 * k + a, 2 * k + b);
      }
  CHECK(oracle::max_abs(partial_trace(DensityMatrix(m), Subsystem::Ion) - ion) < 1e-14);
  CHECK(oracle::max_abs(partial_trace(DensityMatrix(m), Subsystem::Photon) - photon) < 1e-14);
}

TEST_CASE("trace distance") {
  const auto a = DensityMatrix::from_pure(product_state(1, 1));
  const auto b = DensityMatrix::from_pure(product_state(-1, -1));
  CHECK(trace_distance(a, b) == doctest::Approx(1.0));
  CHECK(trace_distance(a, a) == doctest::Approx(0.0));
}

TEST_CASE("settings and bases") {
  const auto s = all_settings();
  CHECK(s.size() == 9);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(setting_index(s[i]) == i);
  CHECK(parse_basis("x") == Basis::X);
  CHECK(parse_basis("Z") == Basis::Z);
  CHECK_THROWS_AS(parse_basis("W"), std::invalid_argument);
  CHECK_THROWS_AS(outcome_index(0, 1), std::invalid_argument);
  for (Basis b : {Basis::X, Basis::Y, Basis::Z}) {
    CHECK(oracle::max_abs(pauli_projector(b, +1) + pauli_projector(b, -1) - Mat2::Identity()) < 1e-15);
    CHECK(oracle::max_abs(pauli(b) - oracle::sigma(axis(b))) < 1e-15);
  }
}

TEST_CASE("text round trip keeps every bit") {
  std::mt19937_64 rng(9);
  const DensityMatrix rho(oracle::random_state(rng));
  const std::string text = to_text(rho);
  CHECK(text.rfind(std::string(kBasisOrderingHeader), 0) == 0);
  const auto back = density_matrix_from_text(text);
  CHECK(back.matrix() == rho.matrix());
  CHECK_THROWS_AS(density_matrix_from_text("# header\n1,2\n"), std::invalid_argument);
  CHECK(parse_complex(format_complex({0.25, -1.5})) == Complex(0.25, -1.5));
}
