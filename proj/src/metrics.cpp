#include "mmlink/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "mmlink/seeds.hpp"
#include "nelder_mead.hpp"

namespace mmlink {

namespace {

constexpr double kCoherenceFloor = 1e-6;
constexpr double kNegativeConcurrenceClip = -1e-9;

Mat4 spin_flip() {
  const Mat2 y = pauli(Basis::Y);
  return Eigen::kroneckerProduct(y, y).eval();
}

// Columns w_i = sqrt(p_i) v_i of the spectral decomposition, negative
// eigenvalues dropped.
Mat4 weighted_eigenvectors(const Mat4& m) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (m + m.adjoint()));
  const Eigen::Vector4d s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.cast<Complex>().asDiagonal();
}

}  // namespace

double concurrence(const DensityMatrix& rho) {
  // The Wootters lambdas are the singular values of the symmetric matrix
  // W^T (Y x Y) W; an SVD keeps full precision for rank-deficient states.
  const Mat4 w = weighted_eigenvectors(rho.matrix());
  const Mat4 tau = w.transpose() * spin_flip() * w;
  const Eigen::Vector4d sv = Eigen::JacobiSVD<Mat4>(tau).singularValues();
  std::array<double, 4> lambda{};
  for (int k = 0; k < 4; ++k) lambda[static_cast<std::size_t>(k)] = sv(k);
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  double c = lambda[0] - lambda[1] - lambda[2] - lambda[3];
  if (c < 0.0 && c > kNegativeConcurrenceClip) c = 0.0;
  return std::clamp(c, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const PureState& psi) {
  const Vec4& v = psi.amplitudes();
  return (v.adjoint() * rho.matrix() * v)(0, 0).real();
}

double modulus_fidelity(const DensityMatrix& rho, const PureState& psi) {
  const Eigen::Matrix4d mod = rho.matrix().cwiseAbs();
  const double tr = mod.trace();
  const Vec4& v = psi.amplitudes();
  return (v.adjoint() * (mod.cast<Complex>() / tr) * v)(0, 0).real();
}

double coherence_phase(const DensityMatrix& rho) {
  const Complex c = rho(2, 1);
  if (std::abs(c) <= kCoherenceFloor) throw std::domain_error("coherence phase undefined: |<down,H|rho|up,V>| <= 1e-6");
  double phi = std::arg(c);
  if (phi <= -std::numbers::pi) phi += 2.0 * std::numbers::pi;
  return phi;
}

Mat2 su2_from_angles(double a, double b, double c) {
  const Complex i{0.0, 1.0};
  Mat2 rz_a, ry, rz_c;
  rz_a << std::exp(-i * a / 2.0), 0, 0, std::exp(i * a / 2.0);
  ry << std::cos(b / 2.0), -std::sin(b / 2.0), std::sin(b / 2.0), std::cos(b / 2.0);
  rz_c << std::exp(-i * c / 2.0), 0, 0, std::exp(i * c / 2.0);
  return rz_a * ry * rz_c;
}

LocalRotation::LocalRotation(const std::array<double, 6>& angles)
    : angles_(angles),
      ion_(su2_from_angles(angles[0], angles[1], angles[2])),
      photon_(su2_from_angles(angles[3], angles[4], angles[5])) {}

Mat4 LocalRotation::unitary() const { return Eigen::kroneckerProduct(ion_, photon_).eval(); }

DensityMatrix LocalRotation::apply(const DensityMatrix& rho) const {
  const Mat4 u = unitary();
  const Mat4 out = u * rho.matrix() * u.adjoint();
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

PureState LocalRotation::apply(const PureState& psi) const {
  return PureState::normalized(unitary() * psi.amplitudes());
}

RotationSearchResult optimize_local_rotation(const DensityMatrix& rho, const PureState& target,
                                             const RotationSearchOptions& options) {
  if (options.restarts < 1) throw std::invalid_argument("optimize_local_rotation: restarts must be >= 1");

  // Maximizing <t|U rho U^+|t> is minimizing its negative.
  const Mat4& m = rho.matrix();
  const Vec4& t = target.amplitudes();
  auto objective = [&](const std::vector<double>& x) {
    const LocalRotation r({x[0], x[1], x[2], x[3], x[4], x[5]});
    const Vec4 w = r.unitary().adjoint() * t;
    return -(w.adjoint() * m * w)(0, 0).real();
  };

  RotationSearchResult best{LocalRotation{}, fidelity(rho, target), 0};
  NelderMeadOptions nm;
  nm.tolerance = options.tolerance;
  nm.max_evaluations = options.max_evaluations;
  nm.initial_step = 0.5;

  for (int restart = 0; restart < options.restarts; ++restart) {
    std::vector<double> start(6, 0.0);
    if (restart > 0) {
      auto rng = make_rng(options.seed, static_cast<std::uint64_t>(restart));
      std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
      for (double& a : start) a = angle(rng);
    }
    // Re-seed the simplex at the optimum until it stops improving: a
    // collapsed simplex can stall short of a curved ridge.
    NelderMeadResult run = nelder_mead(objective, start, nm);
    for (int polish = 0; polish < 4; ++polish) {
      NelderMeadResult again = nelder_mead(objective, run.x, nm);
      const bool improved = again.value < run.value - options.tolerance * 1e-2;
      if (again.value < run.value) run = again;
      if (!improved) break;
    }
    const double f = -run.value;
    if (f > best.fidelity) {
      best = {LocalRotation({run.x[0], run.x[1], run.x[2], run.x[3], run.x[4], run.x[5]}), f, restart};
    }
  }
  return best;
}

}  // namespace mmlink
