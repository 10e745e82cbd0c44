#pragma once

// Figures of merit for ion-photon states and the local-rotation search used
// to align a reconstructed state with the target Bell state.

#include <array>
#include <cstdint>

#include "mmlink/qstate.hpp"

namespace mmlink {

/// Wootters concurrence. With rho = W W^dagger from the spectral
/// decomposition, the lambdas are the singular values of W^T (Y x Y) W.
/// Clipped to [0, 1].
double concurrence(const DensityMatrix& rho);

/// <psi|rho|psi>.
double fidelity(const DensityMatrix& rho, const PureState& psi);

/// Fidelity of the entrywise-modulus matrix |rho_ij| (renormalized to unit
/// trace) with `psi`. This is how fidelities of "absolute values" of
/// reconstructed states are quoted; |rho| need not be a physical state.
double modulus_fidelity(const DensityMatrix& rho, const PureState& psi);

/// Argument of <down,H|rho|up,V> in (-pi, pi]. Throws std::domain_error
/// ("phase undefined") when that coherence is below 1e-6 in magnitude.
double coherence_phase(const DensityMatrix& rho);

/// Rz(a) Ry(b) Rz(c), an element of SU(2).
Mat2 su2_from_angles(double a, double b, double c);

class LocalRotation {
 public:
  LocalRotation() : LocalRotation(std::array<double, 6>{}) {}
  /// Angles (a, b, c) for the ion followed by (a, b, c) for the photon.
  explicit LocalRotation(const std::array<double, 6>& angles);

  const Mat2& ion() const { return ion_; }
  const Mat2& photon() const { return photon_; }
  const std::array<double, 6>& angles() const { return angles_; }
  Mat4 unitary() const;

  DensityMatrix apply(const DensityMatrix& rho) const;
  PureState apply(const PureState& psi) const;

 private:
  std::array<double, 6> angles_;
  Mat2 ion_;
  Mat2 photon_;
};

struct RotationSearchOptions {
  int restarts = 8;
  std::uint64_t seed = 0x5eed;
  double tolerance = 1e-8;
  int max_evaluations = 20000;
};

struct RotationSearchResult {
  LocalRotation rotation;
  double fidelity = 0.0;
  int best_restart = 0;
};

/// Nelder-Mead search over the six Euler angles maximizing
/// fidelity(R rho R^dagger, target). Restart 0 starts at the identity, the
/// others at seeded random angles; the best value wins, ties to the lowest
/// restart index.
RotationSearchResult optimize_local_rotation(const DensityMatrix& rho, const PureState& target,
                                             const RotationSearchOptions& options = {});

}  // namespace mmlink
