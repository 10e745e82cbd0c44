#pragma once

// Two-qubit ion-photon states, Pauli measurement settings and Born-rule
// probabilities.
//
// Basis ordering is fixed as {|up,H>, |up,V>, |down,H>, |down,V>}: the ion is
// the first tensor factor. Z eigenstates carry +1 for |up> and |H>, -1 for
// |down> and |V>. The ion labels map to atomic levels as |up> = |D'> and
// |down> = |S> (the |D> population is moved to |S> before measurement).

#include <array>
#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace mmlink {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;

inline constexpr std::string_view kBasisOrderingHeader =
    "# basis: |up,H>, |up,V>, |down,H>, |down,V>";

enum class Basis { X, Y, Z };
enum class Subsystem { Ion, Photon };

char basis_name(Basis b);
Basis parse_basis(std::string_view s);

struct MeasurementSetting {
  Basis ion = Basis::Z;
  Basis photon = Basis::Z;

  friend bool operator==(const MeasurementSetting&, const MeasurementSetting&) = default;
};

/// All nine (ion, photon) Pauli settings, ion-major order XX, XY, ..., ZZ.
std::array<MeasurementSetting, 9> all_settings();
std::size_t setting_index(const MeasurementSetting& s);
std::string to_string(const MeasurementSetting& s);

/// Outcome cells of one setting, in the order (+,+), (+,-), (-,+), (-,-) with
/// the ion outcome first.
inline constexpr std::array<std::array<int, 2>, 4> kOutcomes{{{+1, +1}, {+1, -1}, {-1, +1}, {-1, -1}}};
std::size_t outcome_index(int ion_outcome, int photon_outcome);

/// Projector onto the eigenvalue `outcome` (+1 or -1) of the Pauli operator `b`.
Mat2 pauli_projector(Basis b, int outcome);
Mat2 pauli(Basis b);

class PureState {
 public:
  /// Normalization must already hold within 1e-12.
  explicit PureState(const Vec4& amplitudes);
  static PureState normalized(const Vec4& amplitudes);

  const Vec4& amplitudes() const { return amps_; }
  Mat4 projector() const { return amps_ * amps_.adjoint(); }

 private:
  Vec4 amps_;
};

/// (|up,V> + e^{i theta} |down,H>) / sqrt(2).
PureState bell_state(double theta);
PureState product_state(int ion_z, int photon_z);

class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positivity; throws
  /// std::invalid_argument naming the violated invariant.
  explicit DensityMatrix(const Mat4& m);

  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed();
  /// p |psi><psi| + (1 - p) I/4.
  static DensityMatrix werner(double p, const PureState& psi = bell_state(0.0));
  /// Hermitian part, eigenvalues clipped at zero and trace renormalized.
  static DensityMatrix nearest_physical(const Mat4& m);

  const Mat4& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }
  double purity() const;

 private:
  Mat4 m_;
};

/// Describes the first violated density-matrix invariant, if any.
std::optional<std::string> density_matrix_violation(const Mat4& m);

std::array<double, 4> born_probabilities(const DensityMatrix& rho, const MeasurementSetting& setting);
Mat2 partial_trace(const DensityMatrix& rho, Subsystem keep);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Text form: basis header line, then four lines of four comma-separated
/// "re+imi" entries.
std::string to_text(const DensityMatrix& rho);
DensityMatrix density_matrix_from_text(std::string_view text);

std::string format_complex(Complex z);
Complex parse_complex(std::string_view s);

}  // namespace mmlink
