#include "mmlink/qstate.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

namespace mmlink {

namespace {

constexpr double kNormTolerance = 1e-12;
constexpr double kHermitianTolerance = 1e-10;
constexpr double kTraceTolerance = 1e-10;
constexpr double kPositivityTolerance = -1e-9;

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

char basis_name(Basis b) {
  switch (b) {
    case Basis::X: return 'X';
    case Basis::Y: return 'Y';
    case Basis::Z: return 'Z';
  }
  return '?';
}

Basis parse_basis(std::string_view s) {
  s = trim(s);
  if (s == "X" || s == "x") return Basis::X;
  if (s == "Y" || s == "y") return Basis::Y;
  if (s == "Z" || s == "z") return Basis::Z;
  throw std::invalid_argument("unknown Pauli basis '" + std::string(s) + "'");
}

std::array<MeasurementSetting, 9> all_settings() {
  std::array<MeasurementSetting, 9> out;
  const std::array<Basis, 3> bases{Basis::X, Basis::Y, Basis::Z};
  std::size_t k = 0;
  for (Basis a : bases)
    for (Basis b : bases) out[k++] = {a, b};
  return out;
}

std::size_t setting_index(const MeasurementSetting& s) {
  return 3 * static_cast<std::size_t>(s.ion) + static_cast<std::size_t>(s.photon);
}

std::string to_string(const MeasurementSetting& s) {
  return std::string{basis_name(s.ion), basis_name(s.photon)};
}

std::size_t outcome_index(int ion_outcome, int photon_outcome) {
  if ((ion_outcome != 1 && ion_outcome != -1) || (photon_outcome != 1 && photon_outcome != -1)) {
    throw std::invalid_argument("measurement outcomes must be +1 or -1");
  }
  return (ion_outcome == 1 ? 0 : 2) + (photon_outcome == 1 ? 0 : 1);
}

Mat2 pauli(Basis b) {
  const Complex i{0.0, 1.0};
  Mat2 m;
  switch (b) {
    case Basis::X: m << 0, 1, 1, 0; break;
    case Basis::Y: m << 0, -i, i, 0; break;
    case Basis::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

Mat2 pauli_projector(Basis b, int outcome) {
  if (outcome != 1 && outcome != -1) throw std::invalid_argument("projector outcome must be +1 or -1");
  return 0.5 * (Mat2::Identity() + static_cast<double>(outcome) * pauli(b));
}

PureState::PureState(const Vec4& amplitudes) : amps_(amplitudes) {
  if (!amps_.allFinite()) throw std::invalid_argument("pure state: non-finite amplitude");
  if (std::abs(amps_.squaredNorm() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("pure state: amplitudes not normalized");
  }
}

PureState PureState::normalized(const Vec4& amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("pure state: zero or non-finite vector");
  return PureState(amplitudes / n);
}

PureState bell_state(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("bell_state: theta must be finite");
  const double s = 1.0 / std::numbers::sqrt2;
  Vec4 v;
  v << 0.0, s, std::polar(s, theta), 0.0;
  return PureState(v);
}

PureState product_state(int ion_z, int photon_z) {
  Vec4 v = Vec4::Zero();
  v(static_cast<int>(outcome_index(ion_z, photon_z))) = 1.0;
  return PureState(v);
}

std::optional<std::string> density_matrix_violation(const Mat4& m) {
  if (!m.allFinite()) return "entries finite";
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) return "Hermitian within 1e-10";
  if (std::abs(m.trace() - Complex{1.0, 0.0}) > kTraceTolerance) return "trace = 1 within 1e-10";
  const Mat4 h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat4> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kPositivityTolerance) return "eigenvalues >= -1e-9";
  return std::nullopt;
}

DensityMatrix::DensityMatrix(const Mat4& m) : m_(m) {
  if (auto v = density_matrix_violation(m)) {
    throw std::invalid_argument("invalid density matrix: violates " + *v);
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) { return DensityMatrix(psi.projector()); }

DensityMatrix DensityMatrix::maximally_mixed() { return DensityMatrix(Mat4::Identity() * 0.25); }

DensityMatrix DensityMatrix::werner(double p, const PureState& psi) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("werner: p must lie in [0,1]");
  return DensityMatrix(p * psi.projector() + (1.0 - p) * 0.25 * Mat4::Identity());
}

DensityMatrix DensityMatrix::nearest_physical(const Mat4& m) {
  const Mat4 h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat4> es(h);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  const double tr = ev.sum();
  if (!(tr > 0.0)) throw std::invalid_argument("nearest_physical: matrix has no positive part");
  ev /= tr;
  const Mat4 out = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

std::array<double, 4> born_probabilities(const DensityMatrix& rho, const MeasurementSetting& setting) {
  std::array<double, 4> p{};
  for (std::size_t k = 0; k < 4; ++k) {
    const Mat4 proj = Eigen::kroneckerProduct(pauli_projector(setting.ion, kOutcomes[k][0]),
                                              pauli_projector(setting.photon, kOutcomes[k][1]))
                          .eval();
    p[k] = std::max(0.0, (rho.matrix() * proj).trace().real());
  }
  return p;
}

Mat2 partial_trace(const DensityMatrix& rho, Subsystem keep) {
  const Mat4& m = rho.matrix();
  Mat2 out = Mat2::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 2; ++k) {
        if (keep == Subsystem::Ion) {
          out(a, b) += m(2 * a + k, 2 * b + k);
        } else {
          out(a, b) += m(2 * k + a, 2 * k + b);
        }
      }
  return out;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  const Mat4 d = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::string format_complex(Complex z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
  return buf;
}

Complex parse_complex(std::string_view s) {
  s = trim(s);
  if (s.empty() || s.back() != 'i') throw std::invalid_argument("complex entry must end in 'i': '" + std::string(s) + "'");
  s.remove_suffix(1);
  // Split at the last sign that is not the leading sign or an exponent sign.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string_view::npos) throw std::invalid_argument("complex entry lacks imaginary part: '" + std::string(s) + "i'");
  return {parse_double(s.substr(0, split)), parse_double(s.substr(split))};
}

std::string to_text(const DensityMatrix& rho) {
  std::ostringstream os;
  os << kBasisOrderingHeader << '\n';
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (c) os << ',';
      os << format_complex(rho(r, c));
    }
    os << '\n';
  }
  return os.str();
}

DensityMatrix density_matrix_from_text(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  if (lines.empty() || lines.front() != kBasisOrderingHeader) {
    throw std::invalid_argument("density matrix text: missing basis-ordering header");
  }
  if (lines.size() != 5) throw std::invalid_argument("density matrix text: expected 4 matrix rows");
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    std::string_view row = lines[static_cast<std::size_t>(r) + 1];
    for (int c = 0; c < 4; ++c) {
      const auto comma = row.find(',');
      if ((c < 3) == (comma == std::string_view::npos)) {
        throw std::invalid_argument("density matrix text: row " + std::to_string(r + 1) + " must have 4 entries");
      }
      m(r, c) = parse_complex(row.substr(0, comma));
      if (comma != std::string_view::npos) row.remove_prefix(comma + 1);
    }
  }
  return DensityMatrix(m);
}

}  // namespace mmlink
