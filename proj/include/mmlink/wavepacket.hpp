#pragma once

// Lindblad model of single-photon generation by a bichromatic cavity-mediated
// Raman transition, and the drive calibrations built on it.
//
// Hilbert space: atomic {S, P, D, D'} x cavity {vacuum, 1 photon H,
// 1 photon V}, index 3 * atom + cavity. All rates are angular (rad/s).
// The frame rotates with drive tone 1 (which drives S -> D' and yields a V
// photon); tone 2 (S -> D, H photon) oscillates at the D-D' splitting.

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mmlink::wavepacket {

inline constexpr int kAtomicLevels = 4;
inline constexpr int kCavityStates = 3;
inline constexpr int kDimension = kAtomicLevels * kCavityStates;

enum Atom : int { S = 0, P = 1, D = 2, Dprime = 3 };
enum Cavity : int { Vacuum = 0, PhotonH = 1, PhotonV = 2 };
constexpr int state_index(Atom a, Cavity c) { return kCavityStates * a + c; }

using Matrix = Eigen::Matrix<std::complex<double>, kDimension, kDimension>;

struct LevelScheme {
  double g0 = 2.0 * 3.14159265358979323846 * 1.53e6;
  double gamma = 0.784;       // common reduction (ion motion etc.)
  double coupling_x = 1.0;    // Gaussian-mode factor of this ion
  double cg_h = 0.81;         // effective Clebsch-Gordan x polarization factor, P-D / H
  double cg_v = 1.0;          // same for P-D' / V
  double kappa = 2.0 * 3.14159265358979323846 * 0.07e6;  // cavity field decay
  double gamma_p = 1.0 / 6.924e-9;                        // P population decay
  double branching_s = 0.9347 + 0.0066 + 0.0587 / 15.0;    // includes levels outside the model
  double branching_d = 0.0587 * 2.0 / 3.0;
  double branching_dprime = 0.0587 * 4.0 / 15.0;
  double detuning = 2.0 * 3.14159265358979323846 * 374.58e6;  // tone 1 from S-P resonance
  double drive_splitting = -2.0 * 3.14159265358979323846 * 7.0e6;  // E_D - E_D' = detuning_2 - detuning_1
  double omega_total = 2.0 * 3.14159265358979323846 * 31.47e6;  // Omega^-
  double drive_ratio = 0.81;  // Omega_1 / Omega_2
  double sigma_plus_ratio = 0.57735026918962576;  // sigma+ Rabi frequency / Omega^-
  std::optional<double> sigma_plus_detuning;      // defaults to `detuning`
  /// Two-photon detuning of the drive; defaults to the AC-Stark-compensated
  /// resonance.
  std::optional<double> raman_detuning;

  void validate() const;
  double g_h() const { return cg_h * coupling_x * gamma * g0; }
  double g_v() const { return cg_v * coupling_x * gamma * g0; }
  double omega1() const;
  double omega2() const;
  /// Light shift of S from the off-resonant sigma+ component.
  double sigma_plus_shift() const;
};

/// (Omega_1, Omega_2) with Omega_1^2 + Omega_2^2 = Omega^2, Omega_1/Omega_2 = ratio.
std::pair<double, double> split_drive(double omega_total, double ratio);

struct Hamiltonian {
  Matrix static_part;  // time-independent terms
  Matrix rotating;     // coefficient of exp(-i s t), s = drive_splitting; add h.c.
};
Hamiltonian build_hamiltonian(const LevelScheme& scheme, double raman_detuning);

struct Wavepacket {
  std::vector<double> time_us;
  std::vector<double> density_h;  // per microsecond
  std::vector<double> density_v;
  std::vector<double> cumulative;  // H + V
  std::vector<double> cumulative_h;
  std::vector<double> cumulative_v;
  std::vector<double> cumulative_spontaneous_d;  // P -> D, D' scattering
  std::vector<double> trace;
  Matrix final_state;
  double step_us = 0.0;
  double raman_detuning = 0.0;
  double max_trace_error = 0.0;
  double min_population = 0.0;
  double max_population = 0.0;

  double emission_probability() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  double peak_time_us() const;
  /// Emission + remaining population bookkeeping: should equal one.
  double bookkeeping_total() const;
};

struct IntegrateOptions {
  int output_stride = 1;
};

/// Integrates the master equation from |S, vacuum> over a square pulse.
/// Fourth-order Magnus steps with exact exponentials; the requested step is
/// shortened so an integer number of steps spans one drive-splitting period,
/// which lets step propagators be reused periodically. Throws
/// std::runtime_error if the trace drifts by more than 1e-6.
Wavepacket integrate(const LevelScheme& scheme, double pulse_duration_us, double step_us,
                     const IntegrateOptions& options = {});

/// Multiplies emission densities and cumulative probabilities by a
/// detection-path efficiency.
Wavepacket detected(const Wavepacket& w, double path_efficiency);

/// Time-averaged S -> D',V transfer of the single-tone probe Hamiltonian at
/// a given two-photon detuning.
double raman_transfer(const LevelScheme& scheme, double raman_detuning);

/// Two-photon detuning of the D',V resonance with the drive switched off.
double bare_raman_resonance(const LevelScheme& scheme);

/// Drive-induced shift of the Raman resonance (positive when the initial
/// state is pushed up), located by scanning the two-photon detuning for
/// maximal transfer. Zero drive gives zero.
double stark_shift(const LevelScheme& scheme);

/// Omega^- for which stark_shift equals `target_shift`, with the scheme's
/// drive ratio kept.
double calibrate_rabi(double target_shift, const LevelScheme& scheme);

}  // namespace mmlink::wavepacket
