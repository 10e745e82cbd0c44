#pragma once

// Ion-string equilibrium, string/cavity alignment and Gaussian-mode coupling.
//
// Lengths are in micrometres, angular frequencies in rad/s, masses in kg.

#include <vector>

namespace mmlink::geometry {

namespace constants {
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double calcium40_mass_u = 39.9626;
inline constexpr double calcium40_mass = calcium40_mass_u * atomic_mass_unit;
}  // namespace constants

/// (e^2 / (4 pi eps0 m omega^2))^(1/3) in micrometres.
double length_scale_um(double omega_z, double mass);

/// Equilibrium axial positions, ascending and centred on zero. Newton
/// iteration on the dimensionless force balance; throws std::runtime_error
/// with the residual norm if it fails to converge.
std::vector<double> equilibrium_positions(int n, double omega_z, double mass = constants::calcium40_mass);

/// Net dimensionless force on each ion (harmonic + Coulomb) at `u`.
std::vector<double> dimensionless_forces(const std::vector<double>& u);

/// Angle in degrees between the string and the cavity axis, given the ion
/// spacing and its projection onto the cavity axis.
double string_angle_from_projection(double spacing_um, double projected_um);

/// Axial frequency at which neighbouring ions (the central pair for odd n)
/// project onto the cavity axis with spacing `target_projection_um`.
double find_axial_frequency(double target_projection_um, double angle_deg, double mass = constants::calcium40_mass,
                            int n_ions = 3);

struct StringGeometry {
  int n_ions = 3;
  double omega_z = 2.0 * 3.14159265358979323846 * 0.869e6;  // rad/s
  double mass = constants::calcium40_mass;
  std::vector<double> positions;  // um; computed from omega_z when empty
  double angle_deg = 85.3;
  double antinode_spacing_um = 0.427;
  double waist_um = 12.1;
  /// Displacement of the string along the trap axis towards ion 1 (the
  /// lowest-position ion), relative to the cavity-mode centre.
  double axial_shift_um = 0.0;

  std::vector<double> resolved_positions() const;
};

/// exp(-(r_i / waist)^2) with r_i the distance of ion i from the cavity axis.
std::vector<double> gaussian_coupling(const StringGeometry& g);

struct CouplingTarget {
  double axial_shift_um = 0.0;
  std::vector<double> x;
};

/// Single waist minimizing the squared coupling residuals over all targets.
double fit_waist(StringGeometry g, const std::vector<CouplingTarget>& targets, double lo_um = 1.0,
                 double hi_um = 100.0);

/// x * gamma * g0.
double reduced_coupling(double x, double gamma, double g0);

}  // namespace mmlink::geometry
