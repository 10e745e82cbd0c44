#include "mmlink/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace mmlink::geometry {

namespace {

constexpr double kForceTolerance = 1e-13;
constexpr int kMaxNewtonIterations = 200;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

double residual_norm(const std::vector<double>& f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> dimensionless_equilibrium(int n) {
  std::vector<double> u(static_cast<std::size_t>(n));
  const double spacing = 2.018 / std::pow(static_cast<double>(n), 0.559);
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = (i - 0.5 * (n - 1)) * spacing;
  if (n == 1) return {0.0};

  auto f = dimensionless_forces(u);
  double res = residual_norm(f);
  for (int it = 0; it < kMaxNewtonIterations && res > kForceTolerance; ++it) {
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd force(n);
    for (int i = 0; i < n; ++i) {
      hess(i, i) = 1.0;
      force(i) = f[static_cast<std::size_t>(i)];
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double c = 2.0 / std::pow(std::abs(u[static_cast<std::size_t>(i)] - u[static_cast<std::size_t>(j)]), 3);
        hess(i, i) += c;
        hess(i, j) -= c;
      }
    }
    const Eigen::VectorXd step = hess.ldlt().solve(force);
    // Backtrack so ions keep their order and the residual drops.
    double scale = 1.0;
    for (int k = 0; k < 40; ++k, scale *= 0.5) {
      std::vector<double> trial = u;
      for (int i = 0; i < n; ++i) trial[static_cast<std::size_t>(i)] += scale * step(i);
      bool ordered = true;
      for (std::size_t i = 1; i < trial.size(); ++i) ordered = ordered && trial[i] > trial[i - 1];
      if (!ordered) continue;
      const auto ft = dimensionless_forces(trial);
      const double rt = residual_norm(ft);
      if (rt < res || k == 39) {
        u = std::move(trial);
        f = ft;
        res = rt;
        break;
      }
    }
  }
  if (!(res <= 1e-10)) {
    throw std::runtime_error("equilibrium_positions: no convergence, residual norm " + std::to_string(res));
  }
  return u;
}

// Spacing of the central neighbouring pair in units of the length scale.
double central_spacing(int n) {
  const auto u = dimensionless_equilibrium(n);
  const auto i = static_cast<std::size_t>(n / 2);
  return u[i] - u[i - 1];
}

}  // namespace

double length_scale_um(double omega_z, double mass) {
  if (!(omega_z > 0.0) || !(mass > 0.0)) throw std::invalid_argument("length_scale: omega_z and mass must be > 0");
  const double e2 = constants::elementary_charge * constants::elementary_charge;
  const double l3 = e2 / (4.0 * std::numbers::pi * constants::vacuum_permittivity * mass * omega_z * omega_z);
  return std::cbrt(l3) * 1e6;
}

std::vector<double> dimensionless_forces(const std::vector<double>& u) {
  std::vector<double> f(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    double fi = -u[i];
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (i == j) continue;
      const double d = u[i] - u[j];
      fi += (d > 0 ? 1.0 : -1.0) / (d * d);
    }
    f[i] = fi;
  }
  return f;
}

std::vector<double> equilibrium_positions(int n, double omega_z, double mass) {
  if (n < 1) throw std::invalid_argument("equilibrium_positions: n must be >= 1");
  const double l = length_scale_um(omega_z, mass);
  auto u = dimensionless_equilibrium(n);
  for (double& x : u) x *= l;
  return u;
}

double string_angle_from_projection(double spacing_um, double projected_um) {
  if (!(spacing_um > 0.0)) throw std::invalid_argument("string_angle: spacing must be > 0");
  if (!(projected_um >= 0.0)) throw std::invalid_argument("string_angle: projection must be >= 0");
  if (projected_um > spacing_um) throw std::invalid_argument("string_angle: projection exceeds ion spacing");
  return rad2deg(std::acos(projected_um / spacing_um));
}

double find_axial_frequency(double target_projection_um, double angle_deg, double mass, int n_ions) {
  if (n_ions < 2) throw std::invalid_argument("find_axial_frequency: need at least two ions");
  if (!(target_projection_um > 0.0)) throw std::invalid_argument("find_axial_frequency: target must be > 0");
  const double c = std::cos(deg2rad(angle_deg));
  const double u = central_spacing(n_ions);
  auto residual = [&](double log_omega) {
    return std::log(length_scale_um(std::exp(log_omega), mass) * u * c / target_projection_um);
  };
  const double lo = std::log(2.0 * std::numbers::pi * 1e2);
  const double hi = std::log(2.0 * std::numbers::pi * 1e10);
  if (!(c > 0.0)) throw std::runtime_error("find_axial_frequency: no root, string perpendicular to cavity axis");
  const double flo = residual(lo), fhi = residual(hi);
  if (!(flo * fhi < 0.0)) throw std::runtime_error("find_axial_frequency: no root in frequency bracket");
  boost::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(residual, lo, hi, flo, fhi,
                                                        boost::math::tools::eps_tolerance<double>(50), iters);
  return std::exp(0.5 * (a + b));
}

std::vector<double> StringGeometry::resolved_positions() const {
  if (!positions.empty()) {
    if (static_cast<int>(positions.size()) != n_ions) throw std::invalid_argument("geometry: positions do not match n_ions");
    return positions;
  }
  return equilibrium_positions(n_ions, omega_z, mass);
}

std::vector<double> gaussian_coupling(const StringGeometry& g) {
  if (!(g.waist_um > 0.0)) throw std::invalid_argument("gaussian_coupling: waist must be > 0");
  const double s = std::sin(deg2rad(g.angle_deg));
  std::vector<double> x;
  for (double z : g.resolved_positions()) {
    const double r = std::abs((z - g.axial_shift_um) * s);
    x.push_back(std::exp(-(r / g.waist_um) * (r / g.waist_um)));
  }
  return x;
}

double fit_waist(StringGeometry g, const std::vector<CouplingTarget>& targets, double lo_um, double hi_um) {
  if (targets.empty()) throw std::invalid_argument("fit_waist: no targets");
  g.positions = g.resolved_positions();
  auto cost = [&](double w) {
    double sum = 0.0;
    for (const auto& t : targets) {
      g.waist_um = w;
      g.axial_shift_um = t.axial_shift_um;
      const auto x = gaussian_coupling(g);
      if (x.size() != t.x.size()) throw std::invalid_argument("fit_waist: target size mismatch");
      for (std::size_t i = 0; i < x.size(); ++i) sum += (x[i] - t.x[i]) * (x[i] - t.x[i]);
    }
    return sum;
  };
  return boost::math::tools::brent_find_minima(cost, lo_um, hi_um, 50).first;
}

double reduced_coupling(double x, double gamma, double g0) {
  if (!(x >= 0.0 && x <= 1.0) || !(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("reduced_coupling: x and gamma must lie in [0,1]");
  }
  return x * gamma * g0;
}

}  // namespace mmlink::geometry
