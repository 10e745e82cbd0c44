#include "mmlink/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace mmlink::wavepacket {

namespace {

using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

constexpr cd kI{0.0, 1.0};
constexpr int kAux = 3;  // cumulative H emission, V emission, P -> D/D' scattering
constexpr int kSubsteps = 4;

Atom atom_of(int idx) { return static_cast<Atom>(idx / kCavityStates); }
Cavity cavity_of(int idx) { return static_cast<Cavity>(idx % kCavityStates); }

// Atomic |a1><a2| on every cavity state.
Matrix atomic(Atom a1, Atom a2) {
  Matrix m = Matrix::Zero();
  for (int c = 0; c < kCavityStates; ++c) m(state_index(a1, Cavity(c)), state_index(a2, Cavity(c))) = 1.0;
  return m;
}

// Annihilation operator of one cavity polarization on every atomic state.
Matrix annihilate(Cavity mode) {
  Matrix m = Matrix::Zero();
  for (int a = 0; a < kAtomicLevels; ++a) m(state_index(Atom(a), Vacuum), state_index(Atom(a), mode)) = 1.0;
  return m;
}

std::vector<Matrix> jump_operators(const LevelScheme& s) {
  std::vector<Matrix> out;
  const double sk = std::sqrt(2.0 * s.kappa);
  out.push_back(sk * annihilate(PhotonH));
  out.push_back(sk * annihilate(PhotonV));
  out.push_back(std::sqrt(s.gamma_p * s.branching_s) * atomic(S, P));
  out.push_back(std::sqrt(s.gamma_p * s.branching_d) * atomic(D, P));
  out.push_back(std::sqrt(s.gamma_p * s.branching_dprime) * atomic(Dprime, P));
  return out;
}

// States reachable from |S, vacuum> through any Hamiltonian or jump element.
std::vector<int> reachable_states(const Hamiltonian& h, const std::vector<Matrix>& jumps) {
  Eigen::Matrix<double, kDimension, kDimension> link =
      h.static_part.cwiseAbs() + h.rotating.cwiseAbs() + Matrix(h.rotating.adjoint()).cwiseAbs();
  for (const auto& j : jumps) link += j.cwiseAbs();
  std::vector<bool> seen(kDimension, false);
  std::vector<int> queue{state_index(S, Vacuum)};
  seen[static_cast<std::size_t>(queue[0])] = true;
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const int from = queue[q];
    for (int to = 0; to < kDimension; ++to) {
      if (!seen[static_cast<std::size_t>(to)] && link(to, from) > 0.0) {
        seen[static_cast<std::size_t>(to)] = true;
        queue.push_back(to);
      }
    }
  }
  std::sort(queue.begin(), queue.end());
  return queue;
}

MatrixXcd restrict(const Matrix& m, const std::vector<int>& idx) {
  const int r = static_cast<int>(idx.size());
  MatrixXcd out(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) out(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

// Matrix of a linear map on r x r matrices, acting on row-major vec(rho),
// padded with kAux cumulative rows and columns.
MatrixXcd superoperator(const std::function<MatrixXcd(const MatrixXcd&)>& f, int r) {
  const int n = r * r + kAux;
  MatrixXcd out = MatrixXcd::Zero(n, n);
  MatrixXcd e = MatrixXcd::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      e(i, j) = 1.0;
      const MatrixXcd image = f(e);
      e(i, j) = 0.0;
      for (int k = 0; k < r; ++k)
        for (int l = 0; l < r; ++l) out(k * r + l, i * r + j) = image(k, l);
    }
  }
  return out;
}

struct Generators {
  std::vector<int> states;
  int r = 0;
  MatrixXcd fixed;     // Lindbladian of the static part, with cumulative rows
  MatrixXcd positive;  // -i[V, .], multiplied by exp(-i s t)
  MatrixXcd negative;  // -i[V^dagger, .], multiplied by exp(+i s t)
};

Generators build_generators(const LevelScheme& s, const Hamiltonian& h) {
  const auto jumps_full = jump_operators(s);
  Generators g;
  g.states = reachable_states(h, jumps_full);
  g.r = static_cast<int>(g.states.size());
  const MatrixXcd h0 = restrict(h.static_part, g.states);
  const MatrixXcd v = restrict(h.rotating, g.states);
  const MatrixXcd vd = v.adjoint();
  std::vector<MatrixXcd> jumps;
  MatrixXcd jdj = MatrixXcd::Zero(g.r, g.r);
  for (const auto& j : jumps_full) {
    jumps.push_back(restrict(j, g.states));
    jdj += jumps.back().adjoint() * jumps.back();
  }
  g.fixed = superoperator(
      [&](const MatrixXcd& rho) {
        MatrixXcd out = -kI * (h0 * rho - rho * h0) - 0.5 * (jdj * rho + rho * jdj);
        for (const auto& j : jumps) out += j * rho * j.adjoint();
        return out;
      },
      g.r);
  g.positive = superoperator([&](const MatrixXcd& rho) { return MatrixXcd(-kI * (v * rho - rho * v)); }, g.r);
  g.negative = superoperator([&](const MatrixXcd& rho) { return MatrixXcd(-kI * (vd * rho - rho * vd)); }, g.r);

  const int base = g.r * g.r;
  const double scatter_d = s.gamma_p * (s.branching_d + s.branching_dprime);
  for (int i = 0; i < g.r; ++i) {
    const int full = g.states[static_cast<std::size_t>(i)];
    const int diag = i * g.r + i;
    if (cavity_of(full) == PhotonH) g.fixed(base + 0, diag) = 2.0 * s.kappa;
    if (cavity_of(full) == PhotonV) g.fixed(base + 1, diag) = 2.0 * s.kappa;
    if (atom_of(full) == P) g.fixed(base + 2, diag) = scatter_d;
  }
  return g;
}

// Fourth-order Magnus propagator over [t, t + h] (seconds).
MatrixXcd magnus_step(const Generators& g, double split, double t, double h) {
  const double c = std::sqrt(3.0) / 6.0;
  auto a = [&](double tau) {
    const cd phase = std::exp(-kI * split * tau);
    return MatrixXcd(g.fixed + phase * g.positive + std::conj(phase) * g.negative);
  };
  const MatrixXcd a1 = a(t + h * (0.5 - c));
  const MatrixXcd a2 = a(t + h * (0.5 + c));
  const MatrixXcd omega = 0.5 * h * (a1 + a2) + (std::sqrt(3.0) / 12.0) * h * h * (a2 * a1 - a1 * a2);
  return omega.exp();
}

MatrixXcd step_propagator(const Generators& g, double split, double t, double h) {
  MatrixXcd u = magnus_step(g, split, t, h / kSubsteps);
  for (int k = 1; k < kSubsteps; ++k) u = magnus_step(g, split, t + k * h / kSubsteps, h / kSubsteps) * u;
  return u;
}

double probe_transfer(const LevelScheme& s, double delta) {
  // Single-tone probe on {S0, P0, D'V, DH}; real symmetric.
  const double omega = s.omega_total;
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  h(0, 0) = s.sigma_plus_shift();
  h(1, 1) = -s.detuning;
  h(2, 2) = -delta;
  h(3, 3) = s.drive_splitting - delta;
  h(0, 1) = h(1, 0) = 0.5 * omega;
  h(1, 2) = h(2, 1) = s.g_v();
  h(1, 3) = h(3, 1) = s.g_h();
  // Rescale to O(1) entries before diagonalising.
  const double scale = std::abs(s.detuning);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(h / scale);
  const auto& v = eig.eigenvectors();
  double transfer = 0.0;
  for (int k = 0; k < 4; ++k) transfer += v(0, k) * v(0, k) * v(2, k) * v(2, k);
  return transfer;
}

}  // namespace

void LevelScheme::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string("level scheme: ") + name + " must be >= 0");
  };
  nonneg(g0, "g0");
  nonneg(gamma, "gamma");
  nonneg(coupling_x, "coupling_x");
  nonneg(cg_h, "cg_h");
  nonneg(cg_v, "cg_v");
  nonneg(kappa, "kappa");
  nonneg(gamma_p, "gamma_p");
  nonneg(branching_s, "branching_s");
  nonneg(branching_d, "branching_d");
  nonneg(branching_dprime, "branching_dprime");
  nonneg(omega_total, "omega_total");
  nonneg(drive_ratio, "drive_ratio");
  nonneg(sigma_plus_ratio, "sigma_plus_ratio");
  if (gamma > 1.0 || coupling_x > 1.0) throw std::invalid_argument("level scheme: gamma and coupling_x must lie in [0,1]");
  if (std::abs(branching_s + branching_d + branching_dprime - 1.0) > 1e-9) {
    throw std::invalid_argument("level scheme: branching ratios must sum to 1");
  }
  if (!(std::abs(detuning) > 0.0) || !std::isfinite(detuning)) throw std::invalid_argument("level scheme: detuning must be nonzero");
  if (!std::isfinite(drive_splitting)) throw std::invalid_argument("level scheme: drive_splitting must be finite");
  if (sigma_plus_detuning && !(std::abs(*sigma_plus_detuning) > 0.0)) {
    throw std::invalid_argument("level scheme: sigma_plus_detuning must be nonzero");
  }
}

double LevelScheme::omega1() const { return omega_total > 0.0 ? split_drive(omega_total, drive_ratio).first : 0.0; }
double LevelScheme::omega2() const { return omega_total > 0.0 ? split_drive(omega_total, drive_ratio).second : 0.0; }

double LevelScheme::sigma_plus_shift() const {
  const double w = sigma_plus_ratio * omega_total;
  return w * w / (4.0 * sigma_plus_detuning.value_or(detuning));
}

std::pair<double, double> split_drive(double omega_total, double ratio) {
  if (!(omega_total > 0.0)) throw std::invalid_argument("split_drive: omega_total must be > 0");
  if (!(ratio >= 0.0) || !std::isfinite(ratio)) throw std::invalid_argument("split_drive: ratio must be >= 0");
  const double o2 = omega_total / std::sqrt(1.0 + ratio * ratio);
  return {ratio * o2, o2};
}

Hamiltonian build_hamiltonian(const LevelScheme& s, double raman_detuning) {
  s.validate();
  Hamiltonian h;
  h.static_part = Matrix::Zero();
  for (int c = 0; c < kCavityStates; ++c) {
    h.static_part(state_index(S, Cavity(c)), state_index(S, Cavity(c))) = s.sigma_plus_shift();
    h.static_part(state_index(P, Cavity(c)), state_index(P, Cavity(c))) = -s.detuning;
    h.static_part(state_index(Dprime, Cavity(c)), state_index(Dprime, Cavity(c))) = -raman_detuning;
    h.static_part(state_index(D, Cavity(c)), state_index(D, Cavity(c))) = s.drive_splitting - raman_detuning;
  }
  const Matrix drive = atomic(P, S);
  h.static_part += 0.5 * s.omega1() * (drive + drive.adjoint());
  const Matrix cav_v = atomic(P, Dprime) * annihilate(PhotonV);
  const Matrix cav_h = atomic(P, D) * annihilate(PhotonH);
  h.static_part += s.g_v() * (cav_v + cav_v.adjoint()) + s.g_h() * (cav_h + cav_h.adjoint());
  h.rotating = 0.5 * s.omega2() * drive;
  return h;
}

double Wavepacket::peak_time_us() const {
  if (time_us.empty()) throw std::logic_error("peak_time_us: empty wavepacket");
  std::size_t best = 0;
  for (std::size_t k = 1; k < time_us.size(); ++k) {
    if (density_h[k] + density_v[k] > density_h[best] + density_v[best]) best = k;
  }
  return time_us[best];
}

double Wavepacket::bookkeeping_total() const {
  double total = emission_probability() + (cumulative_spontaneous_d.empty() ? 0.0 : cumulative_spontaneous_d.back());
  for (int i = 0; i < kDimension; ++i) {
    const double pop = final_state(i, i).real();
    const Atom a = atom_of(i);
    if (a == S || a == P) total += pop;
    if (cavity_of(i) != Vacuum) total += pop;  // photon still in the cavity
  }
  return total;
}

Wavepacket integrate(const LevelScheme& scheme, double pulse_duration_us, double step_us, const IntegrateOptions& options) {
  if (!(pulse_duration_us > 0.0)) throw std::invalid_argument("integrate: pulse_duration must be > 0");
  if (!(step_us > 0.0)) throw std::invalid_argument("integrate: step must be > 0");
  if (options.output_stride < 1) throw std::invalid_argument("integrate: output_stride must be >= 1");
  scheme.validate();

  Wavepacket w;
  w.raman_detuning = scheme.raman_detuning ? *scheme.raman_detuning
                     : scheme.omega_total > 0.0 ? bare_raman_resonance(scheme) - stark_shift(scheme)
                                                : bare_raman_resonance(scheme);
  const Hamiltonian ham = build_hamiltonian(scheme, w.raman_detuning);
  const Generators gen = build_generators(scheme, ham);
  const int r = gen.r;
  const int n = r * r + kAux;

  // Shorten the step so it tiles one drive-splitting period exactly.
  const double split = scheme.drive_splitting;
  const double duration = pulse_duration_us * 1e-6;
  double h = step_us * 1e-6;
  int period_steps = 0;
  if (split != 0.0 && scheme.omega2() != 0.0) {
    const double period = 2.0 * std::numbers::pi / std::abs(split);
    period_steps = static_cast<int>(std::ceil(period / h - 1e-9));
    h = period / period_steps;
  }
  const auto full_steps = static_cast<long>(std::floor(duration / h + 1e-9));
  const double remainder = duration - static_cast<double>(full_steps) * h;
  w.step_us = h * 1e6;

  std::vector<MatrixXcd> cache;
  constexpr int kMaxCached = 8192;
  const bool periodic = period_steps > 0 && period_steps <= kMaxCached;
  if (period_steps == 0) {
    cache.push_back(step_propagator(gen, split, 0.0, h));
  } else if (periodic) {
    const long needed = std::min<long>(period_steps, std::max<long>(full_steps, 1));
    for (long k = 0; k < needed; ++k) cache.push_back(step_propagator(gen, split, static_cast<double>(k) * h, h));
  }

  VectorXcd state = VectorXcd::Zero(n);
  const auto start = std::find(gen.states.begin(), gen.states.end(), state_index(S, Vacuum)) - gen.states.begin();
  state(start * r + start) = 1.0;

  const int base = r * r;
  w.min_population = 0.0;
  w.max_population = 1.0;
  auto record = [&](double t) {
    double trace = 0.0, ph = 0.0, pv = 0.0;
    for (int i = 0; i < r; ++i) {
      const double pop = state(i * r + i).real();
      trace += pop;
      w.min_population = std::min(w.min_population, pop);
      w.max_population = std::max(w.max_population, pop);
      const Cavity c = cavity_of(gen.states[static_cast<std::size_t>(i)]);
      if (c == PhotonH) ph += pop;
      if (c == PhotonV) pv += pop;
    }
    w.max_trace_error = std::max(w.max_trace_error, std::abs(trace - 1.0));
    if (std::abs(trace - 1.0) > 1e-6 || w.min_population < -1e-9 || w.max_population > 1.0 + 1e-9) {
      throw std::runtime_error("integrate: trace drift " + std::to_string(trace - 1.0) + " at t = " + std::to_string(t * 1e6) +
                               " us; use a smaller step");
    }
    w.time_us.push_back(t * 1e6);
    w.trace.push_back(trace);
    w.density_h.push_back(2.0 * scheme.kappa * ph * 1e-6);
    w.density_v.push_back(2.0 * scheme.kappa * pv * 1e-6);
    w.cumulative_h.push_back(state(base + 0).real());
    w.cumulative_v.push_back(state(base + 1).real());
    w.cumulative.push_back(state(base + 0).real() + state(base + 1).real());
    w.cumulative_spontaneous_d.push_back(state(base + 2).real());
  };

  record(0.0);
  for (long k = 0; k < full_steps; ++k) {
    const double t = static_cast<double>(k) * h;
    if (period_steps == 0) {
      state = cache[0] * state;
    } else if (periodic) {
      state = cache[static_cast<std::size_t>(k % period_steps)] * state;
    } else {
      state = step_propagator(gen, split, t, h) * state;
    }
    if ((k + 1) % options.output_stride == 0 || k + 1 == full_steps) record(t + h);
  }
  if (remainder > 1e-9 * h) {
    const double t = static_cast<double>(full_steps) * h;
    state = step_propagator(gen, split, t, remainder) * state;
    record(duration);
  }

  w.final_state = Matrix::Zero();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) w.final_state(gen.states[static_cast<std::size_t>(i)], gen.states[static_cast<std::size_t>(j)]) = state(i * r + j);
  return w;
}

Wavepacket detected(const Wavepacket& w, double path_efficiency) {
  if (!(path_efficiency >= 0.0 && path_efficiency <= 1.0)) throw std::invalid_argument("detected: efficiency must lie in [0,1]");
  Wavepacket out = w;
  for (auto* v : {&out.density_h, &out.density_v, &out.cumulative, &out.cumulative_h, &out.cumulative_v}) {
    for (double& x : *v) x *= path_efficiency;
  }
  return out;
}

double raman_transfer(const LevelScheme& scheme, double raman_detuning) {
  scheme.validate();
  return probe_transfer(scheme, raman_detuning);
}

double bare_raman_resonance(const LevelScheme& scheme) {
  scheme.validate();
  // Cavity-dressed D',V level crossing the undriven |S,0> at zero energy.
  double delta = 0.0;
  for (int it = 0; it < 50; ++it) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    h(0, 0) = -scheme.detuning;
    h(1, 1) = -delta;
    h(2, 2) = scheme.drive_splitting - delta;
    h(0, 1) = h(1, 0) = scheme.g_v();
    h(0, 2) = h(2, 0) = scheme.g_h();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(h / std::abs(scheme.detuning));
    int k = 0;
    double weight = -1.0;
    for (int c = 0; c < 3; ++c) {
      if (std::abs(eig.eigenvectors()(1, c)) > weight) {
        weight = std::abs(eig.eigenvectors()(1, c));
        k = c;
      }
    }
    const double dressed = eig.eigenvalues()(k) * std::abs(scheme.detuning);
    const double next = delta + dressed;  // shift delta until the dressed level sits at zero
    if (std::abs(next - delta) <= 1e-12 * std::max(1.0, std::abs(delta))) return next;
    delta = next;
  }
  throw std::runtime_error("bare_raman_resonance: no convergence");
}

double stark_shift(const LevelScheme& scheme) {
  scheme.validate();
  if (scheme.omega_total == 0.0) return 0.0;
  const double bare = bare_raman_resonance(scheme);
  const double omega = scheme.omega_total;
  const double estimate = omega * omega / (4.0 * scheme.detuning) + scheme.sigma_plus_shift();
  const double margin = 2.0 * std::numbers::pi * 0.05e6 + 0.5 * std::abs(estimate);
  const double lo = bare - estimate - std::abs(estimate) - margin;
  const double hi = bare - estimate + std::abs(estimate) + margin;
  constexpr int kGrid = 4001;
  const double dx = (hi - lo) / (kGrid - 1);
  int best = 0;
  double best_t = -1.0;
  for (int k = 0; k < kGrid; ++k) {
    const double t = probe_transfer(scheme, lo + k * dx);
    if (t > best_t) {
      best_t = t;
      best = k;
    }
  }
  if (best_t < 0.05 || best == 0 || best == kGrid - 1) {
    throw std::runtime_error("stark_shift: no Raman resonance found in scan range");
  }
  const double centre = lo + best * dx;
  const auto peak = boost::math::tools::brent_find_minima([&](double d) { return -probe_transfer(scheme, d); },
                                                          centre - dx, centre + dx, 50);
  return bare - peak.first;
}

double calibrate_rabi(double target_shift, const LevelScheme& scheme) {
  if (!std::isfinite(target_shift)) throw std::invalid_argument("calibrate_rabi: target must be finite");
  if (target_shift == 0.0) return 0.0;
  LevelScheme s = scheme;
  s.raman_detuning.reset();
  auto f = [&](double omega) {
    if (omega == 0.0) return -target_shift;
    s.omega_total = omega;
    return stark_shift(s) - target_shift;
  };
  const double per_omega2 = (1.0 + s.sigma_plus_ratio * s.sigma_plus_ratio * s.detuning /
                                       s.sigma_plus_detuning.value_or(s.detuning)) /
                            (4.0 * s.detuning);
  if (!(target_shift / per_omega2 > 0.0)) throw std::runtime_error("calibrate_rabi: target shift has the wrong sign; bracket failure");
  double hi = 2.0 * std::sqrt(target_shift / per_omega2);
  double fhi = f(hi);
  for (int k = 0; k < 20 && fhi * target_shift < 0.0; ++k) {
    hi *= 2.0;
    fhi = f(hi);
  }
  const double lo = 0.0;
  const double flo = -target_shift;
  if (!(flo * fhi < 0.0)) throw std::runtime_error("calibrate_rabi: bracket failure");
  boost::uintmax_t iters = 200;
  const auto [a, b] =
      boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(36), iters);
  return 0.5 * (a + b);
}

}  // namespace mmlink::wavepacket
