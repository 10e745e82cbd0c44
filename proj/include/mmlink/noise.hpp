#pragma once

// Fiber loss and detector-background models for heralded ion-photon states.

#include <cstdint>

#include "mmlink/qstate.hpp"
#include "mmlink/tomography.hpp"

namespace mmlink {

struct ChannelModel {
  double transmission = 0.0136;
  double background_rate = 2.0;  // counts per second, both detectors summed
  double window = 50e-6;         // seconds
  double signal_probability = 6.8e-4;

  void validate() const;
  /// Per-window background click probability.
  double background_probability() const { return background_rate * window; }

  /// Model whose signal probability is the measured per-window detection
  /// probability minus the background contribution.
  static ChannelModel from_measured(double measured_probability, double background_rate, double window,
                                    double transmission = 0.0136);
};

/// lambda = b / (b + s): fraction of heralds caused by background clicks.
double background_fraction(const ChannelModel& model);

/// Outcome probabilities (1 - lambda) Born(ideal) + lambda Born(rho_ion x I/2)
/// for all nine settings.
std::array<std::array<double, 4>, 9> noisy_probabilities(const DensityMatrix& ideal, double lambda);

struct NoisyStateOptions {
  std::uint64_t synthetic_counts = 10'000'000;  // per setting
  MleOptions mle{};
};

/// Maximum-likelihood state reconstructed from the background-contaminated
/// outcome probabilities of `ideal`.
DensityMatrix noisy_state(const DensityMatrix& ideal, const ChannelModel& model, const NoisyStateOptions& options = {});
DensityMatrix noisy_state(const DensityMatrix& ideal, double lambda, const NoisyStateOptions& options = {});

double apply_loss(double photon_probability, const ChannelModel& model);

}  // namespace mmlink
