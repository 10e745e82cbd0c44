#include "mmlink/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace mmlink {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void ChannelModel::validate() const {
  if (!is_probability(transmission)) throw std::invalid_argument("channel.transmission must lie in [0,1]");
  if (!is_probability(signal_probability)) throw std::invalid_argument("channel.signal_probability must lie in [0,1]");
  if (!(background_rate >= 0.0) || !std::isfinite(background_rate)) {
    throw std::invalid_argument("channel.background_rate must be >= 0");
  }
  if (!(window > 0.0) || !std::isfinite(window)) throw std::invalid_argument("channel.window must be > 0");
  if (!is_probability(background_probability())) throw std::invalid_argument("channel: background_rate * window exceeds 1");
}

ChannelModel ChannelModel::from_measured(double measured_probability, double background_rate, double window,
                                         double transmission) {
  ChannelModel m{transmission, background_rate, window, 0.0};
  const double b = m.background_probability();
  if (!(measured_probability >= b)) {
    throw std::invalid_argument("measured detection probability is below the background click probability");
  }
  m.signal_probability = measured_probability - b;
  m.validate();
  return m;
}

double background_fraction(const ChannelModel& model) {
  model.validate();
  const double b = model.background_probability();
  const double s = model.signal_probability;
  if (!(s + b > 0.0)) throw std::invalid_argument("background_fraction: signal and background are both zero");
  return b / (b + s);
}

std::array<std::array<double, 4>, 9> noisy_probabilities(const DensityMatrix& ideal, double lambda) {
  if (!is_probability(lambda)) throw std::invalid_argument("noisy_probabilities: lambda must lie in [0,1]");
  Mat4 background = Mat4::Zero();
  const Mat2 ion = partial_trace(ideal, Subsystem::Ion);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 2; ++k) background(2 * a + k, 2 * b + k) = 0.5 * ion(a, b);
  const DensityMatrix bg(background);

  std::array<std::array<double, 4>, 9> out{};
  const auto settings = all_settings();
  for (std::size_t s = 0; s < 9; ++s) {
    const auto p = born_probabilities(ideal, settings[s]);
    const auto q = born_probabilities(bg, settings[s]);
    double sum = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      out[s][k] = (1.0 - lambda) * p[k] + lambda * q[k];
      sum += out[s][k];
    }
    for (auto& v : out[s]) v /= sum;
  }
  return out;
}

DensityMatrix noisy_state(const DensityMatrix& ideal, double lambda, const NoisyStateOptions& options) {
  const auto record = record_from_probabilities(noisy_probabilities(ideal, lambda), options.synthetic_counts);
  return mle_reconstruct(record, options.mle).rho;
}

DensityMatrix noisy_state(const DensityMatrix& ideal, const ChannelModel& model, const NoisyStateOptions& options) {
  return noisy_state(ideal, background_fraction(model), options);
}

double apply_loss(double photon_probability, const ChannelModel& model) {
  if (!is_probability(photon_probability)) throw std::invalid_argument("apply_loss: probability must lie in [0,1]");
  model.validate();
  return photon_probability * model.transmission;
}

}  // namespace mmlink
