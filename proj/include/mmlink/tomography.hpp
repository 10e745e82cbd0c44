#pragma once

// Measurement records over the nine Pauli settings, their forward simulation,
// maximum-likelihood reconstruction and Poisson-resampling uncertainties.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mmlink/qstate.hpp"

namespace mmlink {

using OutcomeCounts = std::array<std::uint64_t, 4>;

/// Counts for all nine settings. Cells follow kOutcomes order. Per-setting
/// totals may differ.
class MeasurementRecord {
 public:
  struct Entry {
    MeasurementSetting setting;
    OutcomeCounts counts{};
  };

  MeasurementRecord() = default;
  /// Requires each of the nine settings exactly once, in any order.
  explicit MeasurementRecord(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  const OutcomeCounts& counts(const MeasurementSetting& s) const;
  std::uint64_t shots(const MeasurementSetting& s) const;
  std::uint64_t total() const;
  bool empty() const { return entries_.empty(); }

  /// Multiplies every cell by `factor`.
  MeasurementRecord scaled(std::uint64_t factor) const;

 private:
  std::vector<Entry> entries_;
};

/// Counts drawn from `probabilities` rounded to `total` per setting; the
/// largest cell absorbs the rounding remainder.
MeasurementRecord record_from_probabilities(const std::array<std::array<double, 4>, 9>& probabilities,
                                            std::uint64_t total_per_setting);
MeasurementRecord exact_record(const DensityMatrix& rho, std::uint64_t total_per_setting);

/// Multinomial draws per setting from the Born probabilities of `rho`.
/// Setting k uses stream k of `seed`.
MeasurementRecord simulate_counts(const DensityMatrix& rho, std::uint64_t shots_per_setting, std::uint64_t seed);

struct MleOptions {
  double tolerance = 1e-10;  // on the log-likelihood change per recorded count
  int max_iterations = 20000;
  bool keep_history = false;
};

struct ValueWithError {
  double value = 0.0;
  double stddev = 0.0;
};

struct ReconstructionResult {
  DensityMatrix rho = DensityMatrix::maximally_mixed();
  double log_likelihood = 0.0;  // sum over cells of n log p
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // log-likelihood per iteration when requested
  std::map<std::string, ValueWithError> derived;
};

/// Multinomial log-likelihood sum n log p of `rho` given `record`.
double log_likelihood(const MeasurementRecord& record, const DensityMatrix& rho);

/// Diluted R rho R fixed-point iteration from I/4. The undiluted step is
/// taken whenever it does not lower the likelihood; otherwise the step
/// (1 + eps R) rho (1 + eps R) is used with eps halved from 0.5 until it does.
ReconstructionResult mle_reconstruct(const MeasurementRecord& record, const MleOptions& options = {});

using Statistic = std::function<double(const DensityMatrix&)>;

struct BootstrapOptions {
  int resamples = 200;
  std::uint64_t seed = 1;
  MleOptions mle{1e-9, 5000, false};
};

struct BootstrapSummary {
  std::map<std::string, ValueWithError> values;
  int succeeded = 0;
  int failed = 0;
};

/// Parametric bootstrap: every cell is redrawn from Poisson(observed count),
/// the record is reconstructed again, and each statistic evaluated. Values are
/// the statistics on the original reconstruction; stddevs are sample standard
/// deviations over the resamples. Resamples where a statistic or the
/// reconstruction throws are excluded; more than 10% failures throws.
BootstrapSummary monte_carlo_uncertainty(const MeasurementRecord& record,
                                         const std::map<std::string, Statistic>& statistics,
                                         const BootstrapOptions& options = {});

ValueWithError monte_carlo_uncertainty(const MeasurementRecord& record, const Statistic& statistic,
                                       const BootstrapOptions& options = {});

// Record file: header line, then "ion_basis,photon_basis,ion_outcome,photon_outcome,count".
inline constexpr std::string_view kRecordHeader = "ion_basis,photon_basis,ion_outcome,photon_outcome,count";
std::string to_csv(const MeasurementRecord& record);
MeasurementRecord record_from_csv(std::string_view text);

}  // namespace mmlink
