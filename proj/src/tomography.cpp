#include "mmlink/tomography.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

#include "mmlink/seeds.hpp"

namespace mmlink {

namespace {

constexpr double kProbabilityFloor = 1e-300;
constexpr double kMaxFailureFraction = 0.10;

struct Cell {
  Mat4 projector_conj;  // conj(P), so Tr(P rho) = sum(conj(P) .* rho)
  Mat4 projector;
  double count = 0.0;
};

std::vector<Cell> cells_of(const MeasurementRecord& record) {
  std::vector<Cell> cells;
  cells.reserve(36);
  for (const auto& e : record.entries()) {
    for (std::size_t k = 0; k < 4; ++k) {
      Cell c;
      c.projector = Eigen::kroneckerProduct(pauli_projector(e.setting.ion, kOutcomes[k][0]),
                                            pauli_projector(e.setting.photon, kOutcomes[k][1]))
                        .eval();
      c.projector_conj = c.projector.conjugate();
      c.count = static_cast<double>(e.counts[k]);
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

double cell_probability(const Cell& c, const Mat4& rho) {
  return std::max(kProbabilityFloor, c.projector_conj.cwiseProduct(rho).sum().real());
}

double log_likelihood_of(const std::vector<Cell>& cells, const Mat4& rho) {
  double l = 0.0;
  for (const auto& c : cells) {
    if (c.count > 0.0) l += c.count * std::log(cell_probability(c, rho));
  }
  return l;
}

Mat4 sandwich(const Mat4& a, const Mat4& rho) {
  Mat4 out = a * rho * a.adjoint();
  out = 0.5 * (out + out.adjoint());
  return out / out.trace().real();
}

void validate_for_reconstruction(const MeasurementRecord& record) {
  if (record.empty()) throw std::invalid_argument("mle_reconstruct: empty measurement record");
  for (const auto& e : record.entries()) {
    if (record.shots(e.setting) == 0) {
      throw std::invalid_argument("mle_reconstruct: all-zero counts for setting " + to_string(e.setting));
    }
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_outcome(std::string_view s) {
  s = trim(s);
  if (s == "+1" || s == "1") return 1;
  if (s == "-1" || s == "\xE2\x88\x92" "1") return -1;
  throw std::invalid_argument("outcome must be +1 or -1, got '" + std::string(s) + "'");
}

}  // namespace

MeasurementRecord::MeasurementRecord(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::array<int, 9> seen{};
  for (const auto& e : entries_) ++seen[setting_index(e.setting)];
  for (std::size_t k = 0; k < 9; ++k) {
    if (seen[k] != 1) {
      throw std::invalid_argument("measurement record must contain setting " + to_string(all_settings()[k]) +
                                  " exactly once");
    }
  }
}

const OutcomeCounts& MeasurementRecord::counts(const MeasurementSetting& s) const {
  for (const auto& e : entries_)
    if (e.setting == s) return e.counts;
  throw std::out_of_range("measurement record has no setting " + to_string(s));
}

std::uint64_t MeasurementRecord::shots(const MeasurementSetting& s) const {
  const auto& c = counts(s);
  return c[0] + c[1] + c[2] + c[3];
}

std::uint64_t MeasurementRecord::total() const {
  std::uint64_t t = 0;
  for (const auto& e : entries_) t += e.counts[0] + e.counts[1] + e.counts[2] + e.counts[3];
  return t;
}

MeasurementRecord MeasurementRecord::scaled(std::uint64_t factor) const {
  auto entries = entries_;
  for (auto& e : entries)
    for (auto& n : e.counts) n *= factor;
  return MeasurementRecord(std::move(entries));
}

MeasurementRecord record_from_probabilities(const std::array<std::array<double, 4>, 9>& probabilities,
                                            std::uint64_t total_per_setting) {
  std::vector<MeasurementRecord::Entry> entries;
  const auto settings = all_settings();
  for (std::size_t s = 0; s < 9; ++s) {
    MeasurementRecord::Entry e{settings[s], {}};
    std::uint64_t assigned = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      e.counts[k] = static_cast<std::uint64_t>(std::llround(probabilities[s][k] * static_cast<double>(total_per_setting)));
      assigned += e.counts[k];
    }
    const auto big = static_cast<std::size_t>(std::max_element(probabilities[s].begin(), probabilities[s].end()) -
                                              probabilities[s].begin());
    if (assigned > total_per_setting) {
      e.counts[big] -= std::min(e.counts[big], assigned - total_per_setting);
    } else {
      e.counts[big] += total_per_setting - assigned;
    }
    entries.push_back(e);
  }
  return MeasurementRecord(std::move(entries));
}

MeasurementRecord exact_record(const DensityMatrix& rho, std::uint64_t total_per_setting) {
  std::array<std::array<double, 4>, 9> probs{};
  const auto settings = all_settings();
  for (std::size_t s = 0; s < 9; ++s) probs[s] = born_probabilities(rho, settings[s]);
  return record_from_probabilities(probs, total_per_setting);
}

MeasurementRecord simulate_counts(const DensityMatrix& rho, std::uint64_t shots_per_setting, std::uint64_t seed) {
  if (shots_per_setting < 1) throw std::invalid_argument("shots must be >= 1");
  std::vector<MeasurementRecord::Entry> entries;
  const auto settings = all_settings();
  for (std::size_t s = 0; s < 9; ++s) {
    auto rng = make_rng(seed, s);
    const auto p = born_probabilities(rho, settings[s]);
    MeasurementRecord::Entry e{settings[s], {}};
    // Multinomial as a chain of conditional binomials.
    std::uint64_t remaining = shots_per_setting;
    double mass = 1.0;
    for (std::size_t k = 0; k < 3 && remaining > 0; ++k) {
      const double q = mass > 0.0 ? std::clamp(p[k] / mass, 0.0, 1.0) : 0.0;
      std::binomial_distribution<std::uint64_t> draw(remaining, q);
      e.counts[k] = draw(rng);
      remaining -= e.counts[k];
      mass -= p[k];
    }
    e.counts[3] = remaining;
    entries.push_back(e);
  }
  return MeasurementRecord(std::move(entries));
}

double log_likelihood(const MeasurementRecord& record, const DensityMatrix& rho) {
  return log_likelihood_of(cells_of(record), rho.matrix());
}

ReconstructionResult mle_reconstruct(const MeasurementRecord& record, const MleOptions& options) {
  validate_for_reconstruction(record);
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("mle_reconstruct: tolerance must be > 0");
  if (options.max_iterations < 1) throw std::invalid_argument("mle_reconstruct: max_iterations must be >= 1");

  const auto cells = cells_of(record);
  const double total = static_cast<double>(record.total());
  const Mat4 identity = Mat4::Identity();

  Mat4 rho = 0.25 * identity;
  double l = log_likelihood_of(cells, rho);
  ReconstructionResult result;
  if (options.keep_history) result.history.push_back(l);

  int it = 0;
  bool converged = false;
  while (it < options.max_iterations) {
    Mat4 r = Mat4::Zero();
    for (const auto& c : cells) {
      if (c.count > 0.0) r += (c.count / (total * cell_probability(c, rho))) * c.projector;
    }
    Mat4 candidate = sandwich(r, rho);
    double lc = log_likelihood_of(cells, candidate);
    if (!(lc >= l)) {
      bool accepted = false;
      for (double eps = 0.5; eps > 1e-12; eps *= 0.5) {
        candidate = sandwich(identity + eps * r, rho);
        lc = log_likelihood_of(cells, candidate);
        if (lc >= l) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        converged = true;  // no ascent direction left at working precision
        break;
      }
    }
    ++it;
    const double gain = lc - l;
    rho = candidate;
    l = lc;
    if (options.keep_history) result.history.push_back(l);
    if (gain / total < options.tolerance) {
      converged = true;
      break;
    }
  }

  result.rho = DensityMatrix::nearest_physical(rho);
  result.log_likelihood = l;
  result.iterations = it;
  result.converged = converged;
  return result;
}

BootstrapSummary monte_carlo_uncertainty(const MeasurementRecord& record,
                                         const std::map<std::string, Statistic>& statistics,
                                         const BootstrapOptions& options) {
  if (options.resamples < 2) throw std::invalid_argument("monte_carlo_uncertainty: resamples must be >= 2");
  const auto base = mle_reconstruct(record, options.mle);

  BootstrapSummary summary;
  std::map<std::string, std::vector<double>> samples;
  for (const auto& [name, stat] : statistics) {
    summary.values[name].value = stat(base.rho);
    samples[name].reserve(static_cast<std::size_t>(options.resamples));
  }

  for (int r = 0; r < options.resamples; ++r) {
    auto rng = make_rng(options.seed, static_cast<std::uint64_t>(r));
    auto entries = record.entries();
    for (auto& e : entries) {
      for (auto& n : e.counts) {
        if (n == 0) continue;
        std::poisson_distribution<std::uint64_t> draw(static_cast<double>(n));
        n = draw(rng);
      }
    }
    try {
      const auto fit = mle_reconstruct(MeasurementRecord(std::move(entries)), options.mle);
      std::map<std::string, double> row;
      for (const auto& [name, stat] : statistics) row[name] = stat(fit.rho);
      for (const auto& [name, v] : row) samples[name].push_back(v);
      ++summary.succeeded;
    } catch (const std::exception&) {
      ++summary.failed;
    }
  }
  if (summary.failed > kMaxFailureFraction * options.resamples) {
    throw std::runtime_error("monte_carlo_uncertainty: " + std::to_string(summary.failed) + " of " +
                             std::to_string(options.resamples) + " resamples failed");
  }
  for (auto& [name, xs] : samples) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    summary.values[name].stddev = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  }
  return summary;
}

ValueWithError monte_carlo_uncertainty(const MeasurementRecord& record, const Statistic& statistic,
                                       const BootstrapOptions& options) {
  return monte_carlo_uncertainty(record, {{"statistic", statistic}}, options).values.at("statistic");
}

std::string to_csv(const MeasurementRecord& record) {
  std::ostringstream os;
  os << kRecordHeader << '\n';
  for (const auto& e : record.entries()) {
    for (std::size_t k = 0; k < 4; ++k) {
      os << basis_name(e.setting.ion) << ',' << basis_name(e.setting.photon) << ','
         << (kOutcomes[k][0] > 0 ? "+1" : "-1") << ',' << (kOutcomes[k][1] > 0 ? "+1" : "-1") << ','
         << e.counts[k] << '\n';
    }
  }
  return os.str();
}

MeasurementRecord record_from_csv(std::string_view text) {
  std::array<MeasurementRecord::Entry, 9> table{};
  std::array<std::array<bool, 4>, 9> filled{};
  const auto settings = all_settings();
  for (std::size_t s = 0; s < 9; ++s) table[s].setting = settings[s];

  int line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kRecordHeader) throw std::invalid_argument("record file: line 1 must be the header '" + std::string(kRecordHeader) + "'");
      header_seen = true;
      continue;
    }
    std::array<std::string_view, 5> f{};
    std::string_view rest = line;
    for (std::size_t k = 0; k < 5; ++k) {
      const auto comma = rest.find(',');
      if ((k < 4) == (comma == std::string_view::npos)) {
        throw std::invalid_argument("record file: line " + std::to_string(line_no) + " must have 5 fields");
      }
      f[k] = trim(rest.substr(0, comma));
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    try {
      const MeasurementSetting s{parse_basis(f[0]), parse_basis(f[1])};
      const auto cell = outcome_index(parse_outcome(f[2]), parse_outcome(f[3]));
      std::uint64_t n = 0;
      auto [ptr, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), n);
      if (ec != std::errc{} || ptr != f[4].data() + f[4].size()) throw std::invalid_argument("bad count '" + std::string(f[4]) + "'");
      const auto si = setting_index(s);
      if (filled[si][cell]) throw std::invalid_argument("duplicate cell");
      filled[si][cell] = true;
      table[si].counts[cell] = n;
    } catch (const std::invalid_argument& ex) {
      throw std::invalid_argument("record file: line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  if (!header_seen) throw std::invalid_argument("record file: empty");
  for (std::size_t s = 0; s < 9; ++s)
    for (std::size_t k = 0; k < 4; ++k)
      if (!filled[s][k]) throw std::invalid_argument("record file: missing cell for setting " + to_string(settings[s]));
  return MeasurementRecord(std::vector<MeasurementRecord::Entry>(table.begin(), table.end()));
}

}  // namespace mmlink
