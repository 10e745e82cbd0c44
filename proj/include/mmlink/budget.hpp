#pragma once

// Detection-path efficiency chains with first-order uncertainty propagation.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmlink::budget {

struct EfficiencyEntry {
  std::string name;
  double value = 1.0;
  std::optional<double> sigma;
  int decimals = 2;  // decimal places quoted for value; used when sigma is absent
};

/// Explicit sigma if given, otherwise half a unit in the last quoted decimal.
double implicit_sigma(const EfficiencyEntry& entry);

/// Parses a quoted value such as "0.95", "0.30(1)" or "0.0136(4)".
EfficiencyEntry parse_quoted(std::string name, std::string_view quoted);

struct ChainResult {
  double value = 0.0;
  double sigma = 0.0;
};

/// Product of entry values; sigma = value * sqrt(sum (sigma_i / value_i)^2).
ChainResult chain_product(const std::vector<EfficiencyEntry>& entries);

/// Seeded Monte Carlo cross-check: each entry drawn from a normal truncated
/// to [0, 1], the product's mean and standard deviation returned.
ChainResult monte_carlo_chain(const std::vector<EfficiencyEntry>& entries, int samples, std::uint64_t seed);

/// |v1 - v2| / sqrt(s1^2 + s2^2).
double compare_with_model(const ChainResult& budget, const ChainResult& observed);

/// Budget file: lines "name,value,sigma"; empty sigma means implicit. Lines
/// starting with '#' and blank lines are skipped.
std::vector<EfficiencyEntry> parse_budget(std::string_view text);
std::vector<EfficiencyEntry> load_budget(const std::string& path);

std::vector<EfficiencyEntry> chain_854nm();
std::vector<EfficiencyEntry> chain_1550nm();

}  // namespace mmlink::budget
