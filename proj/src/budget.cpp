#include "mmlink/budget.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mmlink/seeds.hpp"

namespace mmlink::budget {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

void validate(const EfficiencyEntry& e) {
  if (!(e.value >= 0.0 && e.value <= 1.0)) throw std::invalid_argument("budget entry '" + e.name + "': value must lie in [0,1]");
  if (e.sigma && !(*e.sigma >= 0.0)) throw std::invalid_argument("budget entry '" + e.name + "': sigma must be >= 0");
  if (e.decimals < 0) throw std::invalid_argument("budget entry '" + e.name + "': decimals must be >= 0");
}

double truncated_normal(std::mt19937_64& rng, double mean, double sigma) {
  if (sigma == 0.0) return mean;
  std::normal_distribution<double> normal(mean, sigma);
  for (;;) {
    const double x = normal(rng);
    if (x >= 0.0 && x <= 1.0) return x;
  }
}

}  // namespace

double implicit_sigma(const EfficiencyEntry& entry) {
  validate(entry);
  if (entry.sigma) return *entry.sigma;
  return 0.5 * std::pow(10.0, -entry.decimals);
}

EfficiencyEntry parse_quoted(std::string name, std::string_view quoted) {
  quoted = trim(quoted);
  EfficiencyEntry e;
  e.name = std::move(name);
  std::string_view number = quoted;
  std::string_view paren;
  if (const auto open = quoted.find('('); open != std::string_view::npos) {
    const auto close = quoted.find(')', open);
    if (close == std::string_view::npos || close + 1 != quoted.size()) {
      throw std::invalid_argument("malformed quoted value '" + std::string(quoted) + "'");
    }
    number = quoted.substr(0, open);
    paren = quoted.substr(open + 1, close - open - 1);
  }
  e.value = to_double(number);
  const auto dot = number.find('.');
  e.decimals = dot == std::string_view::npos ? 0 : static_cast<int>(number.size() - dot - 1);
  if (!paren.empty()) {
    // Digits in parentheses count units of the last quoted decimal place.
    e.sigma = to_double(paren) * std::pow(10.0, -e.decimals);
  }
  validate(e);
  return e;
}

ChainResult chain_product(const std::vector<EfficiencyEntry>& entries) {
  if (entries.empty()) throw std::invalid_argument("chain_product: empty chain");
  double value = 1.0;
  double rel2 = 0.0;
  bool has_zero = false;
  for (const auto& e : entries) {
    const double s = implicit_sigma(e);
    value *= e.value;
    if (e.value == 0.0) {
      if (s != 0.0) throw std::invalid_argument("chain_product: entry '" + e.name + "' is zero with nonzero sigma");
      has_zero = true;
      continue;
    }
    rel2 += (s / e.value) * (s / e.value);
  }
  if (has_zero) return {0.0, 0.0};
  return {value, value * std::sqrt(rel2)};
}

ChainResult monte_carlo_chain(const std::vector<EfficiencyEntry>& entries, int samples, std::uint64_t seed) {
  if (entries.empty()) throw std::invalid_argument("monte_carlo_chain: empty chain");
  if (samples < 2) throw std::invalid_argument("monte_carlo_chain: need at least 2 samples");
  auto rng = make_rng(seed, 0);
  double mean = 0.0, m2 = 0.0;
  for (int k = 0; k < samples; ++k) {
    double prod = 1.0;
    for (const auto& e : entries) prod *= truncated_normal(rng, e.value, implicit_sigma(e));
    const double delta = prod - mean;
    mean += delta / (k + 1);
    m2 += delta * (prod - mean);
  }
  return {mean, std::sqrt(m2 / (samples - 1))};
}

double compare_with_model(const ChainResult& budget, const ChainResult& observed) {
  const double s = std::hypot(budget.sigma, observed.sigma);
  if (!(s > 0.0)) throw std::invalid_argument("compare_with_model: combined sigma must be > 0");
  return std::abs(budget.value - observed.value) / s;
}

std::vector<EfficiencyEntry> parse_budget(std::string_view text) {
  std::vector<EfficiencyEntry> out;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
      throw std::invalid_argument("budget line " + std::to_string(line_no) + ": expected 'name,value,sigma'");
    }
    try {
      auto e = parse_quoted(std::string(trim(line.substr(0, c1))), line.substr(c1 + 1, c2 - c1 - 1));
      const auto sigma = trim(line.substr(c2 + 1));
      if (!sigma.empty()) {
        if (e.sigma) throw std::invalid_argument("sigma given twice");
        e.sigma = to_double(sigma);
      }
      validate(e);
      out.push_back(std::move(e));
    } catch (const std::invalid_argument& ex) {
      throw std::invalid_argument("budget line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  if (out.empty()) throw std::invalid_argument("budget file has no entries");
  return out;
}

std::vector<EfficiencyEntry> load_budget(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open budget file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_budget(ss.str());
}

std::vector<EfficiencyEntry> chain_854nm() {
  return {parse_quoted("cavity_output", "0.78(2)"), parse_quoted("free_space_optics", "0.96(1)"),
          parse_quoted("fiber_coupling", "0.81(3)"), parse_quoted("detector_854", "0.87(2)")};
}

std::vector<EfficiencyEntry> chain_1550nm() {
  return {parse_quoted("cavity_output", "0.78(2)"),    parse_quoted("free_space_optics", "0.96(1)"),
          parse_quoted("fiber_coupling", "0.81(3)"),   parse_quoted("conversion_and_analysis", "0.30(1)"),
          parse_quoted("fiber_101km", "0.0136(4)"),    parse_quoted("fiber_joiner", "0.95"),
          parse_quoted("detector_fiber_coupling", "0.83(3)"), parse_quoted("detector_1550", "0.75(2)")};
}

}  // namespace mmlink::budget
