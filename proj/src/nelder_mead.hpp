#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace mmlink {

struct NelderMeadOptions {
  double tolerance = 1e-8;  // spread of objective values across the simplex
  int max_evaluations = 20000;
  double initial_step = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Standard reflection/expansion/contraction/shrink simplex minimizer.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& start, const NelderMeadOptions& opt) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> pts(n + 1, start);
  std::vector<double> vals(n + 1);
  for (std::size_t k = 0; k < n; ++k) pts[k + 1][k] += opt.initial_step;
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t k = 0; k <= n; ++k) vals[k] = eval(pts[k]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  bool converged = false;
  while (evals < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::abs(vals[worst] - vals[best]) <= opt.tolerance) {
      converged = true;
      break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[k][d] / static_cast<double>(n);
    }
    for (std::size_t d = 0; d < n; ++d) trial[d] = centroid[d] + (centroid[d] - pts[worst][d]);
    const double fr = eval(trial);
    if (fr < vals[best]) {
      for (std::size_t d = 0; d < n; ++d) trial2[d] = centroid[d] + 2.0 * (centroid[d] - pts[worst][d]);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    for (std::size_t d = 0; d < n; ++d) {
      trial2[d] = outside ? centroid[d] + 0.5 * (trial[d] - centroid[d]) : centroid[d] + 0.5 * (pts[worst][d] - centroid[d]);
    }
    const double fc = eval(trial2);
    if (fc < std::min(fr, vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      for (std::size_t d = 0; d < n; ++d) pts[k][d] = pts[best][d] + 0.5 * (pts[k][d] - pts[best][d]);
      vals[k] = eval(pts[k]);
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  const auto idx = static_cast<std::size_t>(it - vals.begin());
  return {pts[idx], *it, evals, converged};
}

}  // namespace mmlink
