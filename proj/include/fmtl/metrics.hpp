#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace fmtl {

/// Number of midpoint-rule cells used by imse.
inline constexpr int kImseCells = 8192;

/// int_0^1 (est(x) - truth(x))^2 dx by the composite midpoint rule.
template <class Est, class Truth>
double imse(const Est& est, const Truth& truth, int cells = kImseCells) {
  const double h = 1.0 / cells;
  double sum = 0.0;
  for (int k = 0; k < cells; ++k) {
    const double x = (k + 0.5) * h;
    const double d = est(x) - truth(x);
    sum += d * d;
  }
  return sum * h;
}

/// Order statistics of replicate risks (nearest-rank quantiles).
struct RiskSummary {
  std::vector<double> values;
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Nearest-rank quantile: the ceil(p n)-th smallest value (1-based, at least 1).
double nearest_rank(std::span<const double> sorted, double p);

/// Throws std::invalid_argument on empty input.
RiskSummary summarize(std::span<const double> values);

/// OLS slope of log(risk) on log(size). Needs at least 3 points, all
/// coordinates positive; throws std::invalid_argument otherwise.
double rate_slope(std::span<const std::pair<double, double>> points);

}  // namespace fmtl
