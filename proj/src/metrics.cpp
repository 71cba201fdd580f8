#include "fmtl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fmtl {

double nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty list");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

RiskSummary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty list");
  RiskSummary s;
  s.values.assign(values.begin(), values.end());
  std::vector<double> sorted = s.values;
  std::sort(sorted.begin(), sorted.end());
  s.count = sorted.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = nearest_rank(sorted, 0.25);
  s.median = nearest_rank(sorted, 0.5);
  s.q3 = nearest_rank(sorted, 0.75);
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.count);
  return s;
}

double rate_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("rate slope needs at least 3 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [size, risk] : points) {
    if (!(size > 0.0) || !(risk > 0.0)) {
      throw std::invalid_argument("rate slope needs positive sizes and risks");
    }
    sx += std::log(size);
    sy += std::log(risk);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [size, risk] : points) {
    const double dx = std::log(size) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(risk) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("rate slope needs at least two distinct sizes");
  return sxy / sxx;
}

}  // namespace fmtl
