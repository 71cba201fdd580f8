#pragma once

// Small builders shared by the unit tests.

#include <cmath>
#include <functional>
#include <vector>

#include "fmtl/model.hpp"
#include "fmtl/rng.hpp"
#include "fmtl/simgen.hpp"

namespace fmtl::testing {

/// n subjects observed without noise at the same points.
inline Sample noiseless_sample(int n, const std::vector<double>& points,
                               const std::function<double(double)>& f, int first_id = 0) {
  Sample s;
  for (int i = 0; i < n; ++i) {
    ObservationSet set{first_id + i, {}};
    for (double t : points) set.obs.push_back({t, f(t)});
    s.push_back(std::move(set));
  }
  return s;
}

/// Noiseless bundle generated through the simulation hook.
inline SampleBundle noiseless_bundle(SampleSizes sizes, DesignKind design,
                                     const std::function<double(double)>& target,
                                     const std::function<double(double)>& source,
                                     std::uint64_t seed) {
  SimulationSpec sim;
  sim.sizes = sizes;
  sim.design = design;
  sim.target = MeanSpec::custom(target);
  for (int k = 0; k < sizes.K; ++k) sim.sources.push_back(MeanSpec::custom(source));
  sim.noise.sigma = 0.0;
  sim.process = ProcessKind::None;
  return generate_bundle(sim, seed);
}

/// Random polynomial coefficients of the given degree with sup-norm on [0,1]
/// at most `bound`.
inline std::vector<double> bounded_poly(int degree, double bound, Stream& rng) {
  std::vector<double> c(static_cast<std::size_t>(degree + 1));
  double total = 0.0;
  for (double& v : c) {
    v = 2.0 * rng.uniform() - 1.0;
    total += std::abs(v);
  }
  // |sum c_s x^s| <= sum |c_s| on [0,1].
  for (double& v : c) v *= bound / total;
  return c;
}

inline double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

}  // namespace fmtl::testing
