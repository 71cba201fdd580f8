#pragma once

// Split-and-select adaptation between conventional and transfer learning, and
// the bagged average of repeated adaptive runs.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fmtl/localpoly.hpp"
#include "fmtl/rng.hpp"
#include "fmtl/transfer.hpp"

namespace fmtl {

/// Either a conventional or a transfer-learning estimate.
class Estimator {
 public:
  Estimator() = default;
  Estimator(PiecewisePoly est) : impl_(std::move(est)) {}
  Estimator(TransferEstimate est) : impl_(std::move(est)) {}

  double operator()(double x) const {
    return std::visit([x](const auto& e) { return e(x); }, impl_);
  }
  double evaluate(double x) const {
    return std::visit([x](const auto& e) { return e.evaluate(x); }, impl_);
  }

  bool is_transfer() const { return std::holds_alternative<TransferEstimate>(impl_); }
  const std::variant<PiecewisePoly, TransferEstimate>& get() const { return impl_; }
  bool operator==(const Estimator&) const = default;

 private:
  std::variant<PiecewisePoly, TransferEstimate> impl_;
};

struct Candidate {
  std::string label;
  Estimator est;
};

using CandidateSet = std::vector<Candidate>;

/// Subject-level train/test bipartition of {0, ..., 2n-1}; both sides sorted.
struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

/// Uniformly random equal bipartition. Throws std::invalid_argument for odd
/// or nonpositive n2.
SplitIndices split(int n2, Stream& rng);

/// The subjects of `sample` at the given positions (ids kept).
Sample subset(const Sample& sample, std::span<const int> positions);

/// Riemann-weighted squared error over a common design:
/// sum_i sum_j (Y_ij - est(T_j))^2 (T_j - T_{j-1}) with T_0 = 0.
template <class Fn>
double empirical_risk_common(const Fn& est, const Sample& test) {
  double total = 0.0;
  std::vector<double> fitted;
  for (const ObservationSet& set : test) {
    if (fitted.size() != set.obs.size()) {
      fitted.resize(set.obs.size());
      for (std::size_t j = 0; j < set.obs.size(); ++j) fitted[j] = est(set.obs[j].t);
    }
    double prev = 0.0;
    for (std::size_t j = 0; j < set.obs.size(); ++j) {
      const double e = set.obs[j].y - fitted[j];
      total += e * e * (set.obs[j].t - prev);
      prev = set.obs[j].t;
    }
  }
  return total;
}

/// Unweighted sum of squared residuals over every test observation.
template <class Fn>
double empirical_risk_independent(const Fn& est, const Sample& test) {
  double total = 0.0;
  for (const ObservationSet& set : test) {
    for (const Observation& o : set.obs) {
      const double e = o.y - est(o.t);
      total += e * e;
    }
  }
  return total;
}

/// Index of a minimal risk; ties are broken uniformly at random with `rng`.
/// Throws std::invalid_argument on an empty span.
std::size_t select(std::span<const double> risks, Stream& rng);

/// Outcome of one adaptive run: the chosen candidate plus every candidate's
/// label and test risk, in construction order.
struct AdaptiveResult {
  Candidate chosen;
  std::size_t chosen_index = 0;
  std::vector<std::string> labels;
  std::vector<double> risks;
};

/// Common design: split, fit CL and TL on the training half with the
/// theoretical parameters (sizes use the half count), select on the test half.
AdaptiveResult run_alc(const SampleBundle& bundle, const SmoothnessSpec& spec,
                       const DesignRegularity& reg, std::uint64_t seed,
                       Exec exec = Exec::Parallel);

/// Powers of two 2^r (r >= 1) not exceeding `limit`.
std::vector<int> dyadic_grid(long long limit);

/// Independent design: split, fit CL over the dyadic interval-count grid and
/// TL over the product grid, select on the test half.
AdaptiveResult run_ali(const SampleBundle& bundle, const SmoothnessSpec& spec,
                       const DesignRegularity& reg, std::uint64_t seed,
                       Exec exec = Exec::Parallel);

/// Pointwise average of several estimators.
struct BaggedEstimator {
  std::vector<Estimator> members;

  double operator()(double x) const;
  double evaluate(double x) const;
};

using AdaptiveRun = std::function<Estimator(std::uint64_t seed)>;

/// Runs `run` r_max times with seeds derived from (seed, repetition) and
/// averages the results.
BaggedEstimator bagged(const AdaptiveRun& run, int r_max, std::uint64_t seed,
                       Exec exec = Exec::Parallel);

/// The design-appropriate adaptive procedure as an AdaptiveRun.
AdaptiveRun adaptive_run(const SampleBundle& bundle, const SmoothnessSpec& spec,
                         const DesignRegularity& reg);

}  // namespace fmtl
