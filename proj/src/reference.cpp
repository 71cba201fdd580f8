#include "fmtl/reference.hpp"

#include "fmtl/rng.hpp"

namespace fmtl::reference {

std::vector<ReducedInterval> reduce(const Sample& sample, const FitParams& params,
                                    DesignKind design, std::uint64_t seed) {
  const int q = params.intervals();
  std::vector<ReducedInterval> out(static_cast<std::size_t>(q));
  for (int r = 0; r < q; ++r) {
    out[static_cast<std::size_t>(r)].index = r;
    for (const ObservationSet& set : sample) {
      std::vector<Observation> pool = design == DesignKind::Common
                                          ? packing_covering_subset(set.obs, static_cast<int>(set.obs.size()))
                                          : set.obs;
      std::vector<Observation> candidates;
      for (const Observation& o : pool) {
        if (interval_index(o.t, q) == r) candidates.push_back(o);
      }
      if (candidates.empty()) continue;
      Stream stream(pick_seed(seed, r, set.subject_id));
      out[static_cast<std::size_t>(r)].picks.push_back(
          {set.subject_id, candidates[stream.below(candidates.size())]});
    }
  }
  return out;
}

PiecewisePoly fit(const Sample& sample, const FitParams& params, DesignKind design,
                  std::uint64_t seed) {
  const auto reduced = reference::reduce(sample, params, design, seed);
  PiecewisePoly est(params.intervals(), params.degree());
  for (const ReducedInterval& cell : reduced) {
    if (cell.picks.empty()) continue;
    const Eigen::VectorXd a = fit_interval(cell, params);
    est.set_interval(cell.index, a, sup_norm_on_interval(a) > params.threshold());
  }
  return est;
}

}  // namespace fmtl::reference
