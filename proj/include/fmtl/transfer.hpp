#pragma once

#include <cstdint>
#include <optional>

#include "fmtl/localpoly.hpp"
#include "fmtl/model.hpp"

namespace fmtl {

/// Parameters of the two local fits performed by transfer learning.
struct TransferParams {
  FitParams source;
  FitParams delta;
};

/// Source-mean fit plus difference fit; evaluates to their sum.
struct TransferEstimate {
  PiecewisePoly source;
  PiecewisePoly delta;

  double operator()(double x) const { return source(x) + delta(x); }
  double evaluate(double x) const { return source.evaluate(x) + delta.evaluate(x); }
  bool operator==(const TransferEstimate&) const = default;
};

/// Stage tags for seeds derived inside fit_tl.
enum class TransferStage : std::uint64_t { Source = 1, Delta = 2 };
std::uint64_t stage_seed(std::uint64_t seed, TransferStage stage);

/// Conventional learning: the local fit on the target sample alone.
PiecewisePoly fit_cl(const SampleBundle& bundle, const FitParams& params, std::uint64_t seed,
                     Exec exec = Exec::Parallel);

/// Concatenates the K source groups into one sample of K*n_s subjects,
/// relabelled 0..K*n_s-1 in group order.
Sample pool_sources(const std::vector<Sample>& sources);

/// Target observations with the source fit subtracted; design points and
/// subject ids unchanged.
Sample residual_sample(const Sample& target, const PiecewisePoly& source_fit);

/// Transfer learning: fit the pooled source mean, fit the target residuals,
/// return the sum. Throws std::invalid_argument when the bundle has no sources.
TransferEstimate fit_tl(const SampleBundle& bundle, const TransferParams& params,
                        std::uint64_t seed, Exec exec = Exec::Parallel);

/// fit_tl over an already pooled source sample.
TransferEstimate fit_tl_pooled(const Sample& target, const Sample& pooled_sources,
                               DesignKind design, const TransferParams& params,
                               std::uint64_t seed, Exec exec = Exec::Parallel);

/// Second half of fit_tl for a source fit computed elsewhere (used when one
/// source fit is shared by several difference bandwidths).
TransferEstimate fit_tl_with_source(const Sample& target, DesignKind design,
                                    PiecewisePoly source_fit, const FitParams& delta,
                                    std::uint64_t seed, Exec exec = Exec::Parallel);

/// log(max(count, 3)): the threshold rule, floored so tiny counts stay positive.
double log_floor(double count);

struct TheoreticalParams {
  FitParams cl;
  /// Absent when the sizes carry no sources (K = 0).
  std::optional<TransferParams> tl;
};

/// Rate-optimal parameters under a common design. Degrees are the smallest
/// admissible (the Hoelder floor of each smoothness).
TheoreticalParams theoretical_params_common(const SmoothnessSpec& spec,
                                            const DesignRegularity& reg,
                                            const SampleSizes& sizes);

/// Rate-optimal parameters under an independent design. Each bandwidth is the
/// smaller of the rate-balancing bandwidth and the density cap, i.e. the
/// larger interval count wins.
TheoreticalParams theoretical_params_independent(const SmoothnessSpec& spec,
                                                 const DesignRegularity& reg,
                                                 const SampleSizes& sizes);

}  // namespace fmtl
