#include "fmtl/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fmtl/rng.hpp"

namespace fmtl {

std::uint64_t stage_seed(std::uint64_t seed, TransferStage stage) {
  return derive_seed(seed, {static_cast<std::uint64_t>(stage)});
}

PiecewisePoly fit_cl(const SampleBundle& bundle, const FitParams& params, std::uint64_t seed,
                     Exec exec) {
  return fit(bundle.target, params, bundle.design, seed, exec);
}

Sample pool_sources(const std::vector<Sample>& sources) {
  Sample pooled;
  std::size_t total = 0;
  for (const Sample& g : sources) total += g.size();
  pooled.reserve(total);
  for (const Sample& g : sources) {
    for (const ObservationSet& set : g) {
      pooled.push_back(set);
      pooled.back().subject_id = static_cast<int>(pooled.size() - 1);
    }
  }
  return pooled;
}

Sample residual_sample(const Sample& target, const PiecewisePoly& source_fit) {
  Sample out = target;
  for (ObservationSet& set : out) {
    for (Observation& o : set.obs) o.y -= source_fit(o.t);
  }
  return out;
}

TransferEstimate fit_tl_with_source(const Sample& target, DesignKind design,
                                    PiecewisePoly source_fit, const FitParams& delta,
                                    std::uint64_t seed, Exec exec) {
  const Sample residuals = residual_sample(target, source_fit);
  TransferEstimate est{std::move(source_fit), PiecewisePoly{}};
  est.delta = fit(residuals, delta, design, stage_seed(seed, TransferStage::Delta), exec);
  return est;
}

TransferEstimate fit_tl(const SampleBundle& bundle, const TransferParams& params,
                        std::uint64_t seed, Exec exec) {
  if (bundle.sources.empty()) {
    throw std::invalid_argument("transfer learning needs at least one source sample");
  }
  return fit_tl_pooled(bundle.target, pool_sources(bundle.sources), bundle.design, params, seed,
                       exec);
}

TransferEstimate fit_tl_pooled(const Sample& target, const Sample& pooled_sources,
                               DesignKind design, const TransferParams& params,
                               std::uint64_t seed, Exec exec) {
  PiecewisePoly source_fit =
      fit(pooled_sources, params.source, design, stage_seed(seed, TransferStage::Source), exec);
  return fit_tl_with_source(target, design, std::move(source_fit), params.delta, seed, exec);
}

double log_floor(double count) { return std::log(std::max(count, 3.0)); }

namespace {

int ceil_count(double x) {
  if (!(x > 0.0)) return 1;
  const double c = std::ceil(x);
  if (c >= static_cast<double>(std::numeric_limits<int>::max())) {
    throw std::overflow_error("interval count overflows");
  }
  return std::max(1, static_cast<int>(c));
}

void require_sizes(const SampleSizes& sizes) {
  if (sizes.n_t <= 0 || sizes.m_t <= 0) {
    throw std::invalid_argument("target sizes n_t and m_t must be positive");
  }
  if (sizes.K < 0 || sizes.n_s < 0 || sizes.m_s < 0) {
    throw std::invalid_argument("source sizes must be nonnegative");
  }
  if (sizes.K > 0 && (sizes.n_s <= 0 || sizes.m_s <= 0)) {
    throw std::invalid_argument("source sizes n_s and m_s must be positive when K > 0");
  }
}

// ceil((L^2 N)^{1/(2a+1)} (log n)^{-2/(2a+1)})
int balanced_count(double L, double alpha, double observations, double log_count) {
  const double e = 1.0 / (2.0 * alpha + 1.0);
  return ceil_count(std::pow(L * L * observations, e) * std::pow(log_count, -2.0 * e));
}

}  // namespace

TheoreticalParams theoretical_params_common(const SmoothnessSpec& spec,
                                            const DesignRegularity& reg,
                                            const SampleSizes& sizes) {
  require_sizes(sizes);
  const int d_t = holder_floor(spec.alpha_m);
  const FitParams cl(ceil_count(sizes.m_t / (2.0 * reg.b_t_const * (d_t + 1))), d_t,
                     log_floor(sizes.n_t));
  TheoreticalParams out{cl, std::nullopt};
  if (sizes.K == 0) return out;

  const int d_s = holder_floor(spec.alpha_m);
  const int d_delta = holder_floor(spec.alpha_delta);
  const double n_t = sizes.n_t;
  const double n_s = sizes.n_s;
  out.tl = TransferParams{
      FitParams(ceil_count(sizes.m_s / (2.0 * (d_s + 1) * reg.b_s_const)), d_s, log_floor(n_s)),
      FitParams(ceil_count(sizes.m_t / (2.0 * (d_delta + 1) * reg.b_delta_const)), d_delta,
                log_floor(n_t * n_s))};
  return out;
}

TheoreticalParams theoretical_params_independent(const SmoothnessSpec& spec,
                                                 const DesignRegularity& reg,
                                                 const SampleSizes& sizes) {
  require_sizes(sizes);
  const double n_t = sizes.n_t;
  const double m_t = sizes.m_t;
  const int d_t = holder_floor(spec.alpha_m);
  const int q_t = std::max(balanced_count(spec.L_m, spec.alpha_m, m_t * n_t, log_floor(n_t)),
                           ceil_count(2.0 * reg.b_t_const * m_t));
  TheoreticalParams out{FitParams(q_t, d_t, log_floor(n_t)), std::nullopt};
  if (sizes.K == 0) return out;

  const double n_s = sizes.n_s;
  const double m_s = sizes.m_s;
  const double K = sizes.K;
  const int d_s = holder_floor(spec.alpha_m);
  const int d_delta = holder_floor(spec.alpha_delta);
  const int q_s = std::max(balanced_count(spec.L_m, spec.alpha_m, K * m_s * n_s, log_floor(K * n_s)),
                           ceil_count(2.0 * reg.b_s_const * K * m_s));
  const int q_delta =
      std::max(balanced_count(spec.L_delta, spec.alpha_delta, m_t * n_t, log_floor(n_t * n_s)),
               ceil_count(2.0 * reg.b_delta_const * m_t));
  out.tl = TransferParams{FitParams(q_s, d_s, log_floor(n_s)),
                          FitParams(q_delta, d_delta, log_floor(n_t * n_s))};
  return out;
}

}  // namespace fmtl
