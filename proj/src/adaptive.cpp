#include "fmtl/adaptive.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace fmtl {

namespace {

// Seed tags inside one adaptive run.
enum : std::uint64_t { kRunStream = 11, kClFit = 12, kTlFit = 13, kTlSource = 14, kTlDelta = 15 };

}  // namespace

SplitIndices split(int n2, Stream& rng) {
  if (n2 <= 0 || n2 % 2 != 0) {
    throw std::invalid_argument("split needs a positive even subject count, got " +
                                std::to_string(n2));
  }
  std::vector<int> perm(static_cast<std::size_t>(n2));
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }
  const auto half = perm.begin() + n2 / 2;
  SplitIndices out{{perm.begin(), half}, {half, perm.end()}};
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Sample subset(const Sample& sample, std::span<const int> positions) {
  Sample out;
  out.reserve(positions.size());
  for (int p : positions) out.push_back(sample.at(static_cast<std::size_t>(p)));
  return out;
}

std::size_t select(std::span<const double> risks, Stream& rng) {
  if (risks.empty()) throw std::invalid_argument("cannot select from an empty candidate set");
  const double best = *std::min_element(risks.begin(), risks.end());
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < risks.size(); ++i) {
    if (risks[i] == best) ties.push_back(i);
  }
  if (ties.size() == 1) return ties.front();
  return ties[rng.below(ties.size())];
}

std::vector<int> dyadic_grid(long long limit) {
  std::vector<int> out;
  for (long long q = 2; q <= limit && q <= (1LL << 30); q *= 2) out.push_back(static_cast<int>(q));
  return out;
}

namespace {

// Accumulates candidates, keeping only those that can still be the argmin.
class CandidatePool {
 public:
  void add(std::string label, Estimator est, double risk) {
    labels_.push_back(std::move(label));
    risks_.push_back(risk);
    if (risk <= best_) {
      best_ = risk;
      kept_.emplace_back(std::move(est));
    } else {
      kept_.emplace_back(std::nullopt);
    }
  }

  AdaptiveResult finish(Stream& rng) {
    AdaptiveResult out;
    out.chosen_index = select(risks_, rng);
    out.chosen = Candidate{labels_[out.chosen_index], std::move(*kept_[out.chosen_index])};
    out.labels = std::move(labels_);
    out.risks = std::move(risks_);
    return out;
  }

 private:
  double best_ = std::numeric_limits<double>::infinity();
  std::vector<std::string> labels_;
  std::vector<double> risks_;
  std::vector<std::optional<Estimator>> kept_;
};

struct SplitData {
  Sample train;
  Sample test;
  SampleSizes sizes;
};

SplitData split_target(const SampleBundle& bundle, Stream& rng) {
  const SplitIndices idx = split(static_cast<int>(bundle.target.size()), rng);
  SplitData out{subset(bundle.target, idx.train), subset(bundle.target, idx.test),
                sizes_of(bundle)};
  out.sizes.n_t = static_cast<int>(out.train.size());
  return out;
}

}  // namespace

AdaptiveResult run_alc(const SampleBundle& bundle, const SmoothnessSpec& spec,
                       const DesignRegularity& reg, std::uint64_t seed, Exec exec) {
  if (bundle.design != DesignKind::Common) {
    throw std::invalid_argument("run_alc expects a common design");
  }
  Stream rng(derive_seed(seed, {kRunStream}));
  const SplitData data = split_target(bundle, rng);
  const TheoreticalParams params = theoretical_params_common(spec, reg, data.sizes);

  CandidatePool pool;
  {
    Estimator cl = fit(data.train, params.cl, bundle.design, derive_seed(seed, {kClFit}), exec);
    const double risk = empirical_risk_common(cl, data.test);
    pool.add("CL q=" + std::to_string(params.cl.intervals()), std::move(cl), risk);
  }
  if (params.tl) {
    Estimator tl = fit_tl_pooled(data.train, pool_sources(bundle.sources), bundle.design,
                                 *params.tl, derive_seed(seed, {kTlFit}), exec);
    const double risk = empirical_risk_common(tl, data.test);
    pool.add("TL qs=" + std::to_string(params.tl->source.intervals()) +
                 " qd=" + std::to_string(params.tl->delta.intervals()),
             std::move(tl), risk);
  }
  return pool.finish(rng);
}

AdaptiveResult run_ali(const SampleBundle& bundle, const SmoothnessSpec& spec,
                       const DesignRegularity& /*reg*/, std::uint64_t seed, Exec exec) {
  if (bundle.design != DesignKind::Independent) {
    throw std::invalid_argument("run_ali expects an independent design");
  }
  Stream rng(derive_seed(seed, {kRunStream}));
  const SplitData data = split_target(bundle, rng);
  const SampleSizes& s = data.sizes;

  const int d_t = holder_floor(spec.alpha_m);
  const double m_t_threshold = log_floor(s.n_t);
  const long long target_obs = static_cast<long long>(s.m_t) * s.n_t;
  std::vector<int> target_grid = dyadic_grid(target_obs);
  if (target_grid.empty()) target_grid.push_back(1);

  CandidatePool pool;
  for (int q : target_grid) {
    Estimator cl = fit(data.train, FitParams(q, d_t, m_t_threshold), bundle.design,
                       derive_seed(seed, {kClFit, static_cast<std::uint64_t>(q)}), exec);
    const double risk = empirical_risk_independent(cl, data.test);
    pool.add("CL q=" + std::to_string(q), std::move(cl), risk);
  }

  if (s.has_sources()) {
    const int d_s = holder_floor(spec.alpha_m);
    const int d_delta = holder_floor(spec.alpha_delta);
    const double source_threshold = log_floor(s.n_s);
    const double delta_threshold = log_floor(static_cast<double>(s.n_t) * s.n_s);
    const Sample pooled = pool_sources(bundle.sources);
    long long source_obs = 0;
    for (const ObservationSet& set : pooled) source_obs += static_cast<long long>(set.obs.size());

    // One source fit per source bandwidth, shared across the difference grid.
    for (int q_s : dyadic_grid(source_obs)) {
      const PiecewisePoly source_fit =
          fit(pooled, FitParams(q_s, d_s, source_threshold), bundle.design,
              derive_seed(seed, {kTlSource, static_cast<std::uint64_t>(q_s)}), exec);
      for (int q_d : target_grid) {
        Estimator tl = fit_tl_with_source(
            data.train, bundle.design, source_fit, FitParams(q_d, d_delta, delta_threshold),
            derive_seed(seed, {kTlDelta, static_cast<std::uint64_t>(q_s),
                               static_cast<std::uint64_t>(q_d)}),
            exec);
        const double risk = empirical_risk_independent(tl, data.test);
        pool.add("TL qs=" + std::to_string(q_s) + " qd=" + std::to_string(q_d), std::move(tl),
                 risk);
      }
    }
  }
  return pool.finish(rng);
}

double BaggedEstimator::operator()(double x) const {
  double sum = 0.0;
  for (const Estimator& e : members) sum += e(x);
  return sum / static_cast<double>(members.size());
}

double BaggedEstimator::evaluate(double x) const {
  double sum = 0.0;
  for (const Estimator& e : members) sum += e.evaluate(x);
  return sum / static_cast<double>(members.size());
}

BaggedEstimator bagged(const AdaptiveRun& run, int r_max, std::uint64_t seed, Exec exec) {
  if (r_max < 1) throw std::invalid_argument("r_max must be at least 1");
  BaggedEstimator out;
  out.members.resize(static_cast<std::size_t>(r_max));
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
  for (int r = 0; r < r_max; ++r) {
    out.members[static_cast<std::size_t>(r)] =
        run(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
  }
  return out;
}

AdaptiveRun adaptive_run(const SampleBundle& bundle, const SmoothnessSpec& spec,
                         const DesignRegularity& reg) {
  // The bundle is captured by reference and must outlive the callable.
  if (bundle.design == DesignKind::Common) {
    return [&bundle, spec, reg](std::uint64_t seed) {
      return run_alc(bundle, spec, reg, seed, Exec::Serial).chosen.est;
    };
  }
  return [&bundle, spec, reg](std::uint64_t seed) {
    return run_ali(bundle, spec, reg, seed, Exec::Serial).chosen.est;
  };
}

}  // namespace fmtl
