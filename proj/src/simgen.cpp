#include "fmtl/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fmtl {

double paper_target(double x) { return x * std::cos(25.0 * x) + 4.0 * std::abs(x - 0.5); }

double paper_difference(int k, double x) {
  switch (k) {
    case 1:
      return -x * x;
    case 2:
      return std::expm1(x);
    default:
      throw std::invalid_argument("difference function index must be 1 or 2");
  }
}

double paper_source(int k, double x) { return paper_target(x) - paper_difference(k, x); }

MeanSpec MeanSpec::source(int k) {
  if (k != 1 && k != 2) throw std::invalid_argument("source mean index must be 1 or 2");
  return MeanSpec(Kind::PaperSource, k, {});
}

MeanSpec MeanSpec::custom(std::function<double(double)> fn) {
  if (!fn) throw std::invalid_argument("custom mean needs a callable");
  return MeanSpec(Kind::Custom, 0, std::move(fn));
}

double MeanSpec::operator()(double x) const {
  switch (kind_) {
    case Kind::PaperTarget:
      return paper_target(x);
    case Kind::PaperSource:
      return paper_source(k_, x);
    case Kind::Custom:
      return fn_(x);
  }
  return 0.0;
}

std::vector<double> common_design_points(int m) {
  if (m < 1) throw std::invalid_argument("design size must be at least 1");
  std::vector<double> t(static_cast<std::size_t>(m));
  for (int j = 1; j <= m; ++j) t[static_cast<std::size_t>(j - 1)] = static_cast<double>(j) / (m + 1);
  return t;
}

std::vector<double> independent_design_points(int m, Stream& rng) {
  if (m < 1) throw std::invalid_argument("design size must be at least 1");
  std::vector<double> t(static_cast<std::size_t>(m));
  for (double& v : t) v = rng.uniform();
  return t;
}

std::vector<double> brownian_at(std::span<const double> points, Stream& rng) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });

  std::vector<double> values(points.size());
  double t = 0.0;
  double b = 0.0;
  for (std::size_t idx : order) {
    const double gap = points[idx] - t;
    if (gap > 0.0) {
      b += std::sqrt(gap) * rng.normal();
      t = points[idx];
    }
    values[idx] = b;
  }
  return values;
}

std::uint64_t subject_seed(std::uint64_t seed, int group, int subject) {
  return derive_seed(seed, {0x5eedULL, static_cast<std::uint64_t>(group),
                            static_cast<std::uint64_t>(subject)});
}

namespace {

void generate_group(Sample& group, int n, int m, int group_index, const MeanSpec& mean,
                    const SimulationSpec& spec, std::uint64_t seed) {
  group.resize(static_cast<std::size_t>(n));
  const std::vector<double> shared =
      spec.design == DesignKind::Common ? common_design_points(m) : std::vector<double>{};

#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    Stream rng(subject_seed(seed, group_index, i));
    const std::vector<double> t =
        spec.design == DesignKind::Common ? shared : independent_design_points(m, rng);
    std::vector<double> path(t.size(), 0.0);
    if (spec.process == ProcessKind::Brownian) path = brownian_at(t, rng);

    ObservationSet& set = group[static_cast<std::size_t>(i)];
    set.subject_id = i;
    set.obs.resize(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) {
      double y = mean(t[j]) + path[j];
      if (spec.noise.sigma > 0.0) y += spec.noise.sigma * rng.normal();
      set.obs[j] = {t[j], y};
    }
  }
}

}  // namespace

SampleBundle generate_bundle(const SimulationSpec& spec, std::uint64_t seed) {
  const SampleSizes& s = spec.sizes;
  if (s.n_t < 1 || s.m_t < 1) throw std::invalid_argument("n_t and m_t must be at least 1");
  if (s.K < 0) throw std::invalid_argument("K must be nonnegative");
  if (s.K > 0 && (s.n_s < 1 || s.m_s < 1)) {
    throw std::invalid_argument("n_s and m_s must be at least 1 when K > 0");
  }
  if (!(spec.noise.sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
  if (!spec.sources.empty() && static_cast<int>(spec.sources.size()) != s.K) {
    throw std::invalid_argument("number of source means must equal K");
  }

  SampleBundle bundle;
  bundle.design = spec.design;
  generate_group(bundle.target, s.n_t, s.m_t, 0, spec.target, spec, seed);
  bundle.sources.resize(static_cast<std::size_t>(s.K));
  for (int k = 0; k < s.K; ++k) {
    const MeanSpec mean = spec.sources.empty() ? MeanSpec::source(k % 2 + 1)
                                               : spec.sources[static_cast<std::size_t>(k)];
    generate_group(bundle.sources[static_cast<std::size_t>(k)], s.n_s, s.m_s, k + 1, mean, spec,
                   seed);
  }
  return bundle;
}

}  // namespace fmtl
