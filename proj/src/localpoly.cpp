#include "fmtl/localpoly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fmtl/rng.hpp"

namespace fmtl {

FitParams::FitParams(int intervals, int degree, double threshold)
    : intervals_(intervals), degree_(degree), threshold_(threshold) {
  if (intervals < 1) throw std::invalid_argument("interval count must be positive");
  if (degree < 0) throw std::invalid_argument("degree must be nonnegative");
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
}

FitParams FitParams::from_bandwidth(double bandwidth, int degree, double threshold) {
  if (!(bandwidth > 0.0 && bandwidth <= 1.0)) {
    throw std::invalid_argument("bandwidth must lie in (0, 1]");
  }
  const double q = 1.0 / bandwidth;
  const double rounded = std::round(q);
  if (std::abs(q - rounded) > 1e-9 * rounded) {
    throw std::invalid_argument("bandwidth " + std::to_string(bandwidth) +
                                " is not the reciprocal of an integer");
  }
  return FitParams(static_cast<int>(rounded), degree, threshold);
}

int interval_index(double t, int intervals) {
  if (t <= 0.0) return 0;
  const int r = static_cast<int>(std::floor(t * intervals));
  return std::min(r, intervals - 1);
}

PiecewisePoly::PiecewisePoly(int intervals, int degree)
    : coeffs_(Eigen::MatrixXd::Zero(intervals, degree + 1)),
      zeroed_(static_cast<std::size_t>(intervals), 0) {
  if (intervals < 1 || degree < 0) throw std::invalid_argument("invalid piecewise shape");
}

void PiecewisePoly::set_interval(int r, const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                 bool zeroed) {
  coeffs_.row(r) = coeffs.transpose();
  zeroed_[static_cast<std::size_t>(r)] = zeroed ? 1 : 0;
}

double polyval(const Eigen::Ref<const Eigen::VectorXd>& coeffs, double u) {
  double acc = 0.0;
  for (Eigen::Index s = coeffs.size() - 1; s >= 0; --s) acc = acc * u + coeffs[s];
  return acc;
}

double PiecewisePoly::operator()(double x) const {
  x = std::clamp(x, 0.0, 1.0);
  const int q = intervals();
  const int r = interval_index(x, q);
  if (zeroed_[static_cast<std::size_t>(r)]) return 0.0;
  const double u = local_coordinate(x, r, q);
  double acc = 0.0;
  for (Eigen::Index s = coeffs_.cols() - 1; s >= 0; --s) acc = acc * u + coeffs_(r, s);
  return acc;
}

double PiecewisePoly::evaluate(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::out_of_range("evaluation point " + std::to_string(x) + " outside [0,1]");
  }
  return (*this)(x);
}

bool PiecewisePoly::operator==(const PiecewisePoly& other) const {
  return coeffs_.rows() == other.coeffs_.rows() && coeffs_.cols() == other.coeffs_.cols() &&
         coeffs_ == other.coeffs_ && zeroed_ == other.zeroed_;
}

// ---------------------------------------------------------------------------
// Packing / covering

namespace {

// Absolute slack on gap and radius comparisons so that points such as 0.2 and
// 0.3 count as exactly 1/10 apart.
constexpr double kSlack = 1e-12;

}  // namespace

bool is_packing(std::span<const Observation> subset, int m) {
  const double gap = 1.0 / m;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for (std::size_t j = i + 1; j < subset.size(); ++j) {
      if (std::abs(subset[i].t - subset[j].t) < gap - kSlack) return false;
    }
  }
  return true;
}

bool is_covering(std::span<const Observation> subset, std::span<const Observation> all, int m) {
  const double radius = 1.0 / (2.0 * m);
  for (const Observation& o : all) {
    const bool hit = std::any_of(subset.begin(), subset.end(), [&](const Observation& s) {
      return std::abs(o.t - s.t) <= radius + kSlack;
    });
    if (!hit) return false;
  }
  return true;
}

namespace {

std::vector<std::size_t> greedy_packing(std::span<const Observation> pts, double gap) {
  std::vector<std::size_t> kept;
  if (pts.empty()) return kept;
  kept.push_back(0);
  for (std::size_t j = 1; j < pts.size(); ++j) {
    if (pts[j].t - pts[kept.back()].t >= gap) kept.push_back(j);
  }
  return kept;
}

bool greedy_covers(std::span<const Observation> pts, const std::vector<std::size_t>& kept,
                   double radius) {
  // Every point lies between two consecutive kept points (or beyond the ends);
  // only those two neighbours can cover it.
  std::size_t next = 0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    while (next < kept.size() && kept[next] < j) ++next;
    if (next < kept.size() && kept[next] == j) continue;
    const bool left = next > 0 && pts[j].t - pts[kept[next - 1]].t <= radius;
    const bool right = next < kept.size() && pts[kept[next]].t - pts[j].t <= radius;
    if (!left && !right) return false;
  }
  return true;
}

// Exact search over chains of consecutive kept points. Kept points k < i may be
// adjacent in the subset iff t_i - t_k >= 1/m and every point strictly between
// them is within 1/(2m) of t_k or of t_i.
std::vector<std::size_t> exact_packing_covering(std::span<const Observation> pts, double gap,
                                                double radius) {
  const std::size_t n = pts.size();
  // first_uncovered[k]: first index after k farther than radius from t_k.
  std::vector<std::size_t> first_uncovered(n);
  for (std::size_t k = 0, a = 0; k < n; ++k) {
    a = std::max(a, k + 1);
    while (a < n && pts[a].t - pts[k].t <= radius) ++a;
    first_uncovered[k] = a;
  }

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  constexpr std::size_t kStart = static_cast<std::size_t>(-2);
  std::vector<std::size_t> prev(n, kNone);
  for (std::size_t i = 0; i < n; ++i) {
    if (pts[i].t - pts[0].t <= radius) {
      prev[i] = kStart;
      continue;
    }
    for (std::size_t k = i; k-- > 0;) {
      if (prev[k] == kNone) continue;
      if (pts[i].t - pts[k].t < gap) continue;
      const std::size_t a = first_uncovered[k];
      if (a >= i || pts[i].t - pts[a].t <= radius) {
        prev[i] = k;
        break;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (prev[i] == kNone) continue;
    if (pts[n - 1].t - pts[i].t > radius) continue;
    std::vector<std::size_t> chain;
    for (std::size_t c = i; c != kStart; c = prev[c]) chain.push_back(c);
    std::reverse(chain.begin(), chain.end());
    return chain;
  }
  return {};
}

}  // namespace

PackingSubset packing_covering_indices(std::span<const Observation> sorted, int m) {
  if (m < 1) throw std::invalid_argument("packing scale must be positive");
  PackingSubset out;
  if (sorted.empty()) return out;

  const double gap = 1.0 / m - kSlack;
  const double radius = 1.0 / (2.0 * m) + kSlack;
  out.indices = greedy_packing(sorted, gap);
  if (greedy_covers(sorted, out.indices, radius)) return out;

  auto exact = exact_packing_covering(sorted, gap, radius);
  if (!exact.empty()) {
    out.indices = std::move(exact);
    return out;
  }
  out.covering = false;
  return out;
}

std::vector<Observation> packing_covering_subset(std::span<const Observation> sorted, int m) {
  const PackingSubset sel = packing_covering_indices(sorted, m);
  std::vector<Observation> out;
  out.reserve(sel.indices.size());
  for (std::size_t i : sel.indices) out.push_back(sorted[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Reduction

std::uint64_t pick_seed(std::uint64_t seed, int interval, int subject_id) {
  return derive_seed(seed, {static_cast<std::uint64_t>(interval),
                            static_cast<std::uint64_t>(static_cast<std::uint32_t>(subject_id))});
}

namespace {

bool same_design(const std::vector<Observation>& a, const std::vector<Observation>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j].t != b[j].t) return false;
  }
  return true;
}

struct SubjectPick {
  int interval;
  Observation obs;
};

// Draws one pick per nonempty interval for a single subject. `eligible` lists
// observation indices in observation order.
void pick_subject(const ObservationSet& set, const std::vector<std::size_t>& eligible,
                  int intervals, std::uint64_t seed, std::vector<SubjectPick>& out) {
  out.clear();
  std::vector<std::pair<int, std::size_t>> keyed;
  keyed.reserve(eligible.size());
  for (std::size_t j : eligible) keyed.emplace_back(interval_index(set.obs[j].t, intervals), j);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  for (std::size_t lo = 0; lo < keyed.size();) {
    std::size_t hi = lo;
    while (hi < keyed.size() && keyed[hi].first == keyed[lo].first) ++hi;
    const int r = keyed[lo].first;
    Stream stream(pick_seed(seed, r, set.subject_id));
    const std::size_t choice = lo + stream.below(hi - lo);
    out.push_back({r, set.obs[keyed[choice].second]});
    lo = hi;
  }
}

}  // namespace

std::vector<ReducedInterval> reduce(const Sample& sample, const FitParams& params,
                                    DesignKind design, std::uint64_t seed, Exec exec) {
  const int q = params.intervals();
  const auto n = static_cast<std::ptrdiff_t>(sample.size());

  // Eligible observation indices per subject. Under a common design the
  // subset only depends on the design vector, so consecutive subjects with an
  // identical vector share it.
  std::vector<std::vector<std::size_t>> eligible(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto& obs = sample[i].obs;
    if (design == DesignKind::Independent) {
      eligible[i].resize(obs.size());
      for (std::size_t j = 0; j < obs.size(); ++j) eligible[i][j] = j;
    } else if (i > 0 && same_design(obs, sample[i - 1].obs)) {
      eligible[i] = eligible[i - 1];
    } else {
      eligible[i] = packing_covering_indices(obs, static_cast<int>(obs.size())).indices;
    }
  }

  std::vector<std::vector<SubjectPick>> per_subject(sample.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    pick_subject(sample[static_cast<std::size_t>(i)], eligible[static_cast<std::size_t>(i)], q,
                 seed, per_subject[static_cast<std::size_t>(i)]);
  }

  std::vector<ReducedInterval> out(static_cast<std::size_t>(q));
  std::vector<std::size_t> counts(static_cast<std::size_t>(q), 0);
  for (const auto& picks : per_subject) {
    for (const auto& p : picks) ++counts[static_cast<std::size_t>(p.interval)];
  }
  for (int r = 0; r < q; ++r) {
    out[static_cast<std::size_t>(r)].index = r;
    out[static_cast<std::size_t>(r)].picks.reserve(counts[static_cast<std::size_t>(r)]);
  }
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (const auto& p : per_subject[i]) {
      out[static_cast<std::size_t>(p.interval)].picks.push_back({sample[i].subject_id, p.obs});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local fits

Eigen::VectorXd fit_interval(const ReducedInterval& interval, const FitParams& params) {
  const int p = params.degree() + 1;
  const auto n = static_cast<Eigen::Index>(interval.picks.size());
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);
  if (n < p) return zero;

  const int q = params.intervals();
  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Pick& pk = interval.picks[static_cast<std::size_t>(i)];
    const double u = local_coordinate(pk.obs.t, interval.index, q);
    double pw = 1.0;
    for (int s = 0; s < p; ++s) {
      design(i, s) = pw;
      pw *= u;
    }
    rhs[i] = pk.obs.y;
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd r_factor =
      qr.matrixQR().topRows(p).triangularView<Eigen::Upper>().toDenseMatrix();
  // R shares the singular values of the design matrix.
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r_factor).singularValues();
  if (!(sv[p - 1] >= 1e-10 * sv[0]) || sv[0] == 0.0) return zero;

  const Eigen::VectorXd qty = (qr.householderQ().transpose() * rhs).head(p);
  return r_factor.triangularView<Eigen::Upper>().solve(qty);
}

double sup_norm_on_interval(const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
  constexpr int kGrid = 128;
  double best = 0.0;
  for (int k = 0; k <= kGrid; ++k) {
    best = std::max(best, std::abs(polyval(coeffs, static_cast<double>(k) / kGrid)));
  }
  return best;
}

PiecewisePoly fit(const Sample& sample, const FitParams& params, DesignKind design,
                  std::uint64_t seed, Exec exec) {
  const std::vector<ReducedInterval> reduced = reduce(sample, params, design, seed, exec);
  const int q = params.intervals();
  PiecewisePoly est(q, params.degree());

#pragma omp parallel for schedule(dynamic, 64) if (exec == Exec::Parallel)
  for (int r = 0; r < q; ++r) {
    const auto& cell = reduced[static_cast<std::size_t>(r)];
    if (cell.picks.empty()) continue;
    const Eigen::VectorXd a = fit_interval(cell, params);
    est.set_interval(r, a, sup_norm_on_interval(a) > params.threshold());
  }
  return est;
}

}  // namespace fmtl
