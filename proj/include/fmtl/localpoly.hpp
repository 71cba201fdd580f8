#pragma once

// Randomized local polynomial regression with sup-norm thresholding.
//
// [0, 1] is split into q equal intervals. For every interval and every subject
// at most one observation is drawn at random, a degree-d polynomial is fitted
// to the drawn points by least squares in the rescaled coordinate
// u = (x - left) / b, and any local fit whose sup-norm exceeds the threshold M
// is replaced by zero.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fmtl/model.hpp"

namespace fmtl {

/// Execution policy for the data-parallel kernels. Both policies give
/// bit-identical results.
enum class Exec { Serial, Parallel };

/// Bandwidth b = 1/q (stored as the integer q), degree d and threshold M.
class FitParams {
 public:
  /// Throws std::invalid_argument unless intervals >= 1, degree >= 0 and threshold > 0.
  FitParams(int intervals, int degree, double threshold);

  /// Accepts b only when 1/b is (to rounding) a positive integer.
  static FitParams from_bandwidth(double bandwidth, int degree, double threshold);

  int intervals() const { return intervals_; }
  double bandwidth() const { return 1.0 / intervals_; }
  int degree() const { return degree_; }
  double threshold() const { return threshold_; }

  bool operator==(const FitParams&) const = default;

 private:
  int intervals_;
  int degree_;
  double threshold_;
};

/// Index (0-based) of the interval owning t: intervals are half-open
/// [r b, (r+1) b) and the last one is closed at 1.
int interval_index(double t, int intervals);

/// Rescaled coordinate of t inside interval r, in [0, 1].
inline double local_coordinate(double t, int r, int intervals) {
  return t * intervals - r;
}

/// Piecewise polynomial estimator on [0, 1].
class PiecewisePoly {
 public:
  PiecewisePoly() : PiecewisePoly(1, 0) {}
  /// The zero estimator with the given shape.
  PiecewisePoly(int intervals, int degree);

  int intervals() const { return static_cast<int>(coeffs_.rows()); }
  int degree() const { return static_cast<int>(coeffs_.cols()) - 1; }
  double bandwidth() const { return 1.0 / intervals(); }

  /// Row r holds the local coefficients a_{r,0..d}.
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  bool zeroed(int r) const { return zeroed_[static_cast<std::size_t>(r)] != 0; }

  void set_interval(int r, const Eigen::Ref<const Eigen::VectorXd>& coeffs, bool zeroed);

  /// Value at x; x is clamped into [0, 1].
  double operator()(double x) const;

  /// Value at x; throws std::out_of_range unless 0 <= x <= 1.
  double evaluate(double x) const;

  bool operator==(const PiecewisePoly& other) const;

 private:
  Eigen::MatrixXd coeffs_;
  std::vector<unsigned char> zeroed_;
};

/// Evaluates sum_s coeffs[s] u^s by Horner's rule.
double polyval(const Eigen::Ref<const Eigen::VectorXd>& coeffs, double u);

/// Indices of a (1/m)-packing and (1/2m)-covering subset of sorted observations.
struct PackingSubset {
  std::vector<std::size_t> indices;
  /// False when no subset of the input satisfies both predicates; the indices
  /// then hold the greedy maximal (1/m)-packing, which is a (1/m)-covering.
  bool covering = true;
};

/// Pairwise gaps of `subset` are all >= 1/m (comparisons carry 1e-12 slack).
bool is_packing(std::span<const Observation> subset, int m);
/// Every point of `all` lies within 1/(2m) of some point of `subset` (same slack).
bool is_covering(std::span<const Observation> subset, std::span<const Observation> all, int m);

/// Packing/covering selection over observations sorted by t. Tries the greedy
/// left-to-right scan first and falls back to an exact dynamic programme over
/// consecutive kept points when the greedy set misses a point.
PackingSubset packing_covering_indices(std::span<const Observation> sorted, int m);

/// Convenience wrapper returning the selected observations.
std::vector<Observation> packing_covering_subset(std::span<const Observation> sorted, int m);

struct Pick {
  int subject_id = 0;
  Observation obs;
};

/// The observations drawn for one interval, at most one per subject, in
/// subject order.
struct ReducedInterval {
  int index = 0;
  std::vector<Pick> picks;
};

/// Seed of the stream that draws subject `subject_id`'s pick in interval r.
std::uint64_t pick_seed(std::uint64_t seed, int interval, int subject_id);

/// Randomized reduction: for each interval and subject, one observation drawn
/// uniformly from the subject's eligible observations in that interval.
/// Eligible means all observations (independent design) or the members of the
/// subject's packing/covering subset (common design, observations sorted).
std::vector<ReducedInterval> reduce(const Sample& sample, const FitParams& params,
                                    DesignKind design, std::uint64_t seed,
                                    Exec exec = Exec::Parallel);

/// Least-squares polynomial fit over an interval's picks via Householder QR.
/// Returns zeros when there are fewer than d+1 picks or the rescaled design
/// matrix has condition number above 1e10.
Eigen::VectorXd fit_interval(const ReducedInterval& interval, const FitParams& params);

/// max |sum_s a_s u^s| over 129 equispaced u in [0, 1].
double sup_norm_on_interval(const Eigen::Ref<const Eigen::VectorXd>& coeffs);

/// reduce -> fit_interval -> threshold.
PiecewisePoly fit(const Sample& sample, const FitParams& params, DesignKind design,
                  std::uint64_t seed, Exec exec = Exec::Parallel);

}  // namespace fmtl
