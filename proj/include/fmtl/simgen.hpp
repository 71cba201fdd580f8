#pragma once

// Simulated functional data: mean function + Brownian motion + Gaussian noise,
// observed on a common or independent design.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fmtl/model.hpp"
#include "fmtl/rng.hpp"

namespace fmtl {

/// x cos(25x) + 4|x - 0.5|
double paper_target(double x);
/// delta_1(x) = -x^2, delta_2(x) = e^x - 1.
double paper_difference(int k, double x);
/// paper_target(x) - paper_difference(k, x)
double paper_source(int k, double x);

class MeanSpec {
 public:
  enum class Kind { PaperTarget, PaperSource, Custom };

  static MeanSpec target() { return MeanSpec(Kind::PaperTarget, 0, {}); }
  /// k must be 1 or 2.
  static MeanSpec source(int k);
  static MeanSpec custom(std::function<double(double)> fn);

  Kind kind() const { return kind_; }
  double operator()(double x) const;

 private:
  MeanSpec(Kind kind, int k, std::function<double(double)> fn)
      : kind_(kind), k_(k), fn_(std::move(fn)) {}

  Kind kind_;
  int k_;
  std::function<double(double)> fn_;
};

struct NoiseSpec {
  double sigma = 1.0;
};

/// Random process added to the mean. None is a test hook for noiseless curves.
enum class ProcessKind { Brownian, None };

/// T_j = j/(m+1), j = 1..m. Throws std::invalid_argument for m < 1.
std::vector<double> common_design_points(int m);

/// m i.i.d. Uniform[0,1] draws, in draw order. Throws for m < 1.
std::vector<double> independent_design_points(int m, Stream& rng);

/// One standard Brownian path (B_0 = 0) evaluated at the given points,
/// returned in input order. Equal points get equal values.
std::vector<double> brownian_at(std::span<const double> points, Stream& rng);

struct SimulationSpec {
  SampleSizes sizes;
  DesignKind design = DesignKind::Common;
  MeanSpec target = MeanSpec::target();
  /// One mean per source group; when empty, group k uses PaperSource(k % 2 + 1).
  std::vector<MeanSpec> sources;
  NoiseSpec noise;
  ProcessKind process = ProcessKind::Brownian;
};

/// Seed of the stream that generates one subject (group 0 is the target,
/// group k + 1 the k-th source).
std::uint64_t subject_seed(std::uint64_t seed, int group, int subject);

/// Generates a bundle: Y_ij = f(T_ij) + B_i(T_ij) + sigma * eps_ij. Throws
/// std::invalid_argument on invalid sizes or noise.
SampleBundle generate_bundle(const SimulationSpec& spec, std::uint64_t seed);

}  // namespace fmtl
