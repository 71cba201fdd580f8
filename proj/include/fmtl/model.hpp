#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fmtl {

/// How design points are laid out across subjects of one group.
enum class DesignKind { Common, Independent };

std::string_view to_string(DesignKind kind);
/// Parses "common" / "independent"; throws std::invalid_argument otherwise.
DesignKind parse_design(std::string_view text);

/// One noisy observation of a curve at a design point in [0, 1].
struct Observation {
  double t = 0.0;
  double y = 0.0;
};

/// The discrete record of a single curve.
struct ObservationSet {
  int subject_id = 0;
  std::vector<Observation> obs;
};

/// A group of subjects (the target sample, or one source sample).
using Sample = std::vector<ObservationSet>;

/// Target sample plus K source samples. K = 0 is the conventional setting.
struct SampleBundle {
  DesignKind design = DesignKind::Common;
  Sample target;
  std::vector<Sample> sources;
};

/// Sample sizes (n_t, m_t, n_s, m_s, K).
struct SampleSizes {
  int n_t = 0;
  int m_t = 0;
  int n_s = 0;
  int m_s = 0;
  int K = 0;

  bool has_sources() const { return n_s > 0 && m_s > 0 && K > 0; }
  bool operator==(const SampleSizes&) const = default;
};

/// Hoelder smoothness and sup-norm constants of the mean and difference functions.
struct SmoothnessSpec {
  double alpha_m = 1.0;
  double alpha_delta = 2.0;
  double L_m = 1.0;
  double M_m = 1.0;
  double L_delta = 1.0;
  double M_delta = 1.0;
};

/// Design regularity constants. c_* bound the design gap (common) or density
/// from below (independent); gamma_* bound the density from above; the b_*
/// constants enter the bandwidth rules and must dominate them.
struct DesignRegularity {
  double c_t = 1.0;
  double c_s = 1.0;
  double gamma_t = 1.0;
  double gamma_s = 1.0;
  double b_t_const = 1.0;
  double b_s_const = 1.0;
  double b_delta_const = 1.0;
};

/// Largest integer strictly smaller than alpha.
int holder_floor(double alpha);

/// Violations of the smoothness invariants (all fields strictly positive).
std::vector<std::string> validate(const SmoothnessSpec& spec);
/// Violations of the regularity invariants for the given design.
std::vector<std::string> validate(const DesignRegularity& reg, DesignKind design);

/// Every structural violation in the bundle; empty iff well-formed.
std::vector<std::string> validate_bundle(const SampleBundle& bundle);

/// Sizes read off a bundle (n_t, m_t from the target; n_s, m_s from the first source).
SampleSizes sizes_of(const SampleBundle& bundle);

}  // namespace fmtl
