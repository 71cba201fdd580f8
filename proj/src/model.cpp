#include "fmtl/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fmtl {

std::string_view to_string(DesignKind kind) {
  return kind == DesignKind::Common ? "common" : "independent";
}

DesignKind parse_design(std::string_view text) {
  if (text == "common") return DesignKind::Common;
  if (text == "independent") return DesignKind::Independent;
  throw std::invalid_argument("unknown design kind '" + std::string(text) + "'");
}

int holder_floor(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("smoothness must be a positive finite number");
  }
  return static_cast<int>(std::ceil(alpha)) - 1;
}

std::vector<std::string> validate(const SmoothnessSpec& spec) {
  std::vector<std::string> out;
  auto check = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be positive");
  };
  check(spec.alpha_m, "alpha_m");
  check(spec.alpha_delta, "alpha_delta");
  check(spec.L_m, "L_m");
  check(spec.M_m, "M_m");
  check(spec.L_delta, "L_delta");
  check(spec.M_delta, "M_delta");
  return out;
}

std::vector<std::string> validate(const DesignRegularity& reg, DesignKind design) {
  std::vector<std::string> out;
  auto check = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be positive");
  };
  check(reg.c_t, "c_t");
  check(reg.c_s, "c_s");
  check(reg.gamma_t, "gamma_t");
  check(reg.gamma_s, "gamma_s");
  check(reg.b_t_const, "b_t_const");
  check(reg.b_s_const, "b_s_const");
  check(reg.b_delta_const, "b_delta_const");
  if (!out.empty()) return out;

  const bool common = design == DesignKind::Common;
  const double lower_t = common ? reg.c_t : reg.gamma_t;
  const double lower_s = common ? reg.c_s : reg.gamma_s;
  if (reg.b_t_const < lower_t) out.push_back("b_t_const below its design constant");
  if (reg.b_s_const < lower_s) out.push_back("b_s_const below its design constant");
  if (reg.b_delta_const < lower_t) out.push_back("b_delta_const below its design constant");
  return out;
}

namespace {

void check_group(const Sample& group, const std::string& name, DesignKind design,
                 const ObservationSet*& reference, std::size_t& expected_size,
                 std::vector<std::string>& out) {
  for (std::size_t i = 0; i < group.size(); ++i) {
    const ObservationSet& set = group[i];
    std::ostringstream where;
    where << name << " subject " << i;

    if (set.subject_id != static_cast<int>(i)) {
      out.push_back(where.str() + ": subject id " + std::to_string(set.subject_id) +
                    " is not its dense index");
    }
    if (set.obs.empty()) {
      out.push_back(where.str() + ": no observations");
      continue;
    }
    if (expected_size == 0) expected_size = set.obs.size();
    if (set.obs.size() != expected_size) {
      out.push_back(where.str() + ": has " + std::to_string(set.obs.size()) +
                    " observations, expected " + std::to_string(expected_size));
    }
    for (std::size_t j = 0; j < set.obs.size(); ++j) {
      const Observation& o = set.obs[j];
      if (!(o.t >= 0.0 && o.t <= 1.0)) {
        out.push_back(where.str() + " index " + std::to_string(j) + ": design point " +
                      std::to_string(o.t) + " outside [0,1]");
      }
      if (!std::isfinite(o.y)) {
        out.push_back(where.str() + " index " + std::to_string(j) + ": non-finite value");
      }
    }
    if (design != DesignKind::Common) continue;

    for (std::size_t j = 1; j < set.obs.size(); ++j) {
      if (set.obs[j].t < set.obs[j - 1].t) {
        out.push_back(where.str() + ": common design points not sorted at index " +
                      std::to_string(j));
        break;
      }
    }
    if (reference == nullptr) {
      reference = &set;
      continue;
    }
    bool same = reference->obs.size() == set.obs.size();
    for (std::size_t j = 0; same && j < set.obs.size(); ++j) {
      same = reference->obs[j].t == set.obs[j].t;
    }
    if (!same) out.push_back(where.str() + ": design vector differs from the shared common design");
  }
}

}  // namespace

std::vector<std::string> validate_bundle(const SampleBundle& bundle) {
  std::vector<std::string> out;
  if (bundle.target.empty()) out.push_back("target sample is empty");

  const ObservationSet* target_ref = nullptr;
  std::size_t target_m = 0;
  check_group(bundle.target, "target", bundle.design, target_ref, target_m, out);

  const ObservationSet* source_ref = nullptr;
  std::size_t source_m = 0;
  for (std::size_t k = 0; k < bundle.sources.size(); ++k) {
    const Sample& group = bundle.sources[k];
    const std::string name = "source " + std::to_string(k);
    if (group.empty()) out.push_back(name + " is empty");
    if (group.size() != bundle.sources.front().size()) {
      out.push_back(name + " has " + std::to_string(group.size()) + " subjects, expected " +
                    std::to_string(bundle.sources.front().size()));
    }
    check_group(group, name, bundle.design, source_ref, source_m, out);
  }
  return out;
}

SampleSizes sizes_of(const SampleBundle& bundle) {
  SampleSizes s;
  s.n_t = static_cast<int>(bundle.target.size());
  s.m_t = bundle.target.empty() ? 0 : static_cast<int>(bundle.target.front().obs.size());
  s.K = static_cast<int>(bundle.sources.size());
  if (s.K > 0) {
    s.n_s = static_cast<int>(bundle.sources.front().size());
    s.m_s = s.n_s > 0 ? static_cast<int>(bundle.sources.front().front().obs.size()) : 0;
  }
  return s;
}

}  // namespace fmtl
