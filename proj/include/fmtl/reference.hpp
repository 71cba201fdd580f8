#pragma once

// Straight-line serial versions of the parallel kernels, written directly from
// the algorithm's definition (interval by interval, subject by subject). They
// are slow and exist so tests can check the optimized kernels against an
// independent route.

#include <cstdint>
#include <vector>

#include "fmtl/localpoly.hpp"

namespace fmtl::reference {

std::vector<ReducedInterval> reduce(const Sample& sample, const FitParams& params,
                                    DesignKind design, std::uint64_t seed);

PiecewisePoly fit(const Sample& sample, const FitParams& params, DesignKind design,
                  std::uint64_t seed);

}  // namespace fmtl::reference
