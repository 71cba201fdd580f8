#pragma once

// Static SVG 1.1 figures: grouped boxplots of replicate IMSE per regime and a
// log-log plot of the rate studies. Output depends only on the inputs.

#include <filesystem>
#include <string>
#include <vector>

#include "fmtl/experiment.hpp"

namespace fmtl {

/// One box: a label and its replicate values.
struct Box {
  std::string label;
  RiskSummary risk;
};

/// All cells sharing (design, n_t, m_t).
struct Regime {
  DesignKind design = DesignKind::Common;
  int n_t = 0;
  int m_t = 0;
  std::vector<Box> boxes;

  std::string title() const;
  /// e.g. "boxplot_common_nt50_mt10".
  std::string file_stem() const;
};

/// Groups rows by regime; within a regime the baseline comes first, then
/// (n_s, m_s) ascending. Every expected cell must have at least one row;
/// otherwise throws std::runtime_error naming the first empty cell. When
/// `expected` is empty the cells present in `rows` are used.
std::vector<Regime> group_regimes(const std::vector<ResultRow>& rows,
                                  const std::vector<Cell>& expected);

std::string boxplot_svg(const Regime& regime);
std::string rates_svg(const std::vector<RateStudy>& studies);

/// Writes one boxplot per regime into out_dir; returns the written paths.
std::vector<std::filesystem::path> write_boxplots(const std::vector<Regime>& regimes,
                                                  const std::filesystem::path& out_dir);

}  // namespace fmtl
