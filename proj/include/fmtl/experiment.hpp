#pragma once

// Experiment runner: configuration, replicated simulation over a grid of
// sample-size cells, CSV output and the rate-check studies.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmtl/localpoly.hpp"
#include "fmtl/metrics.hpp"
#include "fmtl/model.hpp"
#include "fmtl/simgen.hpp"

namespace fmtl {

/// One (design, n_t, m_t, n_s, m_s, K) combination. The baseline cell has
/// n_s = m_s = K = 0.
struct Cell {
  DesignKind design = DesignKind::Common;
  SampleSizes sizes;

  /// e.g. "common/nt50_mt10/ns400_ms40_K2" or "common/nt50_mt10/baseline".
  std::string label() const;
  bool operator==(const Cell&) const = default;
};

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 0;
  int replications = 50;
  int r_max = 20;
  double noise_sigma = 1.0;
  ProcessKind process = ProcessKind::Brownian;
  SmoothnessSpec smoothness;
  DesignRegularity regularity;
  std::vector<Cell> cells;
};

/// Raised for malformed or invalid configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a configuration document; throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Invariant violations of a parsed configuration.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Seed of replication `replication` of cell `cell_index` (position in the
/// full, unfiltered cell list).
std::uint64_t replication_seed(std::uint64_t master, std::size_t cell_index, int replication);

/// Simulation spec of one cell under the configuration's noise settings.
SimulationSpec simulation_for(const ExperimentConfig& config, const Cell& cell);

/// One replication: generate 2 n_t target subjects, run the bagged adaptive
/// estimator, return its IMSE against the true target mean.
double run_replication(const ExperimentConfig& config, const Cell& cell, std::uint64_t seed,
                       Exec exec = Exec::Parallel);

struct ResultRow {
  Cell cell;
  int replication = 0;
  std::uint64_t seed = 0;
  double imse = 0.0;
  bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kResultsHeader = "design,n_t,m_t,n_s,m_s,K,replication,seed,imse";
inline constexpr const char* kSummaryHeader =
    "design,n_t,m_t,n_s,m_s,K,count,min,q1,median,q3,max,mean";

std::string format_row(const ResultRow& row);
/// Throws std::runtime_error naming the line on malformed input.
std::vector<ResultRow> parse_results(std::istream& in);
std::vector<ResultRow> read_results(const std::filesystem::path& path);

struct CellSummary {
  Cell cell;
  RiskSummary risk;
};
std::string format_summary(const CellSummary& s);
/// Cells listed in a summary CSV (count column included).
std::vector<std::pair<Cell, std::size_t>> read_summary_cells(const std::filesystem::path& path);

struct RunOptions {
  std::filesystem::path out_dir = "results";
  /// ECMAScript regex matched against Cell::label(); empty keeps every cell.
  std::string cell_filter;
  /// Keep cells already complete in an existing results.csv.
  bool resume = false;
  /// Called after each finished replication (progress reporting).
  std::function<void(const ResultRow&)> on_row;
};

/// Runs every selected cell, writes results.csv (flushed per replication, in
/// replication order) and summary.csv into out_dir, and returns all rows.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RunOptions& options);

/// Replicated IMSE values at one size of a rate study.
struct RatePoint {
  double size = 0.0;
  std::vector<double> imse;
};

struct RateStudy {
  std::string name;
  std::string axis;
  std::vector<RatePoint> points;

  /// rate_slope over (size, mean IMSE).
  double slope() const;
};

struct RateOptions {
  std::uint64_t seed = 7;
  int replications = 50;
  int r_max = 20;
};

/// Noiseless |x - 0.5| on a common design, n_t = 200, m_t in {8,...,128},
/// conventional fit with the theoretical bandwidth at the given degree.
RateStudy bias_rate_study(const RateOptions& options, int degree);

/// Smooth polynomial mean with Brownian and Gaussian noise, common design
/// m_t = 200, n_t in {25,...,400}, conventional fit with theoretical parameters.
RateStudy parametric_rate_study(const RateOptions& options);

/// Independent design, no sources, 2 n_t = 100 target subjects, m_t in
/// {5,...,80}, bagged adaptive grid selection against the paper target.
RateStudy independent_rate_study(const RateOptions& options);

/// Writes study,size,replication,imse rows.
void write_rates_csv(const std::vector<RateStudy>& studies, const std::filesystem::path& path);
std::vector<RateStudy> read_rates_csv(const std::filesystem::path& path);

}  // namespace fmtl
