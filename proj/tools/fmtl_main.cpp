// Command-line driver: run experiment grids, render figures, run the rate
// studies, validate configurations.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <stdexcept>

#include "fmtl/experiment.hpp"
#include "fmtl/figures.hpp"

namespace fs = std::filesystem;
using namespace fmtl;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Flags {
  std::string config;
  std::string out = "results";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string cells;
  bool resume = false;
  int replications = 0;
};

// A bare name such as "paper-figures" resolves to configs/<name>.json, first
// relative to the working directory, then in the source tree.
fs::path resolve_config(const std::string& name) {
  if (fs::exists(name)) return name;
  for (const fs::path& dir : {fs::path("configs"), fs::path(FMTL_CONFIG_DIR)}) {
    const fs::path candidate = dir / (name + ".json");
    if (fs::exists(candidate)) return candidate;
  }
  throw ConfigError("config not found: " + name);
}

ExperimentConfig load(const Flags& f) {
  ExperimentConfig config = load_config(resolve_config(f.config));
  if (f.seed) config.seed = *f.seed;
  if (f.replications > 0) config.replications = f.replications;
  return config;
}

std::vector<Cell> selected_cells(const ExperimentConfig& config, const std::string& filter) {
  const std::regex re(filter.empty() ? ".*" : filter);
  std::vector<Cell> out;
  for (const Cell& c : config.cells) {
    if (std::regex_search(c.label(), re)) out.push_back(c);
  }
  return out;
}

// Boxplots need results.csv; the rates figure is drawn only when rates.csv exists.
void render(const fs::path& out_dir, const std::vector<Cell>& expected, bool boxplots = true) {
  if (boxplots) {
    const auto rows = read_results(out_dir / "results.csv");
    for (const auto& path : write_boxplots(group_regimes(rows, expected), out_dir / "figures")) {
      std::cout << "wrote " << path.string() << '\n';
    }
  }
  if (fs::exists(out_dir / "rates.csv")) {
    fs::create_directories(out_dir / "figures");
    const fs::path path = out_dir / "figures" / "rates.svg";
    std::ofstream(path, std::ios::binary | std::ios::trunc) << rates_svg(read_rates_csv(out_dir / "rates.csv"));
    std::cout << "wrote " << path.string() << '\n';
  }
}

int cmd_run(const Flags& f) {
  const ExperimentConfig config = load(f);
  RunOptions opts;
  opts.out_dir = f.out;
  opts.cell_filter = f.cells;
  opts.resume = f.resume;
  opts.on_row = [](const ResultRow& r) {
    std::fprintf(stderr, "%s rep %d imse %.6g\n", r.cell.label().c_str(), r.replication, r.imse);
  };
  run_experiment(config, opts);
  render(opts.out_dir, selected_cells(config, f.cells));
  return kOk;
}

int cmd_figures(const Flags& f) {
  std::vector<Cell> expected;
  if (!f.config.empty()) {
    expected = selected_cells(load(f), f.cells);
  } else if (fs::exists(fs::path(f.out) / "summary.csv")) {
    for (const auto& [cell, count] : read_summary_cells(fs::path(f.out) / "summary.csv")) {
      expected.push_back(cell);
    }
  }
  const fs::path out(f.out);
  const bool have_results = fs::exists(out / "results.csv");
  if (!have_results && !fs::exists(out / "rates.csv")) {
    throw std::runtime_error("no results.csv or rates.csv in " + out.string());
  }
  render(out, expected, have_results || !f.config.empty());
  return kOk;
}

int cmd_rates(const Flags& f) {
  RateOptions opts;
  if (!f.config.empty()) {
    const ExperimentConfig config = load(f);
    opts.seed = config.seed;
    opts.replications = config.replications;
    opts.r_max = config.r_max;
  } else {
    if (f.seed) opts.seed = *f.seed;
    if (f.replications > 0) opts.replications = f.replications;
  }
  std::vector<RateStudy> studies;
  studies.push_back(bias_rate_study(opts, 1));
  studies.push_back(bias_rate_study(opts, 0));
  studies.push_back(parametric_rate_study(opts));
  studies.push_back(independent_rate_study(opts));

  fs::create_directories(fs::path(f.out) / "figures");
  write_rates_csv(studies, fs::path(f.out) / "rates.csv");
  std::ofstream(fs::path(f.out) / "figures" / "rates.svg", std::ios::binary | std::ios::trunc)
      << rates_svg(studies);
  for (const RateStudy& s : studies) {
    std::printf("%-18s slope vs %s: ", s.name.c_str(), s.axis.c_str());
    try {
      std::printf("%.3f\n", s.slope());
    } catch (const std::invalid_argument&) {
      std::printf("undefined (zero risk)\n");
    }
  }
  return kOk;
}

int cmd_validate(const Flags& f) {
  const ExperimentConfig config = load(f);
  const auto cells = selected_cells(config, f.cells);
  for (const Cell& cell : cells) {
    SimulationSpec sim = simulation_for(config, cell);
    sim.sizes.n_t = 2 * cell.sizes.n_t;
    const auto problems = validate_bundle(generate_bundle(sim, config.seed));
    if (!problems.empty()) {
      std::cerr << cell.label() << ": " << problems.front() << '\n';
      return kRuntimeError;
    }
  }
  std::cout << config.name << ": " << config.cells.size() << " cells (" << cells.size()
            << " selected), " << config.replications << " replications, r_max " << config.r_max
            << ", ok\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transfer learning for functional mean estimation: simulation driver"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "config file, or a name under configs/");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--seed", f.seed, "override the master seed");
    sub->add_option("--threads", f.threads, "OpenMP threads (0 = runtime default)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--cells", f.cells, "regex over cell labels, e.g. 'common/nt50_mt10/'");
    sub->add_option("--replications", f.replications, "override the replication count");
  };
  auto* run = app.add_subcommand("run", "execute a config and write CSV results and figures");
  add_common(run);
  run->add_flag("--resume", f.resume, "keep cells already complete in results.csv");
  auto* figures = app.add_subcommand("figures", "render SVG figures from existing CSVs");
  add_common(figures);
  auto* rates = app.add_subcommand("rates", "run the rate-check studies");
  add_common(rates);
  auto* validate = app.add_subcommand("validate", "check a config and the bundles it generates");
  add_common(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (f.threads > 0) omp_set_num_threads(f.threads);
  if ((run->parsed() || validate->parsed()) && f.config.empty()) f.config = "paper-figures";

  try {
    if (run->parsed()) return cmd_run(f);
    if (figures->parsed()) return cmd_figures(f);
    if (rates->parsed()) return cmd_rates(f);
    return cmd_validate(f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::regex_error& e) {
    std::cerr << "config error: bad --cells pattern: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
