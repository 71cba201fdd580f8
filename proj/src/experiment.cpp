#include "fmtl/experiment.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>

#include "fmtl/adaptive.hpp"
#include "fmtl/transfer.hpp"

namespace fmtl {

using nlohmann::json;

std::string Cell::label() const {
  std::ostringstream os;
  os << to_string(design) << "/nt" << sizes.n_t << "_mt" << sizes.m_t << "/";
  if (sizes.K == 0) {
    os << "baseline";
  } else {
    os << "ns" << sizes.n_s << "_ms" << sizes.m_s << "_K" << sizes.K;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::vector<int> int_list(const json& obj, const char* key) {
  if (!obj.contains(key)) return {};
  const json& v = obj.at(key);
  if (v.is_number_integer()) return {v.get<int>()};
  if (!v.is_array()) throw ConfigError(std::string("'") + key + "' must be an integer or a list");
  std::vector<int> out;
  for (const json& e : v) {
    if (!e.is_number_integer()) throw ConfigError(std::string("'") + key + "' holds a non-integer");
    out.push_back(e.get<int>());
  }
  return out;
}

SmoothnessSpec parse_smoothness(const json& obj) {
  SmoothnessSpec s;
  s.alpha_m = get_or(obj, "alpha_m", s.alpha_m);
  s.alpha_delta = get_or(obj, "alpha_delta", s.alpha_delta);
  s.L_m = get_or(obj, "L_m", s.L_m);
  s.M_m = get_or(obj, "M_m", s.M_m);
  s.L_delta = get_or(obj, "L_delta", s.L_delta);
  s.M_delta = get_or(obj, "M_delta", s.M_delta);
  return s;
}

DesignRegularity parse_regularity(const json& obj) {
  DesignRegularity r;
  r.c_t = get_or(obj, "c_t", r.c_t);
  r.c_s = get_or(obj, "c_s", r.c_s);
  r.gamma_t = get_or(obj, "gamma_t", r.gamma_t);
  r.gamma_s = get_or(obj, "gamma_s", r.gamma_s);
  r.b_t_const = get_or(obj, "B_t", r.b_t_const);
  r.b_s_const = get_or(obj, "B_s", r.b_s_const);
  r.b_delta_const = get_or(obj, "B_delta", r.b_delta_const);
  return r;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be an object");
  ExperimentConfig c;
  c.name = get_or<std::string>(doc, "name", "experiment");
  c.seed = get_or<std::uint64_t>(doc, "seed", 0);
  c.replications = get_or(doc, "replications", c.replications);
  c.r_max = get_or(doc, "r_max", c.r_max);
  c.noise_sigma = get_or(doc, "noise_sigma", c.noise_sigma);
  const auto process = get_or<std::string>(doc, "process", "brownian");
  if (process == "brownian") {
    c.process = ProcessKind::Brownian;
  } else if (process == "none") {
    c.process = ProcessKind::None;
  } else {
    throw ConfigError("unknown process '" + process + "'");
  }
  if (doc.contains("smoothness")) c.smoothness = parse_smoothness(doc.at("smoothness"));
  if (doc.contains("regularity")) c.regularity = parse_regularity(doc.at("regularity"));

  if (!doc.contains("grids") || !doc.at("grids").is_array()) {
    throw ConfigError("configuration needs a 'grids' list");
  }
  for (const json& g : doc.at("grids")) {
    DesignKind design;
    try {
      design = parse_design(get_or<std::string>(g, "design", ""));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const std::vector<int> n_t = int_list(g, "n_t");
    const std::vector<int> m_t = int_list(g, "m_t");
    const std::vector<int> n_s = int_list(g, "n_s");
    const std::vector<int> m_s = int_list(g, "m_s");
    const int K = get_or(g, "K", 2);
    const bool baseline = get_or(g, "baseline", true);
    if (n_t.empty() || m_t.empty()) throw ConfigError("every grid needs n_t and m_t");

    for (int nt : n_t) {
      for (int mt : m_t) {
        if (baseline) c.cells.push_back({design, {nt, mt, 0, 0, 0}});
        for (int ns : n_s) {
          for (int ms : m_s) c.cells.push_back({design, {nt, mt, ns, ms, K}});
        }
      }
    }
  }
  const auto problems = validate(c);
  if (!problems.empty()) throw ConfigError(problems.front());
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

std::vector<std::string> validate(const ExperimentConfig& config) {
  std::vector<std::string> out;
  if (config.replications < 1) out.push_back("replications must be at least 1");
  if (config.r_max < 1) out.push_back("r_max must be at least 1");
  if (!(config.noise_sigma >= 0.0)) out.push_back("noise_sigma must be nonnegative");
  if (config.cells.empty()) out.push_back("no cells configured");
  for (const std::string& p : validate(config.smoothness)) out.push_back(p);
  for (const Cell& cell : config.cells) {
    const SampleSizes& s = cell.sizes;
    if (s.n_t < 1 || s.m_t < 1) out.push_back(cell.label() + ": n_t and m_t must be positive");
    if (s.n_s < 0 || s.m_s < 0 || s.K < 0) {
      out.push_back(cell.label() + ": source sizes must be nonnegative");
    }
    if (s.K > 0 && (s.n_s < 1 || s.m_s < 1)) {
      out.push_back(cell.label() + ": K > 0 needs positive n_s and m_s");
    }
    for (const std::string& p : validate(config.regularity, cell.design)) {
      out.push_back(cell.label() + ": " + p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replications

std::uint64_t replication_seed(std::uint64_t master, std::size_t cell_index, int replication) {
  return derive_seed(master, {static_cast<std::uint64_t>(cell_index),
                              static_cast<std::uint64_t>(replication)});
}

SimulationSpec simulation_for(const ExperimentConfig& config, const Cell& cell) {
  SimulationSpec sim;
  sim.sizes = cell.sizes;
  sim.design = cell.design;
  sim.noise.sigma = config.noise_sigma;
  sim.process = config.process;
  return sim;
}

double run_replication(const ExperimentConfig& config, const Cell& cell, std::uint64_t seed,
                       Exec exec) {
  SimulationSpec sim = simulation_for(config, cell);
  sim.sizes.n_t = 2 * cell.sizes.n_t;
  const SampleBundle bundle = generate_bundle(sim, derive_seed(seed, {1}));
  const AdaptiveRun run = adaptive_run(bundle, config.smoothness, config.regularity);
  const BaggedEstimator est = bagged(run, config.r_max, derive_seed(seed, {2}), exec);
  return imse(est, paper_target);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_cell(const Cell& c) {
  std::ostringstream os;
  os << to_string(c.design) << ',' << c.sizes.n_t << ',' << c.sizes.m_t << ',' << c.sizes.n_s
     << ',' << c.sizes.m_s << ',' << c.sizes.K;
  return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Cell parse_cell(const std::vector<std::string>& f) {
  Cell c;
  c.design = parse_design(f.at(0));
  c.sizes = {std::stoi(f.at(1)), std::stoi(f.at(2)), std::stoi(f.at(3)), std::stoi(f.at(4)),
             std::stoi(f.at(5))};
  return c;
}

}  // namespace

std::string format_row(const ResultRow& row) {
  return format_cell(row.cell) + ',' + std::to_string(row.replication) + ',' +
         std::to_string(row.seed) + ',' + format_double(row.imse);
}

std::vector<ResultRow> parse_results(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != kResultsHeader) throw std::runtime_error("results: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    try {
      if (f.size() != 9) throw std::invalid_argument("expected 9 fields");
      ResultRow r;
      r.cell = parse_cell(f);
      r.replication = std::stoi(f[6]);
      r.seed = std::stoull(f[7]);
      r.imse = std::stod(f[8]);
      rows.push_back(r);
    } catch (const std::exception& e) {
      throw std::runtime_error("results line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_results(in);
}

std::string format_summary(const CellSummary& s) {
  const RiskSummary& r = s.risk;
  return format_cell(s.cell) + ',' + std::to_string(r.count) + ',' + format_double(r.min) + ',' +
         format_double(r.q1) + ',' + format_double(r.median) + ',' + format_double(r.q3) + ',' +
         format_double(r.max) + ',' + format_double(r.mean);
}

std::vector<std::pair<Cell, std::size_t>> read_summary_cells(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::pair<Cell, std::size_t>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    const auto f = split_csv(line);
    try {
      if (f.size() != 13) throw std::invalid_argument("expected 13 fields");
      out.emplace_back(parse_cell(f), static_cast<std::size_t>(std::stoull(f[6])));
    } catch (const std::exception& e) {
      throw std::runtime_error("summary line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runner

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto problems = validate(config);
  if (!problems.empty()) throw ConfigError(problems.front());

  std::filesystem::create_directories(options.out_dir);
  const auto results_path = options.out_dir / "results.csv";

  std::map<std::string, std::vector<ResultRow>> previous;
  if (options.resume && std::filesystem::exists(results_path)) {
    for (ResultRow& r : read_results(results_path)) previous[r.cell.label()].push_back(r);
  }

  const std::regex filter(options.cell_filter.empty() ? ".*" : options.cell_filter);
  std::ofstream out(results_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + results_path.string());
  out << kResultsHeader << '\n';
  out.flush();

  std::vector<ResultRow> all;
  std::vector<CellSummary> summaries;
  const int reps = config.replications;

  for (std::size_t ci = 0; ci < config.cells.size(); ++ci) {
    const Cell& cell = config.cells[ci];
    if (!std::regex_search(cell.label(), filter)) continue;

    std::vector<ResultRow> rows;
    auto it = previous.find(cell.label());
    bool complete = it != previous.end() && static_cast<int>(it->second.size()) == reps;
    for (int r = 0; complete && r < reps; ++r) {
      const ResultRow& p = it->second[static_cast<std::size_t>(r)];
      complete = p.replication == r && p.seed == replication_seed(config.seed, ci, r);
    }

    if (complete) {
      rows = it->second;
      for (const ResultRow& r : rows) out << format_row(r) << '\n';
      out.flush();
    } else {
      std::vector<std::optional<ResultRow>> done(static_cast<std::size_t>(reps));
      std::size_t next = 0;
      std::exception_ptr failure;
      std::mutex mu;

#pragma omp parallel for schedule(dynamic, 1)
      for (int r = 0; r < reps; ++r) {
        try {
          ResultRow row{cell, r, replication_seed(config.seed, ci, r), 0.0};
          row.imse = run_replication(config, cell, row.seed, Exec::Parallel);
          std::lock_guard<std::mutex> lock(mu);
          done[static_cast<std::size_t>(r)] = row;
          while (next < done.size() && done[next]) {
            out << format_row(*done[next]) << '\n';
            out.flush();
            if (options.on_row) options.on_row(*done[next]);
            ++next;
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
      if (failure) std::rethrow_exception(failure);
      for (auto& d : done) rows.push_back(*d);
    }

    std::vector<double> values;
    for (const ResultRow& r : rows) values.push_back(r.imse);
    summaries.push_back({cell, summarize(values)});
    all.insert(all.end(), rows.begin(), rows.end());
  }

  std::ofstream summary(options.out_dir / "summary.csv", std::ios::trunc);
  summary << kSummaryHeader << '\n';
  for (const CellSummary& s : summaries) summary << format_summary(s) << '\n';
  return all;
}

// ---------------------------------------------------------------------------
// Rate studies

double RateStudy::slope() const {
  std::vector<std::pair<double, double>> pts;
  for (const RatePoint& p : points) {
    double sum = 0.0;
    for (double v : p.imse) sum += v;
    pts.emplace_back(p.size, sum / static_cast<double>(p.imse.size()));
  }
  return rate_slope(pts);
}

namespace {

enum : std::uint64_t { kBiasStudy = 101, kParametricStudy = 102, kIndependentStudy = 103 };

template <class Body>
RatePoint replicate(double size, int replications, Body&& body) {
  RatePoint p{size, std::vector<double>(static_cast<std::size_t>(replications))};
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < replications; ++r) p.imse[static_cast<std::size_t>(r)] = body(r);
  return p;
}

}  // namespace

RateStudy bias_rate_study(const RateOptions& options, int degree) {
  RateStudy study{"bias_rate_d" + std::to_string(degree), "m_t", {}};
  const auto truth = [](double x) { return std::abs(x - 0.5); };
  const DesignRegularity reg;
  const int n_t = 200;
  for (int m_t : {8, 16, 32, 64, 128}) {
    const FitParams params(
        static_cast<int>(std::ceil(m_t / (2.0 * reg.b_t_const * (degree + 1)))), degree,
        log_floor(n_t));
    study.points.push_back(replicate(m_t, options.replications, [&](int r) {
      SimulationSpec sim;
      sim.sizes = {n_t, m_t, 0, 0, 0};
      sim.design = DesignKind::Common;
      sim.target = MeanSpec::custom(truth);
      sim.noise.sigma = 0.0;
      sim.process = ProcessKind::None;
      const std::uint64_t seed =
          derive_seed(options.seed, {kBiasStudy, static_cast<std::uint64_t>(m_t),
                                     static_cast<std::uint64_t>(r)});
      const SampleBundle bundle = generate_bundle(sim, derive_seed(seed, {1}));
      const PiecewisePoly est = fit_cl(bundle, params, derive_seed(seed, {2}), Exec::Serial);
      return imse(est, truth);
    }));
  }
  return study;
}

RateStudy parametric_rate_study(const RateOptions& options) {
  RateStudy study{"parametric_rate", "n_t", {}};
  const auto truth = [](double x) { return 1.0 + x - x * x; };
  SmoothnessSpec spec;
  spec.alpha_m = 2.0;
  const DesignRegularity reg;
  const int m_t = 200;
  for (int n_t : {25, 50, 100, 200, 400}) {
    const FitParams params = theoretical_params_common(spec, reg, {n_t, m_t, 0, 0, 0}).cl;
    study.points.push_back(replicate(n_t, options.replications, [&](int r) {
      SimulationSpec sim;
      sim.sizes = {n_t, m_t, 0, 0, 0};
      sim.design = DesignKind::Common;
      sim.target = MeanSpec::custom(truth);
      sim.noise.sigma = 1.0;
      const std::uint64_t seed =
          derive_seed(options.seed, {kParametricStudy, static_cast<std::uint64_t>(n_t),
                                     static_cast<std::uint64_t>(r)});
      const SampleBundle bundle = generate_bundle(sim, derive_seed(seed, {1}));
      const PiecewisePoly est = fit_cl(bundle, params, derive_seed(seed, {2}), Exec::Serial);
      return imse(est, truth);
    }));
  }
  return study;
}

RateStudy independent_rate_study(const RateOptions& options) {
  RateStudy study{"independent_rate", "m_t", {}};
  ExperimentConfig config;
  config.r_max = options.r_max;
  config.noise_sigma = 1.0;
  config.smoothness.alpha_m = 1.0;
  for (int m_t : {5, 10, 20, 40, 80}) {
    const Cell cell{DesignKind::Independent, {50, m_t, 0, 0, 0}};
    study.points.push_back(replicate(m_t, options.replications, [&](int r) {
      const std::uint64_t seed =
          derive_seed(options.seed, {kIndependentStudy, static_cast<std::uint64_t>(m_t),
                                     static_cast<std::uint64_t>(r)});
      return run_replication(config, cell, seed, Exec::Serial);
    }));
  }
  return study;
}

void write_rates_csv(const std::vector<RateStudy>& studies, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "study,axis,size,replication,imse\n";
  for (const RateStudy& s : studies) {
    for (const RatePoint& p : s.points) {
      for (std::size_t r = 0; r < p.imse.size(); ++r) {
        out << s.name << ',' << s.axis << ',' << format_double(p.size) << ',' << r << ','
            << format_double(p.imse[r]) << '\n';
      }
    }
  }
}

std::vector<RateStudy> read_rates_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<RateStudy> studies;
  std::string line;
  std::getline(in, line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 5) throw std::runtime_error("rates line " + std::to_string(lineno) + ": expected 5 fields");
    if (studies.empty() || studies.back().name != f[0]) studies.push_back({f[0], f[1], {}});
    const double size = std::stod(f[2]);
    auto& pts = studies.back().points;
    if (pts.empty() || pts.back().size != size) pts.push_back({size, {}});
    pts.back().imse.push_back(std::stod(f[4]));
  }
  return studies;
}

}  // namespace fmtl
