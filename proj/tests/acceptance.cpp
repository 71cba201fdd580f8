// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Thresholds were fixed after the pilot runs recorded
// in docs/pilot.md.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "fmtl/adaptive.hpp"
#include "fmtl/experiment.hpp"
#include "fmtl/localpoly.hpp"
#include "fmtl/simgen.hpp"
#include "fmtl/transfer.hpp"

using namespace fmtl;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

int failures = 0;
std::set<int> selected;  // empty runs every criterion

bool wanted(int id) { return selected.empty() || selected.count(id) > 0; }

void report(int id, const char* name, const Verdict& v) {
  std::printf("criterion %d %-40s %s  %s\n", id, name, v.pass ? "PASS" : "FAIL", v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Verdict exact_recovery() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  Stream rng(101);
  const int n_t = 10, m_t = 40;
  const double M = std::log(static_cast<double>(n_t));
  double worst = 0.0;
  for (int d = 0; d <= 3; ++d) {
    std::vector<double> c(static_cast<std::size_t>(d + 1));
    double total = 0.0;
    for (double& x : c) total += std::abs(x = 2.0 * rng.uniform() - 1.0);
    for (double& x : c) x *= (M / 2) / total;
    const auto g = [&](double x) { return horner(c, x); };

    SimulationSpec sim;
    sim.sizes = {n_t, m_t, 0, 0, 0};
    sim.target = MeanSpec::custom(g);
    sim.noise.sigma = 0.0;
    sim.process = ProcessKind::None;
    const SampleBundle b = generate_bundle(sim, rng());
    const PiecewisePoly est = fit_cl(b, FitParams(2, d, M), rng());
    for (int k = 0; k < 1000; ++k) {
      const double x = rng.uniform();
      worst = std::max(worst, std::abs(est.evaluate(x) - g(x)));
    }
  }
  const double secs = seconds_since(t0);
  v.detail = fmt("max error %.2e over degrees 0..3, %.3f s", worst, secs);
  if (!(worst <= 1e-8)) v.fail(v.detail);
  if (secs >= 1.0) v.fail(v.detail);
  return v;
}

// ---------------------------------------------------------------------------

SampleBundle random_bundle(Stream& rng, bool sources, DesignKind design) {
  SimulationSpec sim;
  sim.sizes = {2 * (1 + static_cast<int>(rng.below(6))), 1 + static_cast<int>(rng.below(8)), 0, 0, 0};
  if (sources) {
    sim.sizes.n_s = 1 + static_cast<int>(rng.below(6));
    sim.sizes.m_s = 1 + static_cast<int>(rng.below(10));
    sim.sizes.K = 1 + static_cast<int>(rng.below(2));
  }
  sim.design = design;
  sim.noise.sigma = 0.5 + rng.uniform();
  return generate_bundle(sim, rng());
}

Verdict invariant_suites() {
  Verdict v;
  constexpr int kTrials = 1000;
  Stream rng(202);
  std::map<std::string, int> trials;

  // Packing/covering: predicates on the returned subset, feasibility by exhaustion.
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = 1 + rng.below(10);
    const int m = 1 + static_cast<int>(rng.below(16));
    std::vector<Observation> pts(n);
    for (auto& o : pts) o.t = rng.uniform();
    std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.t < b.t; });
    const auto sel = packing_covering_indices(pts, m);
    std::vector<Observation> sub;
    for (auto i : sel.indices) sub.push_back(pts[i]);
    bool exists = false;
    for (std::uint32_t mask = 1; mask < (1u << n) && !exists; ++mask) {
      std::vector<Observation> s;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) s.push_back(pts[i]);
      }
      exists = is_packing(s, m) && is_covering(s, pts, m);
    }
    if (!is_packing(sub, m) || sel.covering != exists || (exists && !is_covering(sub, pts, m))) {
      v.fail("packing/covering trial " + std::to_string(t));
    }
    ++trials["packing"];
  }

  // One pick per subject per interval, picks inside their interval; threshold bound.
  for (int t = 0; t < kTrials; ++t) {
    const auto design = rng.below(2) ? DesignKind::Common : DesignKind::Independent;
    const SampleBundle b = random_bundle(rng, false, design);
    const FitParams p(1 + static_cast<int>(rng.below(8)), static_cast<int>(rng.below(3)),
                      0.2 + 2.0 * rng.uniform());
    const std::uint64_t seed = rng();
    for (const auto& cell : reduce(b.target, p, design, seed)) {
      std::set<int> ids;
      for (const Pick& pk : cell.picks) {
        if (!ids.insert(pk.subject_id).second || interval_index(pk.obs.t, p.intervals()) != cell.index) {
          v.fail("reduction trial " + std::to_string(t));
        }
      }
    }
    const PiecewisePoly est = fit(b.target, p, design, seed);
    for (int r = 0; r < p.intervals(); ++r) {
      if (!est.zeroed(r) && sup_norm_on_interval(est.coeffs().row(r).transpose()) > p.threshold()) {
        v.fail("threshold trial " + std::to_string(t));
      }
    }
    ++trials["reduction"];
    ++trials["threshold"];
  }

  // Selection optimality: the chosen risk is the exact minimum and matches a
  // recomputation on the test half; bagging linearity.
  for (int t = 0; t < kTrials; ++t) {
    const auto design = rng.below(2) ? DesignKind::Common : DesignKind::Independent;
    const SampleBundle b = random_bundle(rng, rng.below(2) == 1, design);
    const std::uint64_t seed = rng();
    const AdaptiveResult res = design == DesignKind::Common ? run_alc(b, {}, {}, seed)
                                                            : run_ali(b, {}, {}, seed);
    const double best = *std::min_element(res.risks.begin(), res.risks.end());
    Stream split_rng(derive_seed(seed, {11}));
    const Sample test = subset(b.target, split(static_cast<int>(b.target.size()), split_rng).test);
    const double again = design == DesignKind::Common
                             ? empirical_risk_common(res.chosen.est, test)
                             : empirical_risk_independent(res.chosen.est, test);
    if (res.risks[res.chosen_index] != best || again != best) {
      v.fail("selection trial " + std::to_string(t));
    }
    ++trials["selection"];

    const BaggedEstimator bag = bagged(adaptive_run(b, {}, {}), 1 + static_cast<int>(rng.below(4)), seed);
    for (int k = 0; k < 5; ++k) {
      const double x = rng.uniform();
      double sum = 0.0;
      for (const Estimator& e : bag.members) sum += e(x);
      if (bag(x) != sum / static_cast<double>(bag.members.size())) {
        v.fail("bagging trial " + std::to_string(t));
      }
    }
    ++trials["bagging"];
  }

  // Split validity.
  for (int t = 0; t < kTrials; ++t) {
    const int n2 = 2 * (1 + static_cast<int>(rng.below(100)));
    Stream s(rng());
    const SplitIndices sp = split(n2, s);
    std::set<int> all(sp.train.begin(), sp.train.end());
    all.insert(sp.test.begin(), sp.test.end());
    if (static_cast<int>(sp.train.size()) != n2 / 2 || static_cast<int>(sp.test.size()) != n2 / 2 ||
        static_cast<int>(all.size()) != n2 || *all.begin() != 0 || *all.rbegin() != n2 - 1 ||
        !std::is_sorted(sp.train.begin(), sp.train.end()) ||
        !std::is_sorted(sp.test.begin(), sp.test.end())) {
      v.fail("split trial " + std::to_string(t));
    }
    ++trials["split"];
  }

  // End-to-end determinism: the same configuration twice gives identical bytes.
  const fs::path dir = fs::temp_directory_path() / "fmtl_acceptance_determinism";
  for (int t = 0; t < kTrials; ++t) {
    ExperimentConfig c;
    c.name = "determinism";
    c.seed = rng();
    c.replications = 1;
    c.r_max = 2;
    const auto design = rng.below(2) ? DesignKind::Common : DesignKind::Independent;
    c.cells = {{design, {3, 4, 0, 0, 0}}, {design, {3, 4, 4, 6, 2}}};
    RunOptions a, b;
    a.out_dir = dir / "a";
    b.out_dir = dir / "b";
    run_experiment(c, a);
    run_experiment(c, b);
    if (slurp(a.out_dir / "results.csv") != slurp(b.out_dir / "results.csv") ||
        slurp(a.out_dir / "summary.csv") != slurp(b.out_dir / "summary.csv")) {
      v.fail("determinism trial " + std::to_string(t));
    }
    ++trials["determinism"];
  }
  fs::remove_all(dir);

  if (v.pass) {
    std::ostringstream os;
    os << "trials:";
    for (const auto& [name, n] : trials) os << ' ' << name << '=' << n;
    v.detail = os.str();
  }
  return v;
}

// ---------------------------------------------------------------------------
// Paper-protocol cells, run with the shipped configuration so the numbers
// match the figures.

class PaperCells {
 public:
  explicit PaperCells(const ExperimentConfig& config) : config_(config) {}

  double median(DesignKind design, SampleSizes sizes) {
    const Cell cell{design, sizes};
    auto it = cache_.find(cell.label());
    if (it != cache_.end()) return it->second;
    std::size_t index = config_.cells.size();
    for (std::size_t i = 0; i < config_.cells.size(); ++i) {
      if (config_.cells[i] == cell) index = i;
    }
    if (index == config_.cells.size()) throw std::runtime_error("cell not in config: " + cell.label());
    std::vector<double> imse(static_cast<std::size_t>(config_.replications));
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < config_.replications; ++r) {
      imse[static_cast<std::size_t>(r)] =
          run_replication(config_, cell, replication_seed(config_.seed, index, r), Exec::Serial);
    }
    const double m = summarize(imse).median;
    std::printf("  %-40s median IMSE %.5f\n", cell.label().c_str(), m);
    std::fflush(stdout);
    return cache_[cell.label()] = m;
  }

 private:
  const ExperimentConfig& config_;
  std::map<std::string, double> cache_;
};

constexpr SampleSizes kLowBase{50, 10, 0, 0, 0};
constexpr SampleSizes kHighBase{50, 50, 0, 0, 0};

Verdict phase_transition(PaperCells& cells) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const double low_base = cells.median(DesignKind::Common, kLowBase);
  const double low_tl = cells.median(DesignKind::Common, {50, 10, 400, 40, 2});
  const double high_base = cells.median(DesignKind::Common, kHighBase);
  const double high_tl = cells.median(DesignKind::Common, {50, 50, 400, 80, 2});
  const double low_ratio = low_tl / low_base, high_ratio = high_tl / high_base;
  v.detail = fmt("low ratio %.3f (<= 0.7), high ratio %.3f (within 0.8..1.2), %.0f s", low_ratio,
                 high_ratio, seconds_since(t0));
  if (!(low_ratio <= 0.7) || !(std::abs(high_ratio - 1.0) <= 0.2)) v.fail(v.detail);
  return v;
}

Verdict source_frequency(PaperCells& cells) {
  Verdict v;
  const double base = cells.median(DesignKind::Common, kLowBase);
  double lo = 1e300, hi = -1e300;
  for (int n_s : {50, 100, 200, 400}) {
    const double r = cells.median(DesignKind::Common, {50, 10, n_s, 10, 2}) / base;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  v.detail = fmt("ratios to baseline in [%.3f, %.3f] (within 0.8..1.2)", lo, hi);
  if (!(lo >= 0.8 && hi <= 1.2)) v.fail(v.detail);
  return v;
}

Verdict design_comparison(PaperCells& cells) {
  Verdict v;
  const double low_common = cells.median(DesignKind::Common, {50, 10, 400, 40, 2});
  const double low_indep = cells.median(DesignKind::Independent, {50, 10, 400, 40, 2});
  const double high_common = cells.median(DesignKind::Common, {50, 50, 400, 80, 2});
  const double high_indep = cells.median(DesignKind::Independent, {50, 50, 400, 80, 2});
  const double high_ratio = high_indep / high_common;
  v.detail = fmt("low independent/common %.3f (<= 1), high independent/common %.3f (within 0.8..1.2)",
                 low_indep / low_common, high_ratio);
  if (!(low_indep <= low_common) || !(std::abs(high_ratio - 1.0) <= 0.2)) v.fail(v.detail);
  return v;
}

// ---------------------------------------------------------------------------

Verdict bias_rate() {
  Verdict v;
  const RateStudy s = bias_rate_study(RateOptions{}, 1);
  std::ostringstream os;
  for (const RatePoint& p : s.points) {
    double mean = 0.0;
    for (double x : p.imse) mean += x;
    os << " m_t=" << p.size << ':' << mean / static_cast<double>(p.imse.size());
  }
  try {
    const double slope = s.slope();
    v.detail = fmt("slope %.3f (in [-2.3, -1.7]);", slope) + os.str();
    if (!(slope >= -2.3 && slope <= -1.7)) v.fail(v.detail);
  } catch (const std::invalid_argument&) {
    v.fail("slope undefined: zero IMSE at some m_t;" + os.str());
  }
  // Informational only: q = ceil(m_t / 4) is even for every m_t above, so the
  // kink at 0.5 is a breakpoint and a linear fit is exact. The constant fit
  // does see the kink.
  try {
    v.detail += fmt(" [d = 0 slope %.3f, informational]", bias_rate_study(RateOptions{}, 0).slope());
  } catch (const std::invalid_argument&) {
    v.detail += " [d = 0 slope undefined]";
  }
  return v;
}

Verdict parametric_rate() {
  Verdict v;
  const double slope = parametric_rate_study(RateOptions{}).slope();
  v.detail = fmt("slope %.3f (in [-1.25, -0.75])", slope);
  if (!(slope >= -1.25 && slope <= -0.75)) v.fail(v.detail);
  return v;
}

Verdict independent_rate() {
  Verdict v;
  const RateStudy s = independent_rate_study(RateOptions{});
  std::ostringstream os;
  os << "medians:";
  double prev = 1e300;
  for (const RatePoint& p : s.points) {
    const double med = summarize(p.imse).median;
    os << ' ' << p.size << ':' << med;
    if (!(med < prev)) v.pass = false;
    prev = med;
  }
  v.detail = os.str() + fmt(" (strictly decreasing; mean-IMSE slope %.3f)", s.slope());
  return v;
}

}  // namespace

// Criterion ids on the command line restrict the run, e.g. `acceptance 1 2`.
int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  try {
    if (wanted(1)) report(1, "exact polynomial recovery", exact_recovery());
    if (wanted(2)) report(2, "invariant suites", invariant_suites());

    const ExperimentConfig config =
        load_config(fs::path(FMTL_SOURCE_DIR) / "configs" / "paper-figures.json");
    PaperCells cells(config);
    if (wanted(3)) report(3, "phase transition (common design)", phase_transition(cells));
    if (wanted(4)) report(4, "source frequency necessity", source_frequency(cells));
    if (wanted(5)) report(5, "design comparison", design_comparison(cells));

    if (wanted(6)) report(6, "bias rate slope (common, d = 1)", bias_rate());
    if (wanted(7)) report(7, "parametric floor slope", parametric_rate());
    if (wanted(8)) report(8, "independent design pooled rate", independent_rate());
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
