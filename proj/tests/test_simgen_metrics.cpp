#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fmtl/localpoly.hpp"
#include "fmtl/metrics.hpp"
#include "fmtl/simgen.hpp"

using namespace fmtl;

TEST_CASE("mean functions") {
  CHECK(paper_target(0.0) == 2.0);
  CHECK(paper_difference(2, 1.0) == doctest::Approx(1.718282).epsilon(1e-6));
  CHECK(paper_source(2, 1.0) == doctest::Approx(paper_target(1.0) - 1.718282).epsilon(1e-6));
  CHECK(paper_source(1, 0.3) == doctest::Approx(paper_target(0.3) + 0.09));
  CHECK(MeanSpec::target()(0.7) == paper_target(0.7));
  CHECK(MeanSpec::source(1)(0.7) == paper_source(1, 0.7));
  CHECK(MeanSpec::custom([](double x) { return 3 * x; })(0.5) == 1.5);
  CHECK_THROWS_AS(MeanSpec::source(3), std::invalid_argument);
}

TEST_CASE("design points") {
  CHECK(common_design_points(1) == std::vector<double>{0.5});
  CHECK(common_design_points(3) == std::vector<double>{0.25, 0.5, 0.75});
  const auto t = common_design_points(37);
  double prev = 0.0;
  for (double v : t) {
    CHECK(v - prev == doctest::Approx(1.0 / 38));
    CHECK(v - prev < 2.0 / 37);
    prev = v;
  }
  CHECK(1.0 - prev == doctest::Approx(1.0 / 38));
  CHECK_THROWS_AS(common_design_points(0), std::invalid_argument);

  Stream rng(1);
  const auto u = independent_design_points(100000, rng);
  double sum = 0.0, sq = 0.0;
  for (double v : u) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
    sum += v;
  }
  const double mean = sum / u.size();
  for (double v : u) sq += (v - mean) * (v - mean);
  CHECK(std::abs(mean - 0.5) < 0.01);
  CHECK(std::abs(sq / u.size() - 1.0 / 12) < 0.005);
}

TEST_CASE("Brownian marginals and covariance") {
  Stream rng(2);
  const int n = 100000;
  double v7 = 0.0, c38 = 0.0, m3 = 0.0, m8 = 0.0;
  const std::vector<double> pts{0.8, 0.7, 0.3, 0.3};
  for (int i = 0; i < n; ++i) {
    const auto b = brownian_at(pts, rng);
    REQUIRE(b[2] == b[3]);
    v7 += b[1] * b[1];
    c38 += b[2] * b[0];
    m3 += b[2];
    m8 += b[0];
  }
  CHECK(std::abs(v7 / n - 0.7) < 0.02);
  CHECK(std::abs(c38 / n - (m3 / n) * (m8 / n) - 0.3) < 0.02);
}

TEST_CASE("generate_bundle") {
  SUBCASE("noiseless hook returns the mean exactly") {
    SimulationSpec sim;
    sim.sizes = {3, 5, 2, 4, 2};
    sim.target = MeanSpec::custom([](double x) { return x * x; });
    sim.noise.sigma = 0.0;
    sim.process = ProcessKind::None;
    const SampleBundle b = generate_bundle(sim, 1);
    for (const auto& set : b.target) {
      for (const auto& o : set.obs) CHECK(o.y == o.t * o.t);
    }
    for (int k = 0; k < 2; ++k) {
      for (const auto& o : b.sources[k][0].obs) CHECK(o.y == paper_source(k + 1, o.t));
    }
    CHECK(validate_bundle(b).empty());
  }
  SUBCASE("deterministic, independent of thread count, and well-formed") {
    SimulationSpec sim;
    sim.sizes = {20, 7, 30, 9, 3};
    sim.design = DesignKind::Independent;
    const SampleBundle a = generate_bundle(sim, 5);
    const SampleBundle b = generate_bundle(sim, 5);
    CHECK(validate_bundle(a).empty());
    REQUIRE(a.sources.size() == 3);
    for (std::size_t i = 0; i < a.target.size(); ++i) {
      for (std::size_t j = 0; j < a.target[i].obs.size(); ++j) {
        REQUIRE(a.target[i].obs[j].t == b.target[i].obs[j].t);
        REQUIRE(a.target[i].obs[j].y == b.target[i].obs[j].y);
      }
    }
    CHECK(a.target[0].obs[0].t != a.target[1].obs[0].t);
  }
  SUBCASE("empirical mean at a design point") {
    SimulationSpec sim;
    sim.sizes = {100000, 3, 0, 0, 0};
    const SampleBundle b = generate_bundle(sim, 9);
    double sum = 0.0, sq = 0.0;
    for (const auto& set : b.target) {
      sum += set.obs[1].y;
      sq += set.obs[1].y * set.obs[1].y;
    }
    const double n = 100000.0, mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - paper_target(0.5)) < 3 * se);
  }
  SUBCASE("invalid sizes") {
    SimulationSpec sim;
    sim.sizes = {0, 3, 0, 0, 0};
    CHECK_THROWS_AS(generate_bundle(sim, 1), std::invalid_argument);
    sim.sizes = {3, 3, 0, 2, 1};
    CHECK_THROWS_AS(generate_bundle(sim, 1), std::invalid_argument);
    sim.sizes = {3, 3, 0, 0, 0};
    sim.noise.sigma = -1.0;
    CHECK_THROWS_AS(generate_bundle(sim, 1), std::invalid_argument);
  }
}

TEST_CASE("imse") {
  auto f = [](double x) { return std::sin(3 * x); };
  CHECK(imse(f, f) < 1e-12);
  CHECK(imse([&](double x) { return f(x) + 0.3; }, f) == doctest::Approx(0.09).epsilon(1e-10));
  CHECK(std::abs(imse([](double) { return 0.0; }, [](double x) { return x; }) - 1.0 / 3) < 1e-6);

  auto g = [](double x) { return x * x - 0.2; };
  const double base = imse(f, g);
  CHECK(imse(g, f) == base);
  CHECK(imse([&](double x) { return g(x) + 2.5 * (f(x) - g(x)); }, g) ==
        doctest::Approx(6.25 * base).epsilon(1e-9));

  // Piecewise polynomial estimate with breakpoints on the quadrature grid.
  PiecewisePoly est(16, 1);
  for (int r = 0; r < 16; ++r) {
    Eigen::Vector2d c(std::sin(r * 0.4), 0.1 * r);
    est.set_interval(r, c, false);
  }
  const double coarse = imse(est, f);
  const double fine = imse(est, f, 2 * kImseCells);
  CHECK(std::abs(fine - coarse) < 1e-6 * coarse);
}

TEST_CASE("summaries and rate slopes") {
  CHECK(summarize(std::vector<double>{1, 2, 3}).median == 2);
  const auto one = summarize(std::vector<double>{5});
  CHECK(one.min == 5);
  CHECK(one.q1 == 5);
  CHECK(one.median == 5);
  CHECK(one.q3 == 5);
  CHECK(one.max == 5);
  const auto a = summarize(std::vector<double>{4, 1, 3, 2});
  const auto b = summarize(std::vector<double>{2, 3, 1, 4});
  CHECK(a.median == b.median);
  CHECK(a.q1 == 1);
  CHECK(a.median == 2);
  CHECK(a.q3 == 3);
  CHECK(a.mean == 2.5);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), std::invalid_argument);

  std::vector<std::pair<double, double>> p2, p1, flat;
  for (double n : {10.0, 20.0, 40.0, 80.0}) {
    p2.emplace_back(n, 3.0 * std::pow(n, -2.0));
    p1.emplace_back(n, 0.5 / n);
    flat.emplace_back(n, 0.7);
  }
  CHECK(rate_slope(p2) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(rate_slope(p1) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(rate_slope(flat) == doctest::Approx(0.0));
  p1[0].second = 0.0;
  CHECK_THROWS_AS(rate_slope(p1), std::invalid_argument);
  CHECK_THROWS_AS(rate_slope(std::vector<std::pair<double, double>>{{1, 1}, {2, 2}}),
                  std::invalid_argument);
}
