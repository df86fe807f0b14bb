#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "mvub/analysis.hpp"

using namespace mvub;

namespace {

SignedEmpiricalMeasure atoms1(const std::vector<std::pair<double, double>>& pts,
                              double scale = 1.0) {
  SignedEmpiricalMeasure m(1, scale);
  for (const auto& [x, w] : pts) m.add_atom(std::span<const double>(&x, 1), w);
  return m;
}

std::vector<double> normal_sample(std::uint64_t seed, std::size_t n, double shift,
                                  double spread) {
  auto v = gaussian_increments(StreamKey{seed, 0, StreamRole::Chain, 0}, n, 1, 1.0);
  for (double& x : v) x = shift + spread * x;
  return v;
}

}  // namespace

TEST_CASE("kde point values") {
  const auto single = atoms1({{0.0, 1.0}});
  CHECK(kde_value(single, 0, 1.0, 0.0) == doctest::Approx(0.39894).epsilon(1e-4));

  const auto pair = atoms1({{-1.0, 0.5}, {1.0, 0.5}});
  CHECK(kde_value(pair, 0, 0.3, 1.0) == doctest::Approx(kde_value(pair, 0, 0.3, -1.0)));

  CHECK_THROWS_AS(kde_value(single, 0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kde_value(single, 2, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("kde is linear in the measure") {
  const auto a = atoms1({{-0.4, 0.25}, {0.9, 0.75}});
  const auto b = atoms1({{0.1, 1.0}, {2.0, -0.5}});
  // alpha a + beta b assembled by hand with power-of-two coefficients so the
  // check is exact
  SignedEmpiricalMeasure combo(1);
  for (std::size_t j = 0; j < a.size(); ++j) combo.add_atom(a.point(j), 2.0 * a.weight(j));
  for (std::size_t j = 0; j < b.size(); ++j) combo.add_atom(b.point(j), 0.5 * b.weight(j));
  for (double x : {-1.0, 0.0, 0.7, 3.1})
    CHECK(kde_value(combo, 0, 0.4, x) ==
          doctest::Approx(2.0 * kde_value(a, 0, 0.4, x) + 0.5 * kde_value(b, 0, 0.4, x))
              .epsilon(1e-14));
}

TEST_CASE("kde integrates to the total signed weight") {
  const auto m = atoms1({{-0.8, 0.5}, {0.2, 1.25}, {1.4, -0.25}}, 0.8);
  const double h = 0.2;
  const double mass = adaptive_simpson([&](double x) { return kde_value(m, 0, h, x); },
                                       -0.8 - 10.0 * h, 1.4 + 10.0 * h, 1e-10);
  CHECK(std::abs(mass - m.total_mass()) < 1e-6);
  CHECK(m.total_mass() == doctest::Approx(0.8 * 1.5));
}

TEST_CASE("moment evaluates powers against the atoms") {
  CHECK(moment(atoms1({{1.0, 1.0}}), 0, 2) == 1.0);
  CHECK(moment(atoms1({{-1.0, 0.5}, {1.0, 0.5}}), 0, 1) == 0.0);
  CHECK(moment(atoms1({{2.0, 1.0}}), 0, 3) == 8.0);
  CHECK_THROWS_AS(moment(atoms1({{1.0, 1.0}}), 0, 0), std::invalid_argument);
}

TEST_CASE("wasserstein_1d basics") {
  const std::vector<double> zero{0.0}, one{1.0};
  CHECK(wasserstein_1d(zero, zero, 1) == 0.0);
  CHECK(wasserstein_1d(zero, one, 1) == doctest::Approx(1.0));

  // brute force over the two pairings of {0,2} vs {1,3} at order 2:
  // matched 0-1, 2-3 costs mean((1)^2,(1)^2) = 1; crossed costs mean(9, 1) = 5
  const std::vector<double> a{0.0, 2.0}, b{1.0, 3.0};
  const double matched = std::sqrt(0.5 * (1.0 + 1.0));
  const double crossed = std::sqrt(0.5 * (9.0 + 1.0));
  CHECK(matched < crossed);
  CHECK(wasserstein_1d(a, b, 2) == doctest::Approx(matched));

  const std::vector<double> empty;
  CHECK_THROWS_AS(wasserstein_1d(empty, one, 1), std::invalid_argument);
  CHECK_THROWS_AS(wasserstein_1d(a, b, 3), std::invalid_argument);
}

TEST_CASE("wasserstein_1d handles unequal sample counts by atom duplication") {
  const std::vector<double> a{0.0, 1.0};
  const std::vector<double> b{0.0, 0.5, 1.0};
  // duplicate to the lcm (6 atoms each) and match sorted lists
  const std::vector<double> a6{0.0, 0.0, 0.0, 1.0, 1.0, 1.0};
  const std::vector<double> b6{0.0, 0.0, 0.5, 0.5, 1.0, 1.0};
  CHECK(wasserstein_1d(a, b, 1) == doctest::Approx(wasserstein_1d(a6, b6, 1)).epsilon(1e-12));
  CHECK(wasserstein_1d(a, b, 2) == doctest::Approx(wasserstein_1d(a6, b6, 2)).epsilon(1e-12));
}

TEST_CASE("wasserstein_1d metric properties on random triples") {
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = normal_sample(100 + trial, 24, 0.0, 1.0);
    const auto b = normal_sample(300 + trial, 24, 0.5, 1.4);
    const auto c = normal_sample(500 + trial, 24, -0.3, 0.7);

    for (int p : {1, 2}) {
      const double ab = wasserstein_1d(a, b, p);
      const double ba = wasserstein_1d(b, a, p);
      CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
      CHECK(wasserstein_1d(a, a, p) == 0.0);
      const double ac = wasserstein_1d(a, c, p);
      const double bc = wasserstein_1d(b, c, p);
      CHECK(ab <= ac + bc + 1e-12);
    }
    // Jensen ordering
    CHECK(wasserstein_1d(a, b, 1) <= wasserstein_1d(a, b, 2) + 1e-12);
  }
}

TEST_CASE("pooled measure averages replicate atoms") {
  std::vector<ReplicateResult> reps(2);
  reps[0].measure = atoms1({{1.0, 1.0}}, 2.0);
  reps[1].measure = atoms1({{3.0, 1.0}}, 4.0);
  const auto pooled = pooled_measure(reps);
  REQUIRE(pooled.size() == 2);
  CHECK(pooled.total_mass() == doctest::Approx(3.0));  // (2 + 4) / 2
  CHECK(moment(pooled, 0, 1) == doctest::Approx(0.5 * (2.0 * 1.0 + 4.0 * 3.0)));
}

TEST_CASE("mse_study with a constant estimator") {
  // Deterministic model: every replicate returns x0 + c exactly (single
  // level, horizon zero), so the study has zero variance.
  Model m;
  m.dim = 1;
  m.x0 = {0.5};
  m.drift = [](std::span<const double>, double, std::span<double> out) { out[0] = 0.7; };
  m.diffusion = [](std::span<const double>, double, std::span<double> out) { out[0] = 0.0; };
  m.kernel1 = [](std::span<const double>, std::span<const double>) { return 0.0; };
  m.kernel2 = m.kernel1;

  EstimatorConfig cfg;
  cfg.l_star = cfg.l_max = 2;
  cfg.p_max = 0;
  cfg.n_base = 1;
  const Phi phi = [](std::span<const double> x) { return x[0]; };

  const auto exact = mse_study(m, cfg, phi, 1.2, 4, 3, 99, 1);
  REQUIRE(exact.estimates.size() == 3);
  for (double e : exact.estimates) CHECK(e == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(exact.mse == doctest::Approx(0.0));

  // a constant bias c makes the MSE exactly c^2
  const auto biased = mse_study(m, cfg, phi, 1.2 - 0.3, 4, 3, 99, 1);
  CHECK(biased.mse == doctest::Approx(0.09).epsilon(1e-12));

  CHECK_THROWS_AS(mse_study(m, cfg, phi, 0.0, 4, 1, 99, 1), std::invalid_argument);
}

TEST_CASE("contraction diagnostic") {
  const Model m = mean_field_ou(1.0, 0.5, 1.0, 1.0);

  SUBCASE("identical starts stay at distance zero") {
    const auto trace = contraction_diagnostic(m, 3, 64, 5, 1.5, 1.5, 42);
    REQUIRE(trace.size() == 5);
    for (const auto& [t, w2] : trace) CHECK(w2 == 0.0);
  }

  SUBCASE("decay rate matches the synchronous-coupling oracle") {
    // For the linear model the coupled gap contracts deterministically at
    // rate theta (1 - kappa) per unit time, i.e. 2 theta (1 - kappa) for W2^2.
    const auto trace = contraction_diagnostic(m, 4, 256, 8, -2.0, 2.0, 43);
    std::vector<double> ts, logs;
    for (const auto& [t, w2] : trace) {
      REQUIRE(w2 > 0.0);
      ts.push_back(t);
      logs.push_back(std::log(w2 * w2));
    }
    const double slope = fit_slope(ts, logs);
    const double rate = 2.0 * 1.0 * (1.0 - 0.5);
    CHECK(slope < 0.0);
    CHECK(std::abs(slope) > 0.5 * rate);
    CHECK(std::abs(slope) < 1.5 * rate);
  }

  SUBCASE("scalar models only") {
    CHECK_THROWS_AS(contraction_diagnostic(neuron3d(), 3, 16, 2, 0.0, 1.0, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("adaptive quadrature and the double-well stationary law") {
  CHECK(adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0, 1e-12) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-10));

  const double gauss = adaptive_simpson(
      [](double x) { return std::exp(-0.5 * x * x); }, -12.0, 12.0, 1e-10);
  CHECK(gauss == doctest::Approx(std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-9));

  // reference values for beta = 1
  const auto truth = curie_weiss_stationary(1.0);
  CHECK(truth.normalizer == doctest::Approx(0.2401).epsilon(5e-4));
  CHECK(truth.second_moment == doctest::Approx(0.8935).epsilon(5e-4));

  // sanity: the density integrates to one under its own normalizer
  const double mass = adaptive_simpson(
      [&](double x) {
        return truth.normalizer * std::exp(-x * x * x * x / 2.0 + x * x);
      },
      -10.0, 10.0, 1e-10);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}
