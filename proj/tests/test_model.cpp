#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "mvub/model.hpp"

using namespace mvub;

namespace {

double drift1(const Model& m, double x, double s) {
  double out;
  m.drift(std::span<const double>(&x, 1), s, std::span<double>(&out, 1));
  return out;
}

EmpiricalMeasure cloud1(const std::vector<double>& points) {
  EmpiricalMeasure m(static_cast<int>(points.size()), 1);
  for (int i = 0; i < m.size(); ++i) m.particle(i)[0] = points[i];
  return m;
}

}  // namespace

TEST_CASE("interaction_mean averages the kernel over the cloud") {
  const KernelFn identity = [](std::span<const double>, std::span<const double> z) {
    return z[0];
  };
  const double x = 5.0;
  const std::span<const double> xs(&x, 1);
  CHECK(interaction_mean(identity, xs, cloud1({1.0, 2.0, 3.0})) == doctest::Approx(2.0));

  const KernelFn sq_diff = [](std::span<const double> a, std::span<const double> z) {
    return (a[0] - z[0]) * (a[0] - z[0]);
  };
  const double zero = 0.0;
  CHECK(interaction_mean(sq_diff, std::span<const double>(&zero, 1), cloud1({1.0, -1.0})) ==
        doctest::Approx(1.0));

  // synaptic-style kernel J (x1 - V_rev) z3 with J = 1, V_rev = 1
  const KernelFn syn = [](std::span<const double> a, std::span<const double> z) {
    return 1.0 * (a[0] - 1.0) * z[2];
  };
  EmpiricalMeasure cloud(2, 3);
  cloud.particle(0)[2] = 0.2;
  cloud.particle(1)[2] = 0.4;
  const std::vector<double> at{0.0, 0.0, 0.0};
  CHECK(interaction_mean(syn, at, cloud) == doctest::Approx(-0.3));

  const EmpiricalMeasure empty;
  CHECK_THROWS_AS(interaction_mean(identity, xs, empty), std::invalid_argument);
}

TEST_CASE("interaction_mean is permutation invariant and exact on constant clouds") {
  const KernelFn k = [](std::span<const double> a, std::span<const double> z) {
    return std::sin(a[0]) * z[0] + z[0] * z[0];
  };
  const double x = 0.7;
  const std::span<const double> xs(&x, 1);
  const auto fwd = cloud1({0.3, -1.2, 2.5, 0.9});
  const auto rev = cloud1({0.9, 2.5, -1.2, 0.3});
  CHECK(interaction_mean(k, xs, fwd) == doctest::Approx(interaction_mean(k, xs, rev)));

  const auto constant = cloud1({1.7, 1.7, 1.7, 1.7, 1.7});
  const double z = 1.7;
  CHECK(interaction_mean(k, xs, constant) == k(xs, std::span<const double>(&z, 1)));
}

TEST_CASE("curie_weiss drift and parameters") {
  const Model m = curie_weiss(1.0, 0.25, 1.0, 1.0);
  CHECK(m.dim == 1);
  CHECK(drift1(m, 1.0, 1.0) == doctest::Approx(0.25));
  CHECK(drift1(m, 0.0, 0.0) == 0.0);

  // drift is odd in (x, s) jointly
  for (double x : {0.3, -1.5, 2.0})
    for (double s : {0.0, 0.5, -2.0})
      CHECK(drift1(m, -x, -s) == doctest::Approx(-drift1(m, x, s)));

  double b;
  const double probe = 0.4;
  m.diffusion(std::span<const double>(&probe, 1), 0.0, std::span<double>(&b, 1));
  CHECK(b == 1.0);

  const double z = 3.0, xq = 0.0;
  CHECK(m.kernel1(std::span<const double>(&xq, 1), std::span<const double>(&z, 1)) == 3.0);
  CHECK(m.kernel2(std::span<const double>(&xq, 1), std::span<const double>(&z, 1)) == 0.0);

  CHECK_THROWS_AS(curie_weiss(0.0, 0.25, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(curie_weiss(1.0, -1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(curie_weiss(1.0, 0.25, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("mean_field_ou drift and stationary variance oracle") {
  const Model m = mean_field_ou(1.0, 0.5, 1.0, 1.0);
  CHECK(drift1(m, 2.0, 2.0) == doctest::Approx(-1.0));
  // stationary mean is the fixed point of m = kappa * m
  CHECK(drift1(m, 0.0, 0.0) == 0.0);

  // Independent oracle for the stationary second moment: integrate
  // dv/dt = -2 theta v + sigma^2 to equilibrium with RK4.
  double v = 1.0;
  const double dt = 1e-3;
  const auto f = [](double val) { return -2.0 * val + 1.0; };
  for (int i = 0; i < 20000; ++i) {
    const double k1 = f(v);
    const double k2 = f(v + 0.5 * dt * k1);
    const double k3 = f(v + 0.5 * dt * k2);
    const double k4 = f(v + dt * k3);
    v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK(v == doctest::Approx(0.5).epsilon(1e-6));

  CHECK_THROWS_AS(mean_field_ou(-1.0, 0.5, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mean_field_ou(1.0, 0.5, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("mle_gaussian couples the score with the particle mean") {
  const std::vector<double> ones(10, 1.0);
  const Model m = mle_gaussian(ones);
  CHECK(m.dim == 11);
  CHECK(m.step_scaled_noise_rows == std::vector<int>{0});

  // theta row at theta = 0 with zero empirical x-means
  std::vector<double> u(11, 0.0), out(11);
  m.drift(u, 0.0, out);
  CHECK(out[0] == 0.0);

  // theta row at the exact empirical mean mbar equals d_y (mbar - theta)
  const double mbar = 0.75, theta = 0.2;
  u[0] = theta;
  m.drift(u, 10.0 * mbar, out);
  CHECK(out[0] == doctest::Approx(10.0 * (mbar - theta)));

  // x rows follow y + theta - 2 x
  u[3] = 1.3;
  m.drift(u, 0.0, out);
  CHECK(out[3] == doctest::Approx(1.0 + theta - 2.0 * 1.3));

  // kernel1 sums the x block
  std::vector<double> z(11, 0.0);
  z[0] = 9.0;  // theta entry of the atom is ignored
  z[1] = 0.5;
  z[10] = -0.2;
  CHECK(m.kernel1(u, z) == doctest::Approx(0.3));

  // diffusion: theta row 1 (step-scaled), x block sqrt(2) I
  std::vector<double> bmat(11 * 11);
  m.diffusion(u, 0.0, bmat);
  CHECK(bmat[0] == 1.0);
  for (int i = 1; i < 11; ++i) {
    CHECK(bmat[i * 11 + i] == doctest::Approx(std::sqrt(2.0)));
    CHECK(bmat[i] == 0.0);
  }

  const std::vector<double> no_data;
  CHECK_THROWS_AS(mle_gaussian(no_data), std::invalid_argument);
}

TEST_CASE("neuron3d coefficient table") {
  const Model m = neuron3d();
  CHECK(m.dim == 3);

  // recovery row at x = (0, 0.5, .): c (x1 + a - b x2) = 0.08 (0 + 0.7 - 0.4)
  std::vector<double> x{0.0, 0.5, 0.3}, out(3);
  m.drift(x, 0.0, out);
  CHECK(out[1] == doctest::Approx(0.024));

  // the mean-field input enters the voltage row with a minus sign
  m.drift(x, 0.1, out);
  const double base = 0.0 - 0.0 - 0.5 + 0.5;
  CHECK(out[0] == doctest::Approx(base - 0.1));

  // diffusion row 1 is identically zero and the gate noise vanishes at the
  // boundary of (0,1)
  std::vector<double> bmat(9);
  for (double y3 : {0.0, 1.0, 0.5, 0.25}) {
    x[2] = y3;
    m.diffusion(x, 0.2, bmat);
    CHECK(bmat[3] == 0.0);
    CHECK(bmat[4] == 0.0);
    CHECK(bmat[5] == 0.0);
    CHECK(bmat[0] == doctest::Approx(0.5));   // external input scale
    CHECK(bmat[2] == doctest::Approx(-0.2));  // -mean2
    if (y3 == 0.0 || y3 == 1.0) CHECK(bmat[7] == 0.0);
    if (y3 == 0.5) CHECK(bmat[7] > 0.0);
  }

  // default parameter table spot checks
  const NeuronParams p;
  CHECK(p.Gamma == 0.1);
  CHECK(p.Lambda == 0.5);
  CHECK(p.V_T == 2.0);
  CHECK(p.b_J == 0.2);
  CHECK(p.sigma_y0 == 0.05);

  // per-replicate initial draw is deterministic in the key and follows the
  // diagonal Gaussian
  const StreamKey key{17, 3, StreamRole::InitDraw, 0};
  const auto a = m.initial_point(key);
  const auto b = m.initial_point(key);
  CHECK(a == b);
  REQUIRE(a.size() == 3);
  CHECK(a != m.initial_point(StreamKey{17, 4, StreamRole::InitDraw, 0}));

  const int n = 20000;
  double mean_v = 0.0, var_v = 0.0;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) {
    draws[i] = m.initial_point(StreamKey{17, static_cast<std::uint64_t>(i),
                                         StreamRole::InitDraw, 0})[0];
    mean_v += draws[i];
  }
  mean_v /= n;
  for (double d : draws) var_v += (d - mean_v) * (d - mean_v);
  var_v /= (n - 1);
  CHECK(std::abs(mean_v) < 3.0 * std::sqrt(0.4 / n));
  CHECK(std::abs(var_v - 0.4) < 3.0 * 0.4 * std::sqrt(2.0 / n));
}

TEST_CASE("separable kernels agree with the pairwise definition") {
  const Model m = neuron3d();
  REQUIRE(m.separable1.has_value());
  EmpiricalMeasure cloud(3, 3);
  for (int i = 0; i < 3; ++i) {
    cloud.particle(i)[0] = 0.2 * i;
    cloud.particle(i)[2] = 0.1 + 0.3 * i;
  }
  const std::vector<double> x{1.5, 0.0, 0.5};
  double atom = 0.0;
  for (int i = 0; i < 3; ++i) atom += m.separable1->atom_factor(cloud.particle(i));
  atom /= 3.0;
  CHECK(m.separable1->state_factor(x) * atom ==
        doctest::Approx(interaction_mean(m.kernel1, x, cloud)));
}
