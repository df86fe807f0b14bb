#include "mvub/model.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace mvub {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

EmpiricalMeasure EmpiricalMeasure::filled(int n, std::span<const double> point) {
  EmpiricalMeasure m(n, static_cast<int>(point.size()));
  for (int i = 0; i < n; ++i)
    std::memcpy(m.particle(i).data(), point.data(), point.size() * sizeof(double));
  return m;
}

void SignedEmpiricalMeasure::reserve(std::size_t n) {
  points_.reserve(n * dim_);
  weights_.reserve(n);
}

void SignedEmpiricalMeasure::add_atom(std::span<const double> point, double weight) {
  points_.insert(points_.end(), point.begin(), point.end());
  weights_.push_back(weight);
}

double SignedEmpiricalMeasure::evaluate(
    const std::function<double(std::span<const double>)>& phi) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) acc += weights_[j] * phi(point(j));
  return scale_ * acc;
}

double SignedEmpiricalMeasure::telescope_mass() const {
  double acc = 0.0;
  for (double w : weights_) acc += w;
  return acc;
}

double interaction_mean(const KernelFn& kernel, std::span<const double> x,
                        const EmpiricalMeasure& measure) {
  const int n = measure.size();
  if (n == 0) throw std::invalid_argument("empty empirical measure");
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += kernel(x, measure.particle(j));
  return acc / n;
}

Model curie_weiss(double beta, double k, double sigma, double x0) {
  require(beta > 0.0, "curie_weiss: beta must be positive");
  require(k > 0.0, "curie_weiss: k must be positive");
  require(sigma > 0.0, "curie_weiss: sigma must be positive");
  require(std::isfinite(x0), "curie_weiss: x0 must be finite");

  Model m;
  m.dim = 1;
  m.x0 = {x0};
  m.drift = [beta, k](std::span<const double> x, double s, std::span<double> out) {
    out[0] = beta * (-x[0] * x[0] * x[0] + x[0] + k * s);
  };
  m.diffusion = [sigma](std::span<const double>, double, std::span<double> out) {
    out[0] = sigma;
  };
  m.kernel1 = [](std::span<const double>, std::span<const double> z) { return z[0]; };
  m.kernel2 = [](std::span<const double>, std::span<const double>) { return 0.0; };
  m.separable1 = SeparableKernel{[](std::span<const double>) { return 1.0; },
                                 [](std::span<const double> z) { return z[0]; }};
  m.separable2 = SeparableKernel{[](std::span<const double>) { return 0.0; },
                                 [](std::span<const double>) { return 0.0; }};
  return m;
}

Model mean_field_ou(double theta, double kappa, double sigma, double x0) {
  require(theta > 0.0, "mean_field_ou: theta must be positive");
  require(sigma > 0.0, "mean_field_ou: sigma must be positive");
  require(std::isfinite(kappa), "mean_field_ou: kappa must be finite");
  require(std::isfinite(x0), "mean_field_ou: x0 must be finite");

  Model m;
  m.dim = 1;
  m.x0 = {x0};
  m.drift = [theta, kappa](std::span<const double> x, double s, std::span<double> out) {
    out[0] = -theta * (x[0] - kappa * s);
  };
  m.diffusion = [sigma](std::span<const double>, double, std::span<double> out) {
    out[0] = sigma;
  };
  m.kernel1 = [](std::span<const double>, std::span<const double> z) { return z[0]; };
  m.kernel2 = [](std::span<const double>, std::span<const double>) { return 0.0; };
  m.separable1 = SeparableKernel{[](std::span<const double>) { return 1.0; },
                                 [](std::span<const double> z) { return z[0]; }};
  m.separable2 = SeparableKernel{[](std::span<const double>) { return 0.0; },
                                 [](std::span<const double>) { return 0.0; }};
  return m;
}

Model mle_gaussian(std::vector<double> y) {
  require(!y.empty(), "mle_gaussian: observation vector is empty");
  for (double v : y) require(std::isfinite(v), "mle_gaussian: observation not finite");

  const int dy = static_cast<int>(y.size());
  const int dim = 1 + dy;

  Model m;
  m.dim = dim;
  m.x0.assign(dim, 0.0);
  // State u = (theta, x_1..x_dy). The averaged score of the Gaussian toy
  // model reduces to sum_i E[x_i] - dy * theta for the theta component and
  // to (y_i - x_i) + (theta - x_i) for each x component.
  m.drift = [y, dy](std::span<const double> u, double s, std::span<double> out) {
    out[0] = s - dy * u[0];
    for (int i = 0; i < dy; ++i) out[1 + i] = y[i] + u[0] - 2.0 * u[1 + i];
  };
  const double sqrt2 = std::sqrt(2.0);
  m.diffusion = [dim, sqrt2](std::span<const double>, double, std::span<double> out) {
    for (double& v : out) v = 0.0;
    out[0] = 1.0;  // theta row; realized noise is step-scaled (see below)
    for (int i = 1; i < dim; ++i) out[i * dim + i] = sqrt2;
  };
  m.step_scaled_noise_rows = {0};
  m.kernel1 = [dy](std::span<const double>, std::span<const double> z) {
    double acc = 0.0;
    for (int i = 0; i < dy; ++i) acc += z[1 + i];
    return acc;
  };
  m.kernel2 = [](std::span<const double>, std::span<const double>) { return 0.0; };
  m.separable1 = SeparableKernel{[](std::span<const double>) { return 1.0; },
                                 [dy](std::span<const double> z) {
                                   double acc = 0.0;
                                   for (int i = 0; i < dy; ++i) acc += z[1 + i];
                                   return acc;
                                 }};
  m.separable2 = SeparableKernel{[](std::span<const double>) { return 0.0; },
                                 [](std::span<const double>) { return 0.0; }};
  return m;
}

Model neuron3d(const NeuronParams& p) {
  require(p.sigma_V0 > 0.0 && p.sigma_w0 > 0.0 && p.sigma_y0 > 0.0,
          "neuron3d: initial variances must be positive");

  Model m;
  m.dim = 3;
  m.x0 = {p.V0, p.w0, p.y0};

  const auto gate = [p](double v, double y3) {
    return p.a_r * p.T_max * (1.0 - y3) / (1.0 + std::exp(-p.lambda * (v - p.V_T)));
  };

  m.drift = [p, gate](std::span<const double> x, double s, std::span<double> out) {
    out[0] = x[0] - x[0] * x[0] * x[0] / 3.0 - x[1] + p.I - s;
    out[1] = p.c * (x[0] + p.a - p.b * x[1]);
    out[2] = gate(x[0], x[2]) - p.a_d * x[2];
  };
  m.diffusion = [p, gate](std::span<const double> x, double s2, std::span<double> out) {
    for (double& v : out) v = 0.0;
    out[0] = p.b_ext;
    out[2] = -s2;
    double b32 = 0.0;
    if (x[2] > 0.0 && x[2] < 1.0) {
      const double q = gate(x[0], x[2]) + p.a_d * x[2];
      const double u = 2.0 * x[2] - 1.0;
      b32 = std::sqrt(q) * p.Gamma * std::exp(-p.Lambda / (1.0 - u * u));
    }
    out[7] = b32;  // row 2, column 1
  };
  m.kernel1 = [p](std::span<const double> x, std::span<const double> z) {
    return p.J * (x[0] - p.V_rev) * z[2];
  };
  m.kernel2 = [p](std::span<const double> x, std::span<const double> z) {
    return p.b_J * (x[0] - p.V_rev) * z[2];
  };
  m.separable1 =
      SeparableKernel{[p](std::span<const double> x) { return p.J * (x[0] - p.V_rev); },
                      [](std::span<const double> z) { return z[2]; }};
  m.separable2 =
      SeparableKernel{[p](std::span<const double> x) { return p.b_J * (x[0] - p.V_rev); },
                      [](std::span<const double> z) { return z[2]; }};
  // The stated initial covariance is diagonal; entries are variances.
  m.sample_initial = [p](const StreamKey& key) {
    GaussianStream g(key);
    return std::vector<double>{p.V0 + std::sqrt(p.sigma_V0) * g.next(),
                               p.w0 + std::sqrt(p.sigma_w0) * g.next(),
                               p.y0 + std::sqrt(p.sigma_y0) * g.next()};
  };
  return m;
}

}  // namespace mvub
