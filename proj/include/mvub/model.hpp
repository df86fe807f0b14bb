#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mvub/measure.hpp"
#include "mvub/rng.hpp"

namespace mvub {

// drift(x, m1) -> R^d where m1 is the first interaction mean at x
using DriftFn = std::function<void(std::span<const double>, double, std::span<double>)>;
// diffusion(x, m2) -> R^{d x d} row-major
using DiffusionFn = std::function<void(std::span<const double>, double, std::span<double>)>;
// kernel(x, z) -> R
using KernelFn = std::function<double(std::span<const double>, std::span<const double>)>;
using FieldFn = std::function<double(std::span<const double>)>;

// Interaction kernel of the product form xi(x, z) = state_factor(x) * atom_factor(z).
// A system with this structure can average atom_factor once per cloud per
// sub-step (O(N)) instead of evaluating all pairs (O(N^2)); results differ
// only by floating-point reassociation.
struct SeparableKernel {
  FieldFn state_factor;
  FieldFn atom_factor;
};

// Mean-field SDE dX = a(X, m1(X, mu)) dt + b(X, m2(X, mu)) dW, where
// m_j(x, mu) = integral of kernel_j(x, .) against mu. Immutable after
// construction; safe to share read-only across threads.
struct Model {
  int dim = 1;
  DriftFn drift;
  DiffusionFn diffusion;
  KernelFn kernel1;
  KernelFn kernel2;
  std::optional<SeparableKernel> separable1;
  std::optional<SeparableKernel> separable2;
  std::vector<double> x0;
  // Rows (0-based) whose realized noise is multiplied by the step size, so a
  // unit diffusion entry yields step * dW instead of dW on that row.
  std::vector<int> step_scaled_noise_rows;
  // Replicate-level initial condition; defaults to x0 when unset.
  std::function<std::vector<double>(const StreamKey&)> sample_initial;

  std::vector<double> initial_point(const StreamKey& key) const {
    return sample_initial ? sample_initial(key) : x0;
  }
};

// (1/N) sum_j kernel(x, X_j) over the particles of the measure.
// Throws std::invalid_argument on an empty measure.
double interaction_mean(const KernelFn& kernel, std::span<const double> x,
                        const EmpiricalMeasure& measure);

struct NeuronParams {
  double V0 = 0.0, sigma_V0 = 0.4;
  double a = 0.7, b = 0.8, c = 0.08;
  double I = 0.5, b_ext = 0.5;
  double w0 = 0.5, sigma_w0 = 0.4;
  double V_rev = 1.0, a_r = 1.0, a_d = 1.0, T_max = 1.0, lambda = 0.2;
  double y0 = 0.3, sigma_y0 = 0.05;
  double J = 1.0, b_J = 0.2, V_T = 2.0;
  double Gamma = 0.1, Lambda = 0.5;
};

// Scalar double-well dynamics dX = beta(-X^3 + X + k E[X]) dt + sigma dW.
Model curie_weiss(double beta, double k, double sigma, double x0);

// Scalar dX = -theta (X - kappa E[X]) dt + sigma dW; stationary law
// N(0, sigma^2 / (2 theta)) for |kappa| < 1.
Model mean_field_ou(double theta, double kappa, double sigma, double x0);

// Coupled maximum-likelihood system on (theta, x) in R^{1+d} for the
// Gaussian toy likelihood with observation vector y: theta follows the
// averaged score with step-scaled noise, x follows the posterior score with
// sqrt(2) noise. Starts from the origin.
Model mle_gaussian(std::vector<double> y);

// FitzHugh-Nagumo-type 3d neuron with mean-field synaptic input; the initial
// point is drawn per replicate from a diagonal Gaussian around (V0, w0, y0).
Model neuron3d(const NeuronParams& params = {});

}  // namespace mvub
