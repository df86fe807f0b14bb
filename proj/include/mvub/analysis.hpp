#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mvub/estimator.hpp"
#include "mvub/measure.hpp"

namespace mvub {

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
};

// Gaussian-kernel density value sum_j w_j K_h(x - x_j[component]) of the
// signed measure; negative values are reported as-is.
double kde_value(const SignedEmpiricalMeasure& measure, int component, double h, double x);

DensityEstimate kde(const SignedEmpiricalMeasure& measure, int component, double h,
                    std::span<const double> grid);

// sum_j w_j (x_j[component])^k
double moment(const SignedEmpiricalMeasure& measure, int component, int k);

// Exact order-p Wasserstein distance between two one-dimensional empirical
// laws via the sorted (quantile) coupling; unequal sample counts are handled
// by weighting, equivalent to duplicating atoms up to the common refinement.
double wasserstein_1d(std::span<const double> a, std::span<const double> b, int order);

// (1/M) average of M replicate measures: atoms concatenated in replicate
// order with the randomization scale folded into the weights.
SignedEmpiricalMeasure pooled_measure(const std::vector<ReplicateResult>& replicates);

struct MseResult {
  double mse = 0.0;
  std::vector<double> estimates;  // one per run
};

// `runs` independent estimates of m replicates each, on disjoint
// replicate-id ranges; MSE against the supplied truth.
MseResult mse_study(const Model& model, const EstimatorConfig& config, const Phi& phi,
                    double truth, int m, int runs, std::uint64_t master_seed, int threads,
                    std::uint64_t id_offset = 0);

// Synchronous coupling of two particle systems started from x0_a and x0_b
// with shared Brownian streams; reports the exact 1-d W2 between the clouds
// after each unit time 1..t_max. Scalar models only.
std::vector<std::pair<int, double>> contraction_diagnostic(const Model& model, int level,
                                                           int particles, int t_max,
                                                           double x0_a, double x0_b,
                                                           std::uint64_t master_seed);

// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double tol);

// Stationary law of the scalar double-well model by quadrature on [-10, 10]:
// density C exp(-beta x^4 / 2 + beta x^2), its normalizer C and second
// moment, resolved to ~1e-8.
struct DoubleWellStationary {
  double normalizer = 0.0;     // C
  double second_moment = 0.0;  // integral of x^2 against the density
};
DoubleWellStationary curie_weiss_stationary(double beta);

}  // namespace mvub
