#include "mvub/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mvub {

namespace {

double gauss_density(double u, double h) {
  static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const double z = u / h;
  return inv_sqrt_2pi / h * std::exp(-0.5 * z * z);
}

double simpson(double lo, double hi, double flo, double fmid, double fhi) {
  return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
}

double simpson_rec(const std::function<double(double)>& f, double lo, double mid, double hi,
                   double flo, double fmid, double fhi, double whole, double tol, int depth) {
  const double lmid = 0.5 * (lo + mid);
  const double rmid = 0.5 * (mid + hi);
  const double flmid = f(lmid);
  const double frmid = f(rmid);
  const double left = simpson(lo, mid, flo, flmid, fmid);
  const double right = simpson(mid, hi, fmid, frmid, fhi);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, lo, lmid, mid, flo, flmid, fmid, left, tol / 2.0, depth - 1) +
         simpson_rec(f, mid, rmid, hi, fmid, frmid, fhi, right, tol / 2.0, depth - 1);
}

}  // namespace

double kde_value(const SignedEmpiricalMeasure& measure, int component, double h, double x) {
  if (!(h > 0.0)) throw std::invalid_argument("kde: bandwidth must be positive");
  if (component < 0 || component >= measure.dim())
    throw std::invalid_argument("kde: component out of range");
  double acc = 0.0;
  for (std::size_t j = 0; j < measure.size(); ++j)
    acc += measure.weight(j) * gauss_density(x - measure.point(j)[component], h);
  return measure.scale() * acc;
}

DensityEstimate kde(const SignedEmpiricalMeasure& measure, int component, double h,
                    std::span<const double> grid) {
  DensityEstimate out;
  out.bandwidth = h;
  out.grid.assign(grid.begin(), grid.end());
  out.values.reserve(grid.size());
  for (double x : grid) out.values.push_back(kde_value(measure, component, h, x));
  return out;
}

double moment(const SignedEmpiricalMeasure& measure, int component, int k) {
  if (component < 0 || component >= measure.dim())
    throw std::invalid_argument("moment: component out of range");
  if (k < 1) throw std::invalid_argument("moment: order must be >= 1");
  double acc = 0.0;
  for (std::size_t j = 0; j < measure.size(); ++j) {
    const double x = measure.point(j)[component];
    double p = x;
    for (int i = 1; i < k; ++i) p *= x;
    acc += measure.weight(j) * p;
  }
  return measure.scale() * acc;
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b, int order) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty sample");
  if (order != 1 && order != 2) throw std::invalid_argument("wasserstein_1d: order must be 1 or 2");

  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  // Walk the merged quantile breakpoints i/n and j/m; each segment couples a
  // constant pair (sa[i], sb[j]) with the segment's probability mass.
  const std::size_t n = sa.size(), m = sb.size();
  std::size_t i = 0, j = 0;
  double pos = 0.0, cost = 0.0;
  while (i < n && j < m) {
    const double qa = static_cast<double>(i + 1) / static_cast<double>(n);
    const double qb = static_cast<double>(j + 1) / static_cast<double>(m);
    const double next = std::min(qa, qb);
    const double diff = std::abs(sa[i] - sb[j]);
    cost += (next - pos) * (order == 1 ? diff : diff * diff);
    pos = next;
    if (qa <= next) ++i;
    if (qb <= next) ++j;
  }
  return order == 1 ? cost : std::sqrt(cost);
}

SignedEmpiricalMeasure pooled_measure(const std::vector<ReplicateResult>& replicates) {
  if (replicates.empty()) throw std::invalid_argument("pooled_measure: no replicates");
  const int dim = replicates.front().measure.dim();
  SignedEmpiricalMeasure pooled(dim, 1.0);
  const double inv_m = 1.0 / static_cast<double>(replicates.size());
  std::size_t total = 0;
  for (const auto& r : replicates) total += r.measure.size();
  pooled.reserve(total);
  for (const auto& r : replicates) {
    const double factor = r.measure.scale() * inv_m;
    for (std::size_t j = 0; j < r.measure.size(); ++j)
      pooled.add_atom(r.measure.point(j), factor * r.measure.weight(j));
  }
  return pooled;
}

MseResult mse_study(const Model& model, const EstimatorConfig& config, const Phi& phi,
                    double truth, int m, int runs, std::uint64_t master_seed, int threads,
                    std::uint64_t id_offset) {
  if (runs < 2) throw std::invalid_argument("mse_study: need at least 2 runs");
  MseResult out;
  out.estimates.reserve(runs);
  for (int k = 0; k < runs; ++k) {
    const auto res = estimate(model, config, phi, m, master_seed, threads,
                              id_offset + static_cast<std::uint64_t>(k) * m);
    out.estimates.push_back(res.mean);
  }
  double acc = 0.0;
  for (double est : out.estimates) acc += (est - truth) * (est - truth);
  out.mse = acc / runs;
  return out;
}

std::vector<std::pair<int, double>> contraction_diagnostic(const Model& model, int level,
                                                           int particles, int t_max,
                                                           double x0_a, double x0_b,
                                                           std::uint64_t master_seed) {
  if (model.dim != 1)
    throw std::invalid_argument("contraction_diagnostic: scalar models only");
  if (particles < 1 || t_max < 1)
    throw std::invalid_argument("contraction_diagnostic: bad arguments");

  const LevelParams lvl = LevelParams::at(level);
  const double pa = x0_a, pb = x0_b;
  EmpiricalMeasure a = EmpiricalMeasure::filled(particles, std::span<const double>(&pa, 1));
  EmpiricalMeasure b = EmpiricalMeasure::filled(particles, std::span<const double>(&pb, 1));

  const ReplicateKey key{master_seed, 0};
  std::vector<std::pair<int, double>> out;
  out.reserve(t_max);
  for (int t = 1; t <= t_max; ++t) {
    const StreamKey stream = key.stream(StreamRole::ParticleFine, t);
    a = propagate_block(model, lvl, a, stream).end_state;
    b = propagate_block(model, lvl, b, stream).end_state;
    out.emplace_back(t, wasserstein_1d(a.data(), b.data(), 2));
  }
  return out;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_slope: need two equal-length samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double tol) {
  if (!(hi > lo)) throw std::invalid_argument("adaptive_simpson: bad interval");
  // A fixed initial subdivision keeps narrow features from being missed when
  // the coarse probes of a panel happen to agree.
  const int panels = 24;
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = lo + i * width;
    const double b = i + 1 == panels ? hi : a + width;
    const double mid = 0.5 * (a + b);
    const double fa = f(a), fmid = f(mid), fb = f(b);
    const double whole = simpson(a, b, fa, fmid, fb);
    total += simpson_rec(f, a, mid, b, fa, fmid, fb, whole, tol / panels, 44);
  }
  return total;
}

DoubleWellStationary curie_weiss_stationary(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("curie_weiss_stationary: beta must be positive");
  const auto unnormalized = [beta](double x) {
    return std::exp(-beta * x * x * x * x / 2.0 + beta * x * x);
  };
  const double z = adaptive_simpson(unnormalized, -10.0, 10.0, 1e-10);
  const double m2 = adaptive_simpson([&](double x) { return x * x * unnormalized(x); },
                                     -10.0, 10.0, 1e-10);
  return {1.0 / z, m2 / z};
}

}  // namespace mvub
