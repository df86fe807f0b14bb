#include "mvub/particle.hpp"

#include <cmath>
#include <utility>

namespace mvub {

namespace {

// Per-sub-step cloud averages of the separable kernel atom factors; empty
// optionals fall back to the O(N^2) pairwise mean.
struct MeanContext {
  const Model& model;
  double atom_mean1 = 0.0;
  double atom_mean2 = 0.0;

  void refresh(const EmpiricalMeasure& cloud) {
    if (model.separable1) atom_mean1 = average(model.separable1->atom_factor, cloud);
    if (model.separable2) atom_mean2 = average(model.separable2->atom_factor, cloud);
  }

  double mean1(std::span<const double> x, const EmpiricalMeasure& cloud) const {
    return model.separable1 ? model.separable1->state_factor(x) * atom_mean1
                            : interaction_mean(model.kernel1, x, cloud);
  }
  double mean2(std::span<const double> x, const EmpiricalMeasure& cloud) const {
    return model.separable2 ? model.separable2->state_factor(x) * atom_mean2
                            : interaction_mean(model.kernel2, x, cloud);
  }

 private:
  static double average(const FieldFn& f, const EmpiricalMeasure& cloud) {
    double acc = 0.0;
    const int n = cloud.size();
    for (int j = 0; j < n; ++j) acc += f(cloud.particle(j));
    return acc / n;
  }
};

// x_next = x + a(x, m1) * delta + S * (b(x, m2) * dw), with S scaling the
// step-scaled rows by delta. Returns false if any output is non-finite.
bool euler_step(const Model& model, double delta, std::span<const double> x, double m1,
                double m2, std::span<const double> dw, std::span<double> scratch_drift,
                std::span<double> scratch_bmat, std::span<double> out) {
  const int d = model.dim;
  model.drift(x, m1, scratch_drift);
  model.diffusion(x, m2, scratch_bmat);
  bool finite = true;
  for (int r = 0; r < d; ++r) {
    double noise = 0.0;
    for (int c = 0; c < d; ++c) noise += scratch_bmat[r * d + c] * dw[c];
    out[r] = noise;
  }
  for (int r : model.step_scaled_noise_rows) out[r] *= delta;
  for (int r = 0; r < d; ++r) {
    out[r] = x[r] + scratch_drift[r] * delta + out[r];
    finite = finite && std::isfinite(out[r]);
  }
  return finite;
}

}  // namespace

LevelParams LevelParams::at(int level) {
  if (level < 0) throw std::invalid_argument("level must be >= 0");
  if (level > 30) throw std::invalid_argument("level too large");
  LevelParams p;
  p.level = level;
  p.delta = std::ldexp(1.0, -level);
  p.steps_per_unit = 1 << level;
  return p;
}

BlowUpError::BlowUpError(std::uint64_t block_, int substep_, int particle_)
    : std::runtime_error("particle blow-up at (t=" + std::to_string(block_) +
                         ", k=" + std::to_string(substep_) +
                         ", i=" + std::to_string(particle_) + ")"),
      block(block_),
      substep(substep_),
      particle(particle_),
      message_(std::runtime_error::what()) {}

void BlowUpError::annotate(const std::string& extra) {
  message_ += " ";
  message_ += extra;
  static_cast<std::runtime_error&>(*this) = std::runtime_error(message_);
}

std::vector<double> particle_block_increments(const StreamKey& key, const LevelParams& level,
                                              int particle, int dim) {
  const std::uint64_t t = key.counter;
  const StreamKey sub = key.with_counter((t << 32) | static_cast<std::uint32_t>(particle));
  return gaussian_increments(sub, static_cast<std::size_t>(level.steps_per_unit),
                             static_cast<std::size_t>(dim), level.delta);
}

BlockResult advance_block(const Model& model, const LevelParams& level,
                          const EmpiricalMeasure& state, std::span<const double> increments,
                          std::uint64_t block_index) {
  const int n = state.size();
  const int d = model.dim;
  const int steps = level.steps_per_unit;
  if (n == 0) throw std::invalid_argument("advance_block: empty cloud");
  if (state.dim() != d) throw std::invalid_argument("advance_block: dimension mismatch");
  if (increments.size() != static_cast<std::size_t>(n) * steps * d)
    throw std::invalid_argument("advance_block: wrong increment count");

  BlockResult result;
  result.law.level = level;
  result.law.snapshots.reserve(steps);

  EmpiricalMeasure cur = state;
  EmpiricalMeasure next(n, d);
  std::vector<double> drift(d), bmat(static_cast<std::size_t>(d) * d);
  MeanContext means{model};

  for (int k = 0; k < steps; ++k) {
    result.law.snapshots.push_back(cur);
    means.refresh(cur);
    for (int i = 0; i < n; ++i) {
      const auto x = cur.particle(i);
      const double m1 = means.mean1(x, cur);
      const double m2 = means.mean2(x, cur);
      const std::size_t base = (static_cast<std::size_t>(i) * steps + k) * d;
      if (!euler_step(model, level.delta, x, m1, m2, increments.subspan(base, d), drift,
                      bmat, next.particle(i)))
        throw BlowUpError(block_index, k, i);
    }
    std::swap(cur, next);
  }
  result.end_state = std::move(cur);
  return result;
}

BlockResult propagate_block(const Model& model, const LevelParams& level,
                            const EmpiricalMeasure& state, const StreamKey& key) {
  const int n = state.size();
  const int d = model.dim;
  const int steps = level.steps_per_unit;
  std::vector<double> increments(static_cast<std::size_t>(n) * steps * d);
  for (int i = 0; i < n; ++i) {
    const auto inc = particle_block_increments(key, level, i, d);
    std::copy(inc.begin(), inc.end(),
              increments.begin() + static_cast<std::size_t>(i) * steps * d);
  }
  return advance_block(model, level, state, increments, key.counter);
}

CoupledBlockResult propagate_block_coupled(const Model& model, int level,
                                           const EmpiricalMeasure& fine_state,
                                           const EmpiricalMeasure& coarse_state,
                                           const StreamKey& key) {
  if (level < 1) throw std::invalid_argument("coupled propagation needs level >= 1");
  const int n_fine = fine_state.size();
  const int n_coarse = coarse_state.size();
  if (n_coarse >= n_fine)
    throw std::invalid_argument("coupled propagation needs N_coarse < N_fine");

  const LevelParams fine_level = LevelParams::at(level);
  const LevelParams coarse_level = LevelParams::at(level - 1);
  const int d = model.dim;
  const int steps = fine_level.steps_per_unit;

  std::vector<double> fine_inc(static_cast<std::size_t>(n_fine) * steps * d);
  std::vector<double> coarse_inc(static_cast<std::size_t>(n_coarse) * steps * d / 2);
  for (int i = 0; i < n_fine; ++i) {
    const auto inc = particle_block_increments(key, fine_level, i, d);
    std::copy(inc.begin(), inc.end(),
              fine_inc.begin() + static_cast<std::size_t>(i) * steps * d);
    if (i < n_coarse) {
      const auto summed = coarsen(inc, static_cast<std::size_t>(d));
      std::copy(summed.begin(), summed.end(),
                coarse_inc.begin() + static_cast<std::size_t>(i) * (steps / 2) * d);
    }
  }

  CoupledBlockResult result;
  result.fine = advance_block(model, fine_level, fine_state, fine_inc, key.counter);
  result.coarse = advance_block(model, coarse_level, coarse_state, coarse_inc, key.counter);
  return result;
}

std::vector<double> chain_advance(const Model& model, const LawBlock& block,
                                  std::span<const double> u, std::span<const double> increments,
                                  std::uint64_t block_index) {
  const int d = model.dim;
  const int steps = block.level.steps_per_unit;
  if (static_cast<int>(block.snapshots.size()) != steps)
    throw std::invalid_argument("chain_advance: malformed law block");
  if (increments.size() != static_cast<std::size_t>(steps) * d)
    throw std::invalid_argument("chain_advance: wrong increment count");

  std::vector<double> cur(u.begin(), u.end());
  std::vector<double> next(d), drift(d), bmat(static_cast<std::size_t>(d) * d);
  MeanContext means{model};
  for (int k = 0; k < steps; ++k) {
    const EmpiricalMeasure& snap = block.snapshots[k];
    means.refresh(snap);
    const double m1 = means.mean1(cur, snap);
    const double m2 = means.mean2(cur, snap);
    if (!euler_step(model, block.level.delta, cur, m1, m2,
                    increments.subspan(static_cast<std::size_t>(k) * d, d), drift, bmat,
                    next))
      throw BlowUpError(block_index, k, -1);
    std::swap(cur, next);
  }
  return cur;
}

}  // namespace mvub
