#include "mvub/estimator.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace mvub {

namespace {

double weight_at(int value, PmfWeights family, bool squared_log) {
  const double base = std::ldexp(1.0, -value) * (value + 1);
  if (family == PmfWeights::NaturalLog) {
    const double lg = std::log(static_cast<double>(value + 2));
    return base * (squared_log ? lg * lg : lg);
  }
  const double lg = std::log2(static_cast<double>(value + 2));
  return base * lg * lg;
}

std::vector<std::pair<int, double>> normalized_pmf(int lo, int hi, PmfWeights family,
                                                   bool squared_log) {
  std::vector<std::pair<int, double>> pmf;
  pmf.reserve(hi - lo + 1);
  double total = 0.0;
  for (int v = lo; v <= hi; ++v) {
    const double w = weight_at(v, family, squared_log);
    pmf.emplace_back(v, w);
    total += w;
  }
  for (auto& [v, p] : pmf) p /= total;
  return pmf;
}

std::vector<double> probabilities(const std::vector<std::pair<int, double>>& pmf) {
  std::vector<double> p;
  p.reserve(pmf.size());
  for (const auto& e : pmf) p.push_back(e.second);
  return p;
}

// Prefix-average telescope weight of time t among I_P atoms: 1/I_P on the
// whole path minus 1/I_{P-1} on the first half. Both horizons are powers of
// two, so the difference is exactly -2^-P.
double atom_weight(int horizon, int t) {
  if (horizon == 0) return 1.0;
  const double half = std::ldexp(1.0, -horizon);
  return t <= (1 << (horizon - 1)) ? -half : half;
}

}  // namespace

void EstimatorConfig::validate() const {
  if (l_star < 0) throw std::invalid_argument("estimator: l_star must be >= 0");
  if (l_max < l_star) throw std::invalid_argument("estimator: l_max must be >= l_star");
  if (l_max > 30) throw std::invalid_argument("estimator: l_max too large");
  if (p_max < 0 || p_max > 30) throw std::invalid_argument("estimator: p_max out of range");
  if (n_base < 1) throw std::invalid_argument("estimator: n_base must be >= 1");
}

std::vector<std::pair<int, double>> pmf_level(const EstimatorConfig& config) {
  config.validate();
  return normalized_pmf(config.l_star, config.l_max, config.pmf_weights, false);
}

std::vector<std::pair<int, double>> pmf_horizon(const EstimatorConfig& config) {
  config.validate();
  return normalized_pmf(0, config.p_max, config.pmf_weights, true);
}

int draw_level(const EstimatorConfig& config, const ReplicateKey& key) {
  const auto probs = probabilities(pmf_level(config));
  return config.l_star +
         static_cast<int>(categorical(key.stream(StreamRole::LevelDraw), probs));
}

int draw_horizon(const EstimatorConfig& config, const ReplicateKey& key) {
  const auto probs = probabilities(pmf_horizon(config));
  return static_cast<int>(categorical(key.stream(StreamRole::TimeDraw), probs));
}

std::vector<double> kernel_step(const Model& model, const LawBlock& block,
                                std::span<const double> u, const StreamKey& key) {
  const auto increments =
      gaussian_increments(key, static_cast<std::size_t>(block.level.steps_per_unit),
                          static_cast<std::size_t>(model.dim), block.level.delta);
  return chain_advance(model, block, u, increments, key.counter);
}

std::pair<std::vector<double>, std::vector<double>> kernel_step_coupled(
    const Model& model, const LawBlock& fine_block, const LawBlock& coarse_block,
    std::span<const double> u, std::span<const double> u_bar, const StreamKey& key) {
  if (fine_block.level.level != coarse_block.level.level + 1)
    throw std::invalid_argument("kernel_step_coupled: blocks are not consecutive levels");
  const auto fine_inc =
      gaussian_increments(key, static_cast<std::size_t>(fine_block.level.steps_per_unit),
                          static_cast<std::size_t>(model.dim), fine_block.level.delta);
  auto fine_next = chain_advance(model, fine_block, u, fine_inc, key.counter);
  const auto coarse_inc = coarsen(fine_inc, static_cast<std::size_t>(model.dim));
  auto coarse_next = chain_advance(model, coarse_block, u_bar, coarse_inc, key.counter);
  return {std::move(fine_next), std::move(coarse_next)};
}

ReplicateResult xi_base_at(const Model& model, const EstimatorConfig& config, int horizon,
                           const ReplicateKey& key) {
  config.validate();
  if (horizon < 0 || horizon > config.p_max)
    throw std::invalid_argument("xi_base: horizon out of range");
  const int blocks = 1 << horizon;
  const LevelParams level = LevelParams::at(config.l_star);
  const double p_horizon = pmf_horizon(config)[horizon].second;

  const auto x0 = model.initial_point(key.stream(StreamRole::InitDraw));
  EmpiricalMeasure state = EmpiricalMeasure::filled(config.particles_at(config.l_star), x0);
  std::vector<double> u = x0;

  ReplicateResult result;
  result.level = config.l_star;
  result.horizon = horizon;
  result.cost_units = replicate_cost_units(config, config.l_star, horizon);
  result.measure = SignedEmpiricalMeasure(model.dim, 1.0 / p_horizon);
  result.measure.reserve(blocks);

  try {
    for (int t = 1; t <= blocks; ++t) {
      auto block = propagate_block(model, level, state,
                                   key.stream(StreamRole::ParticleFine, t));
      state = std::move(block.end_state);
      u = kernel_step(model, block.law, u, key.stream(StreamRole::Chain, t));
      result.measure.add_atom(u, atom_weight(horizon, t));
    }
  } catch (BlowUpError& e) {
    e.annotate("(L=" + std::to_string(config.l_star) + ", P=" + std::to_string(horizon) + ")");
    throw;
  }
  return result;
}

ReplicateResult xi_base(const Model& model, const EstimatorConfig& config,
                        const ReplicateKey& key) {
  return xi_base_at(model, config, draw_horizon(config, key), key);
}

ReplicateResult xi_increment_at(const Model& model, const EstimatorConfig& config, int level,
                                int horizon, const ReplicateKey& key) {
  config.validate();
  if (level <= config.l_star || level > config.l_max)
    throw std::invalid_argument("xi_increment: level out of range");
  if (horizon < 0 || horizon > config.p_max)
    throw std::invalid_argument("xi_increment: horizon out of range");
  const int blocks = 1 << horizon;
  const double p_horizon = pmf_horizon(config)[horizon].second;

  const auto x0 = model.initial_point(key.stream(StreamRole::InitDraw));
  EmpiricalMeasure fine = EmpiricalMeasure::filled(config.particles_at(level), x0);
  EmpiricalMeasure coarse = EmpiricalMeasure::filled(config.particles_at(level - 1), x0);
  std::vector<double> u = x0;
  std::vector<double> u_bar = x0;

  ReplicateResult result;
  result.level = level;
  result.horizon = horizon;
  result.cost_units = replicate_cost_units(config, level, horizon);
  result.measure = SignedEmpiricalMeasure(model.dim, 1.0 / p_horizon);
  result.measure.reserve(2 * static_cast<std::size_t>(blocks));

  try {
    for (int t = 1; t <= blocks; ++t) {
      auto pair = propagate_block_coupled(model, level, fine, coarse,
                                          key.stream(StreamRole::ParticleFine, t));
      fine = std::move(pair.fine.end_state);
      coarse = std::move(pair.coarse.end_state);
      auto [u_next, u_bar_next] =
          kernel_step_coupled(model, pair.fine.law, pair.coarse.law, u, u_bar,
                              key.stream(StreamRole::Chain, t));
      u = std::move(u_next);
      u_bar = std::move(u_bar_next);
      const double w = atom_weight(horizon, t);
      result.measure.add_atom(u, w);
      result.measure.add_atom(u_bar, -w);
    }
  } catch (BlowUpError& e) {
    e.annotate("(L=" + std::to_string(level) + ", P=" + std::to_string(horizon) + ")");
    throw;
  }
  return result;
}

ReplicateResult xi_increment(const Model& model, const EstimatorConfig& config, int level,
                             const ReplicateKey& key) {
  return xi_increment_at(model, config, level, draw_horizon(config, key), key);
}

ReplicateResult unbiased_single_at(const Model& model, const EstimatorConfig& config,
                                   int level, int horizon, const ReplicateKey& key) {
  ReplicateResult result = (level == config.l_star)
                               ? xi_base_at(model, config, horizon, key)
                               : xi_increment_at(model, config, level, horizon, key);
  const double p_level = pmf_level(config)[level - config.l_star].second;
  result.measure.rescale(1.0 / p_level);
  return result;
}

ReplicateResult unbiased_single(const Model& model, const EstimatorConfig& config,
                                const ReplicateKey& key) {
  const int level = draw_level(config, key);
  const int horizon = draw_horizon(config, key);
  return unbiased_single_at(model, config, level, horizon, key);
}

double replicate_cost_units(const EstimatorConfig& config, int level, int horizon) {
  const double n_fine = config.particles_at(level);
  const double squares =
      n_fine * n_fine + (level > config.l_star
                             ? static_cast<double>(config.particles_at(level - 1)) *
                                   config.particles_at(level - 1)
                             : 0.0);
  return std::ldexp(1.0, horizon) * std::ldexp(1.0, level) * squares;
}

double expected_cost(const EstimatorConfig& config) {
  const auto levels = pmf_level(config);
  const auto horizons = pmf_horizon(config);
  double total = 0.0;
  for (const auto& [l, pl] : levels)
    for (const auto& [p, pp] : horizons)
      total += pl * pp * replicate_cost_units(config, l, p);
  return total;
}

std::vector<ReplicateResult> run_replicates(const Model& model, const EstimatorConfig& config,
                                            int m, std::uint64_t master_seed, int threads,
                                            std::uint64_t id_offset) {
  if (m < 1) throw std::invalid_argument("run_replicates: m must be >= 1");
  config.validate();

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers > m) workers = m;

  std::vector<ReplicateResult> results(static_cast<std::size_t>(m));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  const auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const int i = next.fetch_add(1);
      if (i >= m) break;
      try {
        results[i] = unbiased_single(model, config, {master_seed, id_offset + i});
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) {
          error = std::make_exception_ptr(ReplicateError(id_offset + i, e.what()));
          failed.store(true);
        }
        break;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

EstimateResult summarize(const std::vector<ReplicateResult>& replicates, const Phi& phi) {
  EstimateResult out;
  out.values.reserve(replicates.size());
  for (const auto& r : replicates) {
    out.values.push_back(r.measure.evaluate(phi));
    out.total_cost_units += r.cost_units;
  }
  const std::size_t m = out.values.size();
  double sum = 0.0;
  for (double v : out.values) sum += v;
  out.mean = sum / static_cast<double>(m);
  if (m > 1) {
    double ss = 0.0;
    for (double v : out.values) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / (static_cast<double>(m - 1) * static_cast<double>(m)));
  }
  return out;
}

EstimateResult estimate(const Model& model, const EstimatorConfig& config, const Phi& phi,
                        int m, std::uint64_t master_seed, int threads,
                        std::uint64_t id_offset) {
  return summarize(run_replicates(model, config, m, master_seed, threads, id_offset), phi);
}

}  // namespace mvub
