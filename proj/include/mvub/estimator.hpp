#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mvub/model.hpp"
#include "mvub/particle.hpp"

namespace mvub {

// Weight family for the level/horizon distributions. NaturalLog is the
// experimental choice (P_L(l) ~ 2^-l (l+1) ln(l+2), P_P(p) ~ 2^-p (p+1)
// ln(p+2)^2); Log2Squared uses log2(.+2)^2 in both.
enum class PmfWeights { NaturalLog, Log2Squared };

struct EstimatorConfig {
  int l_star = 3;
  int l_max = 10;
  int p_max = 7;
  int n_base = 10;  // N_l = n_base * (l - l_star + 1)
  PmfWeights pmf_weights = PmfWeights::NaturalLog;

  int particles_at(int level) const { return n_base * (level - l_star + 1); }
  void validate() const;
};

// Normalized level distribution on {l_star..l_max} and horizon distribution
// on {0..p_max}; chain length for horizon index p is I_p = 2^p.
std::vector<std::pair<int, double>> pmf_level(const EstimatorConfig& config);
std::vector<std::pair<int, double>> pmf_horizon(const EstimatorConfig& config);

// Streams of one estimator replicate. Every random quantity of the
// replicate is a pure function of (master_seed, replicate_id), so replicates
// can run in any order or concurrently with identical results.
struct ReplicateKey {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate_id = 0;

  StreamKey stream(StreamRole role, std::uint64_t counter = 0) const {
    return StreamKey{master_seed, replicate_id, role, counter};
  }
};

struct ReplicateResult {
  SignedEmpiricalMeasure measure;
  int level = 0;
  int horizon = 0;
  double cost_units = 0.0;
};

int draw_level(const EstimatorConfig& config, const ReplicateKey& key);
int draw_horizon(const EstimatorConfig& config, const ReplicateKey& key);

// Unit-time transition of the plugged-law chain: 2^level Euler sub-steps
// from u, feeding snapshot k of the block into the interaction means at
// sub-step k, with fresh increments from the Chain stream (key.counter is
// the block index).
std::vector<double> kernel_step(const Model& model, const LawBlock& block,
                                std::span<const double> u, const StreamKey& key);

// Coupled chain transition: the fine chain advances exactly as kernel_step
// at the fine level; the coarse chain consumes the pairwise-summed fine
// increments against the coarse block.
std::pair<std::vector<double>, std::vector<double>> kernel_step_coupled(
    const Model& model, const LawBlock& fine_block, const LawBlock& coarse_block,
    std::span<const double> u, std::span<const double> u_bar, const StreamKey& key);

// Base-level estimator term: runs the level-l_star particle system for
// I_horizon unit blocks, drives the chain through them, and returns the
// signed measure of the prefix-average difference
// (1/I_P) sum_{t<=I_P} - (1/I_{P-1}) sum_{t<=I_{P-1}} over the same path,
// with the 1/P_P(horizon) factor kept in the measure scale.
ReplicateResult xi_base_at(const Model& model, const EstimatorConfig& config, int horizon,
                           const ReplicateKey& key);
ReplicateResult xi_base(const Model& model, const EstimatorConfig& config,
                        const ReplicateKey& key);

// Level-increment term for l_star < level <= l_max: coupled particle systems
// with (N_level, N_level-1) particles and coupled chains; fine atoms carry
// the prefix-average weights, coarse atoms their negation, interleaved.
ReplicateResult xi_increment_at(const Model& model, const EstimatorConfig& config, int level,
                                int horizon, const ReplicateKey& key);
ReplicateResult xi_increment(const Model& model, const EstimatorConfig& config, int level,
                             const ReplicateKey& key);

// Single-term randomized estimator: level L from the level pmf, then the
// matching xi term rescaled by 1/P_L(L).
ReplicateResult unbiased_single_at(const Model& model, const EstimatorConfig& config,
                                   int level, int horizon, const ReplicateKey& key);
ReplicateResult unbiased_single(const Model& model, const EstimatorConfig& config,
                                const ReplicateKey& key);

// Abstract cost of one replicate at the given (level, horizon):
// I_p * 2^l * (N_l^2 + N_{l-1}^2 [level > l_star]).
double replicate_cost_units(const EstimatorConfig& config, int level, int horizon);
// Expectation of the above under the two pmfs.
double expected_cost(const EstimatorConfig& config);

// Simulation failure inside one replicate, carrying the replicate id.
class ReplicateError : public std::runtime_error {
 public:
  ReplicateError(std::uint64_t id, const std::string& what)
      : std::runtime_error("replicate " + std::to_string(id) + ": " + what),
        replicate_id(id) {}
  std::uint64_t replicate_id;
};

using Phi = std::function<double(std::span<const double>)>;

struct EstimateResult {
  double mean = 0.0;
  double std_error = 0.0;
  double total_cost_units = 0.0;
  std::vector<double> values;  // per replicate, in replicate-id order
};

// M independent replicates, replicate i keyed by (master_seed,
// id_offset + i). Work is farmed across `threads` workers (0 = hardware
// count); results are assembled in id order so the output is independent of
// scheduling. A blow-up in any replicate aborts with the replicate id in the
// message.
std::vector<ReplicateResult> run_replicates(const Model& model, const EstimatorConfig& config,
                                            int m, std::uint64_t master_seed, int threads,
                                            std::uint64_t id_offset = 0);

EstimateResult estimate(const Model& model, const EstimatorConfig& config, const Phi& phi,
                        int m, std::uint64_t master_seed, int threads,
                        std::uint64_t id_offset = 0);

EstimateResult summarize(const std::vector<ReplicateResult>& replicates, const Phi& phi);

}  // namespace mvub
