#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvub/measure.hpp"
#include "mvub/model.hpp"

namespace mvub {

// Dyadic time grid: step 2^-level, 2^level sub-steps per unit of time.
struct LevelParams {
  int level = 0;
  double delta = 1.0;
  int steps_per_unit = 1;

  static LevelParams at(int level);
};

// The empirical laws of one unit-time block: snapshots[k] is the cloud
// before sub-step k, i.e. at time t-1+k*delta. The time-t cloud equals
// snapshot 0 of the following block.
struct LawBlock {
  LevelParams level;
  std::vector<EmpiricalMeasure> snapshots;
};

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(std::uint64_t block, int substep, int particle);

  std::uint64_t block;  // unit-time index t
  int substep;          // sub-step k within the block
  int particle;         // particle index, -1 for the plugged-law chain

  void annotate(const std::string& extra);

 private:
  std::string message_;
};

struct BlockResult {
  LawBlock law;
  EmpiricalMeasure end_state;
};

struct CoupledBlockResult {
  BlockResult fine;
  BlockResult coarse;
};

// Stream layout: the increments of particle i over block t at a given level
// come from key.with_counter((t << 32) | i) with role ParticleFine, one
// vector of dim Gaussians per sub-step. Tests and the coupled propagator
// rely on this contract; key.counter below carries the block index t.
std::vector<double> particle_block_increments(const StreamKey& key, const LevelParams& level,
                                              int particle, int dim);

// One unit-time Euler block for all N particles with caller-supplied
// increments laid out particle-major: increments[(i*steps + k)*dim + c].
// Interaction means are recomputed from the current cloud at every sub-step.
BlockResult advance_block(const Model& model, const LevelParams& level,
                          const EmpiricalMeasure& state, std::span<const double> increments,
                          std::uint64_t block_index);

// As advance_block, drawing the increments from the stream contract above.
BlockResult propagate_block(const Model& model, const LevelParams& level,
                            const EmpiricalMeasure& state, const StreamKey& key);

// Synchronously coupled pair of blocks: the fine system at `level` advances
// exactly as propagate_block would (bit-identical given the same key); the
// coarse system at level-1 reuses the fine increments of particles
// i < N_coarse, pairwise summed per coarse sub-step.
CoupledBlockResult propagate_block_coupled(const Model& model, int level,
                                           const EmpiricalMeasure& fine_state,
                                           const EmpiricalMeasure& coarse_state,
                                           const StreamKey& key);

// Single path driven by the recorded laws of a block: sub-step k plugs
// snapshots[k] into both interaction means. increments holds steps*dim
// values; particle index -1 is reported on blow-up.
std::vector<double> chain_advance(const Model& model, const LawBlock& block,
                                  std::span<const double> u, std::span<const double> increments,
                                  std::uint64_t block_index);

}  // namespace mvub
