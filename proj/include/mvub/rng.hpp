#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mvub {

// Which consumer a stream belongs to. Coarse particle systems and coarse
// chains never draw fresh noise; they reuse the fine streams by summing
// consecutive fine increments, hence ParticleCoarseShared is a marker only.
enum class StreamRole : std::uint32_t {
  ParticleFine = 1,
  ParticleCoarseShared = 2,
  Chain = 3,
  LevelDraw = 4,
  TimeDraw = 5,
  InitDraw = 6,
};

// Identifies one random stream. Distinct (master_seed, replicate_id, role,
// counter) tuples give statistically independent streams; identical keys
// reproduce identical output, in any order, on any thread.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate_id = 0;
  StreamRole role = StreamRole::ParticleFine;
  std::uint64_t counter = 0;

  StreamKey with_counter(std::uint64_t c) const {
    StreamKey k = *this;
    k.counter = c;
    return k;
  }
};

// Counter-based stream of N(0,1) variates: Philox4x32-10 keyed by a hash of
// (master_seed, replicate_id, role), with counter words taken from
// (key.counter, draw-pair index). Each 128-bit block is mapped to two
// Gaussians by the Box-Muller transform; this mapping is fixed, so draw n of
// a stream is a pure function of (key, n).
class GaussianStream {
 public:
  explicit GaussianStream(const StreamKey& key);

  double next();
  void fill(std::span<double> out);

 private:
  void refill();

  std::uint32_t k0_, k1_;
  std::uint64_t stream_counter_;
  std::uint64_t pair_index_ = 0;
  double cache_[2] = {0.0, 0.0};
  int cached_ = 0;  // values remaining in cache_
};

// count i.i.d. vectors in R^dim with law N(0, delta*I), flattened
// vector-major: out[k*dim + c]. Throws std::invalid_argument if delta <= 0.
std::vector<double> gaussian_increments(const StreamKey& key, std::size_t count,
                                        std::size_t dim, double delta);

// Pairwise sums of consecutive dim-vectors: out[k] = fine[2k] + fine[2k+1],
// componentwise, plain floating addition. Realizes a Brownian increment over
// a doubled step from the two fine increments it spans. Input must hold an
// even number of vectors.
std::vector<double> coarsen(std::span<const double> fine, std::size_t dim);

// One draw from a finite distribution: returns i with probability pmf[i].
// Entries must be >= 0 and sum to 1 within 1e-12.
std::size_t categorical(const StreamKey& key, std::span<const double> pmf);

// Single U[0,1) variate for the given key (first block of the stream).
double uniform01(const StreamKey& key);

}  // namespace mvub
