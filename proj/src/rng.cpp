#include "mvub/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mvub {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

struct Block {
  std::uint32_t w[4];
};

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Philox4x32-10 (Salmon et al. 2011), fixed 10 rounds.
Block philox(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
             std::uint32_t c3, std::uint32_t k0, std::uint32_t k1) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mul_hi_lo(kPhiloxM0, c0, hi0, lo0);
    mul_hi_lo(kPhiloxM1, c2, hi1, lo1);
    const std::uint32_t n0 = hi1 ^ c1 ^ k0;
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c3 ^ k1;
    const std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return Block{{c0, c1, c2, c3}};
}

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_hash(const StreamKey& key) {
  std::uint64_t h = splitmix64(key.master_seed);
  h = splitmix64(h ^ key.replicate_id);
  h = splitmix64(h ^ static_cast<std::uint64_t>(key.role));
  return h;
}

inline std::uint64_t join64(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53

// u64 -> (0,1]; never 0, so log() below is safe.
inline double to_unit_open(std::uint64_t x) {
  return static_cast<double>((x >> 11) + 1) * kInv53;
}

// u64 -> [0,1)
inline double to_unit_half_open(std::uint64_t x) {
  return static_cast<double>(x >> 11) * kInv53;
}

}  // namespace

GaussianStream::GaussianStream(const StreamKey& key) {
  const std::uint64_t h = stream_hash(key);
  k0_ = static_cast<std::uint32_t>(h);
  k1_ = static_cast<std::uint32_t>(h >> 32);
  stream_counter_ = key.counter;
}

void GaussianStream::refill() {
  const Block b = philox(static_cast<std::uint32_t>(stream_counter_),
                         static_cast<std::uint32_t>(stream_counter_ >> 32),
                         static_cast<std::uint32_t>(pair_index_),
                         static_cast<std::uint32_t>(pair_index_ >> 32), k0_, k1_);
  ++pair_index_;
  const double u1 = to_unit_open(join64(b.w[0], b.w[1]));
  const double u2 = to_unit_half_open(join64(b.w[2], b.w[3]));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  cache_[0] = r * std::cos(a);
  cache_[1] = r * std::sin(a);
  cached_ = 2;
}

double GaussianStream::next() {
  if (cached_ == 0) refill();
  return cache_[2 - cached_--];
}

void GaussianStream::fill(std::span<double> out) {
  for (double& v : out) v = next();
}

std::vector<double> gaussian_increments(const StreamKey& key, std::size_t count,
                                        std::size_t dim, double delta) {
  if (!(delta > 0.0))
    throw std::invalid_argument("gaussian_increments: delta must be positive");
  if (count < 1 || dim < 1)
    throw std::invalid_argument("gaussian_increments: empty request");
  std::vector<double> out(count * dim);
  GaussianStream stream(key);
  stream.fill(out);
  const double s = std::sqrt(delta);
  for (double& v : out) v *= s;
  return out;
}

std::vector<double> coarsen(std::span<const double> fine, std::size_t dim) {
  if (dim < 1) throw std::invalid_argument("coarsen: dim must be >= 1");
  if (fine.size() % dim != 0)
    throw std::invalid_argument("coarsen: input is not a whole number of vectors");
  const std::size_t count = fine.size() / dim;
  if (count % 2 != 0)
    throw std::invalid_argument("coarsen: odd number of increments");
  std::vector<double> out(fine.size() / 2);
  for (std::size_t k = 0; k < count / 2; ++k)
    for (std::size_t c = 0; c < dim; ++c)
      out[k * dim + c] = fine[(2 * k) * dim + c] + fine[(2 * k + 1) * dim + c];
  return out;
}

std::size_t categorical(const StreamKey& key, std::span<const double> pmf) {
  if (pmf.empty()) throw std::invalid_argument("categorical: empty pmf");
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0)) throw std::invalid_argument("categorical: negative pmf entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("categorical: pmf does not sum to 1");
  const double u = uniform01(key);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pmf.size(); ++i) {
    acc += pmf[i];
    if (u < acc) return i;
  }
  return pmf.size() - 1;
}

double uniform01(const StreamKey& key) {
  const std::uint64_t h = stream_hash(key);
  const Block b = philox(static_cast<std::uint32_t>(key.counter),
                         static_cast<std::uint32_t>(key.counter >> 32), 0, 0,
                         static_cast<std::uint32_t>(h),
                         static_cast<std::uint32_t>(h >> 32));
  return to_unit_half_open(join64(b.w[0], b.w[1]));
}

}  // namespace mvub
