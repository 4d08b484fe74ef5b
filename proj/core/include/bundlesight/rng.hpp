#pragma once

#include <cstdint>
#include <initializer_list>

namespace bundlesight {

// Stream tags used when deriving child seeds. Keeping them in one enum makes
// collisions between call sites impossible to create by accident.
enum class StreamTag : std::uint64_t {
  kPool = 0x01,        // shared per-iteration draw pool
  kOffset = 0x02,      // per-transaction pool scan offset
  kFallback = 0x03,    // per-transaction importance-sampling fallback
  kInstance = 0x04,    // censored-demand Monte-Carlo instance
  kCensorCount = 0x05, // negative-binomial N' draws
  kTruth = 0x06,       // ground-truth parameter generation
  kMenu = 0x07,        // menu / price generation
  kChoice = 0x08,      // valuation draws behind simulated choices
  kSplit = 0x09,       // train/test shuffles
  kChain = 0x0a,       // MH chain proposals/accepts
  kLikelihood = 0x0b,  // common-random-number likelihood pool
  kWeights = 0x0c,     // lab: region-probability pool under the truth
  kConditional = 0x0d, // lab: conditional-mean pool under the iterate
  kPredict = 0x0e,     // choice-probability prediction draws
  kInit = 0x0f,        // initialization perturbations (GMM split, MH start)
  kGeneric = 0x10,
};

// Counter-based seed derivation (splitmix64 over a tag path). Every consumer
// of randomness owns a stream keyed by (master seed, structural path), never
// by worker id or execution order, which is what makes results byte-identical
// at any thread count.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path);
inline std::uint64_t derive_seed(std::uint64_t master, StreamTag tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  return derive_seed(master, {static_cast<std::uint64_t>(tag), a, b, c});
}

// Deterministic uniform/normal generator. Normals come from the polar
// Box-Muller transform on top of xoshiro256++, so draws do not depend on any
// standard-library distribution implementation.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  double normal();                        // N(0, 1)
  // Uniform integer in [0, n), n > 0; rejection-free for our n << 2^64.
  std::uint64_t uniform_index(std::uint64_t n);
  // Bernoulli(p).
  bool bernoulli(double p);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bundlesight
