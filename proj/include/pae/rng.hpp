#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pae {

/// Deterministic random stream. Distributions are implemented by hand on top
/// of std::mt19937_64 so that a given seed produces the same bits on every
/// platform and standard library.
///
/// All randomness in a run flows from one root seed. Independent streams are
/// derived with substream(name, index): the component name is FNV-1a hashed,
/// mixed with the root seed and index through SplitMix64, and the result
/// seeds a fresh engine. Adding a new named stream never perturbs existing
/// ones.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller (one spare value cached).
    double normal();

    double normal(double mean, double stddev);

    /// Uniform integer in [0, bound), rejection-sampled (unbiased). bound > 0.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Fair coin flip in {0, 1}.
    int bit();

    std::uint64_t root_seed() const { return root_; }

    /// Independent stream derived from this stream's root seed.
    Rng substream(std::string_view name, std::uint64_t index = 0) const;

  private:
    std::uint64_t root_;
    std::mt19937_64 engine_;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

/// Seed for the (name, index) substream of root. See Rng::substream.
std::uint64_t derive_stream_seed(std::uint64_t root, std::string_view name, std::uint64_t index);

}  // namespace pae
