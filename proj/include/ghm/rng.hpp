#pragma once

#include <cstdint>

namespace ghm {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Key for an independent substream, e.g. one per trial.
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t stream)
{
    return mix64(key ^ mix64(stream + 0x9e3779b97f4a7c15ULL));
}

/// Counter-based value: a pure function of (key, counter).
constexpr std::uint64_t counter_hash(std::uint64_t key, std::uint64_t counter)
{
    return mix64(key + (counter + 1) * 0x9e3779b97f4a7c15ULL);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits)
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based random stream. Splitting yields independent streams whose
/// output does not depend on how many draws other streams made, so trials
/// stay reproducible however they are scheduled.
class Rng
{
  public:
    explicit constexpr Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(derive_key(seed, stream))
    {
    }

    constexpr Rng split(std::uint64_t stream) const
    {
        Rng child(0);
        child.key_ = derive_key(key_, stream);
        return child;
    }

    constexpr std::uint64_t next_u64() { return counter_hash(key_, counter_++); }
    constexpr double uniform() { return to_unit(next_u64()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound), bound > 0; rejection keeps it unbiased.
    constexpr std::uint64_t below(std::uint64_t bound)
    {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % bound;
    }

    constexpr std::uint64_t key() const { return key_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace ghm
