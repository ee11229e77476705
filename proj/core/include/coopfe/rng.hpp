#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace coopfe {

// Counter-based pseudo-random generator built on the SplitMix64 output
// finaliser.  The k-th output is a pure function of (seed, k):
//
//   out_k = finalize(seed + (k + 1) * 0x9e3779b97f4a7c15)
//
// which makes streams reproducible bit-for-bit across platforms and lets
// experiment drivers jump to independent substreams without sharing state.
// std::mt19937 would also be portable, but the std distributions on top of
// it are not (libstdc++ and libc++ disagree), so uniform and gaussian
// sampling are implemented here by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  // SplitMix64 finaliser; bijective on 64-bit values.
  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() {
    counter_ += 1;
    return mix64(seed_ + counter_ * 0x9e3779b97f4a7c15ull);
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).  The modulo bias is below n / 2^64, which is
  // negligible for the n used here (permutation lengths, grid sizes).
  std::uint64_t uniform_below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller.  Generates values in pairs and caches
  // the spare so consecutive calls stay cheap and deterministic.
  double gaussian();

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Identity permutation of size n shuffled in place.
  std::vector<int> permutation(int n);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives the seed for one experiment cell from a master seed, a textual
// stream tag (e.g. "vicsek.sweep") and a cell index.  Distinct cells under
// the same tag are guaranteed distinct: the map cell -> seed is injective
// because cell * odd-constant is injective mod 2^64 and mix64 is bijective.
// Distinct tags collide only if their 64-bit FNV-1a hashes collide.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t cell);

}  // namespace coopfe
