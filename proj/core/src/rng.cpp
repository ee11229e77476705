#include "coopfe/rng.hpp"

#include <cmath>
#include <numbers>

namespace coopfe {

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 must be strictly positive for the log; uniform() returns [0, 1), so
  // flip it to (0, 1].
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  shuffle(p);
  return p;
}

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t cell) {
  std::uint64_t h = Rng::mix64(master + 0x9e3779b97f4a7c15ull);
  h = Rng::mix64(h ^ fnv1a64(tag));
  return Rng::mix64(h + cell * 0xd1342543de82ef95ull);
}

}  // namespace coopfe
