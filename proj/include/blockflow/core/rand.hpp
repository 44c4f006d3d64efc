#pragma once

#include <cstdint>
#include <string>

namespace blockflow::core {

// Deterministic generator (splitmix64). Used everywhere randomness is
// needed so that runs replay bit-identically across platforms; std library
// distributions are implementation-defined and would break that.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in [0, n)
  std::uint64_t bounded(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  // uniform integer in [lo, hi]
  long long range(long long lo, long long hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<long long>(bounded(static_cast<std::uint64_t>(hi - lo + 1)));
  }

private:
  std::uint64_t state_;
};

// Stable 64-bit hash of a string mixed with a seed (FNV-1a then splitmix
// finalizer). Drives per-entity deterministic draws, e.g. runtime jitter.
inline std::uint64_t stable_hash(const std::string& s, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ull ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  Rng finish(h);
  return finish.next();
}

}  // namespace blockflow::core
