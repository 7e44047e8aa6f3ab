#include "protomol/rng.hpp"

#include <cmath>

namespace protomol {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t stream_id(uint64_t seed, std::string_view purpose) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : purpose) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return splitmix64(h + splitmix64(seed));
}

Rng::Rng(uint64_t seed, std::string_view purpose)
    : engine_(stream_id(seed, purpose)) {}

double Rng::uniform() {
  // 53 bits of mantissa for a uniform double in [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal(double stddev) {
  if (have_spare_) {
    have_spare_ = false;
    return spare_ * stddev;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta) * stddev;
}

uint64_t Rng::below(uint64_t n) {
  // Rejection sampling keeps the draw unbiased and deterministic.
  const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
  uint64_t x = 0;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace protomol
