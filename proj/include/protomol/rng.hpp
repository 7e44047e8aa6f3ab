#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace protomol {

// Deterministic random stream. All randomness in the project flows from a
// single run seed split into named streams: the stream id is a hash of the
// purpose string combined with the seed, so adding a new consumer never
// perturbs the draws of existing ones.
//
// std::mt19937_64 output is fully specified by the standard; the
// distributions here are hand-rolled because the standard library ones are
// implementation-defined and would break cross-toolchain reproducibility.
class Rng {
 public:
  Rng(uint64_t seed, std::string_view purpose);

  // Uniform in [0, 1).
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller, scaled to the given stddev.
  double normal(double stddev = 1.0);
  // Uniform integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n);

  // Fisher-Yates shuffle with draws from this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a over the purpose string, mixed with the seed via splitmix64.
uint64_t stream_id(uint64_t seed, std::string_view purpose);

}  // namespace protomol
