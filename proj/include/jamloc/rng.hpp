#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace jamloc {

/// Deterministic random source. std::mt19937_64 output is fully specified by
/// the standard, and all distributions here are implemented explicitly, so a
/// seed reproduces bit-identical streams on any platform. Dataset files record
/// the generator under the name kPrngName.
class Rng {
 public:
  static constexpr const char* kPrngName = "mt19937_64/splitmix64/box-muller";

  explicit Rng(uint64_t seed) : engine_(seed) {}

  /// Independent substream for (seed, stream_index), e.g. one per instance.
  static Rng for_stream(uint64_t seed, uint64_t stream_index);

  uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi);
  /// True with probability p.
  bool bernoulli(double p) { return uniform() < p; }
  /// log-uniform over [lo, hi], lo > 0.
  double log_uniform(double lo, double hi);

  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Beta variate for positive integer shape parameters.
  double beta(int a, int b);

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  double gamma_int(int shape);

  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 mixing step; used for stream derivation and hashing.
uint64_t splitmix64(uint64_t x);

}  // namespace jamloc
