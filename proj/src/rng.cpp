#include "jamloc/rng.hpp"

#include <cmath>

namespace jamloc {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng Rng::for_stream(uint64_t seed, uint64_t stream_index) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream_index + 1)));
}

double Rng::uniform() {
  // 53-bit mantissa mapping, value in [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int lo, int hi) {
  const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  uint64_t v = static_cast<uint64_t>(uniform() * static_cast<double>(span));
  if (v >= span) v = span - 1;
  return lo + static_cast<int>(v);
}

double Rng::log_uniform(double lo, double hi) {
  return std::exp(uniform(std::log(lo), std::log(hi)));
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

double Rng::gamma_int(int shape) {
  double acc = 0.0;
  for (int i = 0; i < shape; ++i) acc -= std::log(1.0 - uniform());
  return acc;
}

double Rng::beta(int a, int b) {
  const double ga = gamma_int(a);
  const double gb = gamma_int(b);
  return ga / (ga + gb);
}

}  // namespace jamloc
