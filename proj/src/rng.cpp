#include "zominmax/rng.hpp"

#include <cmath>
#include <numbers>

namespace zominmax {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

}  // namespace

CounterRng::CounterRng(const StreamKey& key) {
  std::uint64_t h = splitmix64(key.seed);
  h = mix(h, key.phase);
  h = mix(h, key.iteration);
  h = mix(h, key.block);
  h = mix(h, key.sample);
  counter_ = h;
}

CounterRng::CounterRng(std::uint64_t seed) : counter_(splitmix64(seed)) {}

std::uint64_t CounterRng::next_u64() {
  counter_ += 0x9e3779b97f4a7c15ULL;
  return splitmix64(counter_);
}

double CounterRng::uniform() {
  // 53 random bits, shifted off zero so log() stays finite.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

}  // namespace zominmax
