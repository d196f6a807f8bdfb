#pragma once

#include <cstdint>

namespace zominmax {

/// Identifies one independent random stream. Two generators built from equal
/// keys emit identical sequences, regardless of what other streams were used.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t phase = 0;
  std::uint64_t iteration = 0;
  std::uint32_t block = 0;
  std::uint64_t sample = 0;
};

/// Counter-based generator: the key is hashed into a starting counter and the
/// stream is splitmix64 over successive counter values.
class CounterRng {
 public:
  explicit CounterRng(const StreamKey& key);
  explicit CounterRng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t counter_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace zominmax
