#pragma once

#include <array>
#include <cstdint>

namespace pdm {

/// Philox4x32-10 counter-based generator. A block is a pure function of
/// (key, counter), so any (seed, stream) pair addresses its own random
/// sequence without shared state; parallel schedules cannot perturb draws.
struct Philox4x32 {
  static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                            const std::array<std::uint32_t, 4>& counter);
};

/// Stream of standard normal deviates derived from (seed, stream_id) via
/// Philox blocks and Box-Muller. Same inputs always reproduce the same
/// sequence bit for bit on a given platform.
class NormalStream {
public:
  NormalStream(std::uint64_t seed, std::uint64_t stream_id);

  double next();

private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::array<double, 4> cache_{};
  int pos_ = 4;
};

}  // namespace pdm
