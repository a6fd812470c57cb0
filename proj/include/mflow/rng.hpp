#pragma once

// Counter-based random streams (Philox4x32-10). A stream is addressed by
// (seed, stream id, sample index); draws within it are numbered by a block
// counter, so any sample can be regenerated independently of thread layout.

#include <array>
#include <cstdint>

namespace mflow {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

  /// Uniform in (0, 1], 53-bit resolution.
  double uniform();
  double normal();

 private:
  void refill();

  PhiloxKey key_;
  PhiloxCounter base_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stream ids used by the library, so independent consumers never collide.
namespace streams {
inline constexpr std::uint64_t kGaussian = 1;
inline constexpr std::uint64_t kGaussianPair = 2;
inline constexpr std::uint64_t kFlowInit = 3;
inline constexpr std::uint64_t kFlowNoise = 4;
inline constexpr std::uint64_t kAudit = 5;
}  // namespace streams

}  // namespace mflow
