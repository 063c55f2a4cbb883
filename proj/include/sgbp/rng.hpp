#pragma once

#include <cstdint>
#include <vector>

namespace sgbp::rng {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Counter-based draw: a pure function of (seed, stream, counter), so results do not
// depend on evaluation order. Streams keep independent draws from colliding.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t key = mix64(seed + kGamma * (stream + 1));
  return mix64(key + kGamma * (counter + 1));
}

inline double unit(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return static_cast<double>(derive(seed, stream, counter) >> 11) * 0x1.0p-53;
}

// Fixed stream ids used across the library.
enum : std::uint64_t {
  kStreamFields = 1,
  kStreamCouplings = 2,
  kStreamGraphEdges = 3,
  kStreamMessages = 4,
  kStreamSchedule = 5,
  kStreamGibbs = 6,
  kStreamModelSeeds = 7,
  kStreamInitSeeds = 8,
  kStreamRestarts = 9,
  kStreamSbp = 10,
  kStreamSpins = 11,
  kStreamGraphSeeds = 12,
};

// Sequential SplitMix64 stream for samplers that consume draws in order.
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix64(seed + kGamma * (stream + 1))) {}

  std::uint64_t next() {
    state_ += kGamma;
    return mix64(state_);
  }

  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Modulo bias is ~n / 2^64, irrelevant at the sizes used here.
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

template <typename T>
void shuffle(std::vector<T>& values, Stream& stream) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(stream.next_below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace sgbp::rng
