#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Core>

namespace otm {

/// Deterministic counter-based random stream.
///
/// The k-th output is mix64(key + k * GAMMA) where mix64 is the splitmix64
/// finalizer and GAMMA = 0x9E3779B97F4A7C15.  Stream keys are derived from
/// (base_seed, stream_index, purpose) by chained mixing, so independent
/// streams can be drawn for every (scene, purpose) pair and consumed in
/// parallel without any shared state.  The exact construction is documented
/// in the README so other implementations can reproduce the byte-identical
/// draw sequence.
class RngStream {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix64(std::uint64_t x) noexcept {
    x += kGamma;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t base_seed, std::uint64_t stream_index,
                                  std::uint64_t purpose) noexcept {
    return mix64(mix64(mix64(base_seed) ^ stream_index) ^ purpose);
  }

  RngStream(std::uint64_t base_seed, std::uint64_t stream_index, std::uint64_t purpose) noexcept
      : state_(derive_key(base_seed, stream_index, purpose)) {}

  explicit RngStream(std::uint64_t key) noexcept : state_(key) {}

  std::uint64_t next_u64() noexcept {
    state_ += kGamma;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_unit() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * next_unit(); }

  /// Box-Muller transform; always consumes exactly two uniforms.
  std::pair<double, double> normal_pair() noexcept;

  double normal() noexcept { return normal_pair().first; }

  /// Uniform direction on the unit sphere (normalized isotropic Gaussian).
  Eigen::Vector3d unit_vector() noexcept;

 private:
  std::uint64_t state_;
};

/// Stream purposes used by the scene generator.  Values are part of the
/// reproducibility contract and must not be renumbered.
enum class StreamPurpose : std::uint64_t {
  Rig = 1,
  Geometry = 2,
  NoiseLeft = 3,
  NoiseRight = 4,
};

inline RngStream make_stream(std::uint64_t base_seed, std::uint64_t stream_index,
                             StreamPurpose purpose) noexcept {
  return RngStream(base_seed, stream_index, static_cast<std::uint64_t>(purpose));
}

}  // namespace otm
