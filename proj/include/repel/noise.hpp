#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace repel {

/// Identifies one independent random stream: (master_seed, stream_id).
struct NoiseSource {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

/// SplitMix64 finalizer; used to derive per-stream engine seeds.
std::uint64_t mix64(std::uint64_t x);

/// Per-path random number stream. Identical sources reproduce identical
/// sequences; distinct stream ids are decorrelated through a hash split so no
/// generator state is shared between paths.
class NoiseStream {
 public:
  explicit NoiseStream(NoiseSource source);

  [[nodiscard]] const NoiseSource& source() const { return source_; }

  double normal();
  void fill_normal(std::span<double> out);
  double uniform();
  /// Poisson(mean); mean == 0 yields 0.
  std::uint64_t poisson(double mean);
  double gamma(double shape, double scale);

  std::mt19937_64& engine() { return engine_; }

 private:
  NoiseSource source_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace repel
