#include "repel/noise.hpp"

namespace repel {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

NoiseStream::NoiseStream(NoiseSource source)
    : source_(source),
      engine_(mix64(mix64(source.master_seed) ^ mix64(~source.stream_id))) {}

double NoiseStream::normal() { return normal_(engine_); }

void NoiseStream::fill_normal(std::span<double> out) {
  for (double& v : out) v = normal_(engine_);
}

double NoiseStream::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

std::uint64_t NoiseStream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(engine_);
}

double NoiseStream::gamma(double shape, double scale) {
  return std::gamma_distribution<double>(shape, scale)(engine_);
}

}  // namespace repel
