#pragma once

#include "zakharov/grid.hpp"

#include <cstdint>
#include <random>

namespace zakharov {

/// Seeded generator shared by every randomized routine so that a fixed seed
/// reproduces results bit for bit within one build.
class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : engine_(seed)
  {}

  double uniform(double lo, double hi)
  {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

/// Smooth random field: sum_k c_k / k^2 * sin(k pi x / L) (products of sines in
/// 2D) over the first `modes` modes, plus `noise` times uniform nodal noise.
/// The mode sum satisfies both boundary kinds' u = 0 condition.
Vector random_smooth_field(const DomainSpec& spec, Rng& rng, int modes = 6, double noise = 0.0);

} // namespace zakharov
