#include "zakharov/random.hpp"

#include <cmath>
#include <numbers>

namespace zakharov {

Vector random_smooth_field(const DomainSpec& spec, Rng& rng, int modes, double noise)
{
  spec.validate();
  const double pi = std::numbers::pi;
  Vector u = Vector::Zero(spec.node_count());
  if (spec.dimension == 1) {
    const double L = spec.extents[0];
    for (int k = 1; k <= modes; ++k) {
      const double c = rng.uniform(-1.0, 1.0) / (k * k);
      u += c * sample(spec, [&](double x) { return std::sin(k * pi * x / L); });
    }
  } else {
    const double Lx = spec.extents[0];
    const double Ly = spec.extents[1];
    for (int k = 1; k <= modes; ++k) {
      for (int l = 1; l <= modes; ++l) {
        const double c = rng.uniform(-1.0, 1.0) / (k * k + l * l);
        u += c * sample(spec, [&](double x, double y) {
               return std::sin(k * pi * x / Lx) * std::sin(l * pi * y / Ly);
             });
      }
    }
  }
  if (noise > 0.0) {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u[i] += noise * rng.uniform(-1.0, 1.0);
    }
  }
  return u;
}

} // namespace zakharov
