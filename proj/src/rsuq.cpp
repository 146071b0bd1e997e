#include "rsuq/rsuq.hpp"

#include <cmath>

namespace rsuq {

RsuqConfig RsuqConfig::ball(Lattice lat, double radius, std::uint64_t seed) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  const double scale = radius / lat.packing_radius();
  const double delta = packing_density(lat);
  const auto cap = static_cast<std::uint64_t>(std::ceil(50.0 / delta));
  return RsuqConfig{std::move(lat), radius, scale, seed, cap};
}

double RsuqConfig::acceptance_probability() const {
  // Ball volume over the scaled cell volume.
  const int n = dim();
  return std::exp(log_unit_ball_volume(n) + n * std::log(radius) - n * std::log(scale) -
                  std::log(lattice.det()));
}

VectorXd rsuq_reconstruct(const RsuqConfig& cfg, const IntVector& coords, const VectorXd& dither) {
  return cfg.scale * cfg.lattice.embed(coords) + dither;
}

Description rsuq_encode(const RsuqConfig& cfg, const VectorXd& x, const AcceptanceRegion& region) {
  if (x.size() != cfg.dim()) throw std::invalid_argument("rsuq_encode: dimension mismatch");
  DitherStream stream(cfg.lattice, cfg.scale, cfg.seed);
  for (std::uint64_t i = 1; i <= cfg.max_iters; ++i) {
    const VectorXd v = stream.next();
    const LatticePoint m = nearest_point(cfg.lattice, ((x - v) / cfg.scale).eval());
    const VectorXd err = rsuq_reconstruct(cfg, m.coords, v) - x;
    if (region(err)) return Description{i, m.coords};
  }
  throw IterationLimitError("rsuq_encode: no dither accepted within " + std::to_string(cfg.max_iters) +
                            " iterations");
}

Description rsuq_encode(const RsuqConfig& cfg, const VectorXd& x) {
  const double r2 = cfg.radius * cfg.radius;
  return rsuq_encode(cfg, x, [r2](const VectorXd& err) { return err.squaredNorm() <= r2; });
}

VectorXd rsuq_decode(const RsuqConfig& cfg, const Description& d) {
  if (d.index < 1) throw std::invalid_argument("rsuq_decode: stopping index must be >= 1");
  if (d.coords.size() != cfg.dim()) throw std::invalid_argument("rsuq_decode: dimension mismatch");
  DitherStream stream(cfg.lattice, cfg.scale, cfg.seed);
  stream.jump_to(d.index - 1);
  return rsuq_reconstruct(cfg, d.coords, stream.next());
}

VectorXd error_sample(const RsuqConfig& cfg, const VectorXd& x) {
  return rsuq_decode(cfg, rsuq_encode(cfg, x)) - x;
}

}  // namespace rsuq
