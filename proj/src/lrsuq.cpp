#include "rsuq/lrsuq.hpp"

#include <cmath>
#include <stdexcept>

namespace rsuq {

namespace {

struct LayeredStream {
  DitherStream stream;
  double level;
  double beta;
};

LayeredStream open_stream(const NoiseModel& noise, const Lattice& lat, std::uint64_t seed) {
  if (noise.dim() != lat.dim()) throw std::invalid_argument("noise model and lattice dimensions differ");
  // Dithers are drawn over the unit cell; beta enters at reconstruction.
  DitherStream stream(lat, 1.0, seed);
  VectorXd uniforms(lat.dim());
  for (int i = 0; i < lat.dim(); ++i) uniforms[i] = stream.open_uniform(i);
  stream.jump_to(1);
  const double level = noise.sample_level(uniforms);
  const double beta = noise.beta(level, lat);
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::domain_error("noise model returned a non-positive beta");
  return {std::move(stream), level, beta};
}

VectorXd reconstruct(double beta, const Lattice& lat, const IntVector& coords, const VectorXd& dither) {
  return beta * (lat.embed(coords) + dither);
}

}  // namespace

GaussianNoise::GaussianNoise(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("GaussianNoise: dimension must be positive");
}

double GaussianNoise::sample_level(const VectorXd& uniforms) const {
  return 2.0 * gamma_p_inv(0.5 * (n_ + 2), uniforms[0]);
}

double GaussianNoise::beta(double v, const Lattice& lat) const { return std::sqrt(v) / lat.packing_radius(); }

std::optional<double> GaussianNoise::level_log_volume(double v) const {
  return log_unit_ball_volume(n_) + 0.5 * n_ * std::log(v);
}

double GaussianNoise::density_level(double v) const {
  return std::exp(-0.5 * n_ * std::log(2.0 * kPi) - 0.5 * v);
}

double lrsuq_level(const NoiseModel& noise, const Lattice& lat, std::uint64_t seed) {
  return open_stream(noise, lat, seed).level;
}

Description lrsuq_encode(const NoiseModel& noise, const Lattice& lat, std::uint64_t seed, const VectorXd& x,
                         const LrsuqOptions& options) {
  if (x.size() != lat.dim()) throw std::invalid_argument("lrsuq_encode: dimension mismatch");
  LayeredStream s = open_stream(noise, lat, seed);
  const std::uint64_t cap =
      options.max_iters ? options.max_iters : static_cast<std::uint64_t>(std::ceil(50.0 / packing_density(lat)));
  const VectorXd scaled = x / s.beta;
  for (std::uint64_t i = 1; i <= cap; ++i) {
    const VectorXd v = s.stream.next();
    const LatticePoint m = nearest_point(lat, (scaled - v).eval());
    const VectorXd err = reconstruct(s.beta, lat, m.coords, v) - x;
    if (noise.in_level_set(err, s.level)) return Description{i, m.coords};
  }
  throw IterationLimitError("lrsuq_encode: no dither accepted within " + std::to_string(cap) + " iterations");
}

VectorXd lrsuq_decode(const NoiseModel& noise, const Lattice& lat, std::uint64_t seed, const Description& d) {
  if (d.index < 1) throw std::invalid_argument("lrsuq_decode: stopping index must be >= 1");
  if (d.coords.size() != lat.dim()) throw std::invalid_argument("lrsuq_decode: dimension mismatch");
  LayeredStream s = open_stream(noise, lat, seed);
  s.stream.jump_to(d.index);
  return reconstruct(s.beta, lat, d.coords, s.stream.next());
}

double acceptance_probability_given_level(const NoiseModel& noise, const Lattice& lat, double level) {
  const auto log_volume = noise.level_log_volume(level);
  if (!log_volume) throw std::invalid_argument("noise model does not expose level-set volumes");
  const double beta = noise.beta(level, lat);
  return std::exp(*log_volume - lat.dim() * std::log(beta) - std::log(lat.det()));
}

}  // namespace rsuq
