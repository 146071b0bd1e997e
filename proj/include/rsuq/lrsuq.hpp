#ifndef RSUQ_LRSUQ_HPP_
#define RSUQ_LRSUQ_HPP_

#include <cstdint>
#include <optional>

#include "rsuq/rsuq.hpp"

namespace rsuq {

/// A continuous error law presented through its superlevel sets
/// L_t = {z : f(z) >= t}. Models choose their own level coordinate: the
/// value returned by sample_level is what the other members receive.
class NoiseModel {
 public:
  virtual ~NoiseModel() = default;

  virtual int dim() const = 0;

  /// Draws a level with density f_T(t) = vol(L_t) from `uniforms`, which
  /// holds dim() deviates in (0, 1). Must be a pure function of them, since
  /// the decoder regenerates the level.
  virtual double sample_level(const VectorXd& uniforms) const = 0;

  virtual bool in_level_set(const VectorXd& z, double level) const = 0;

  /// Scale with L_level contained in beta·V(lat).
  virtual double beta(double level, const Lattice& lat) const = 0;

  /// log vol(L_level) in nats, when known. Diagnostics only.
  virtual std::optional<double> level_log_volume(double /*level*/) const { return std::nullopt; }
};

/// Standard Gaussian N(0, I_n). The level coordinate is v ~ chi^2_{n+2}:
/// the superlevel set at density t = (2 pi)^{-n/2} e^{-v/2} is the ball of
/// radius sqrt(v).
class GaussianNoise final : public NoiseModel {
 public:
  explicit GaussianNoise(int n);

  int dim() const override { return n_; }
  /// Inverse-CDF draw of v ~ Gamma(shape (n+2)/2, scale 2) from the first
  /// deviate.
  double sample_level(const VectorXd& uniforms) const override;
  bool in_level_set(const VectorXd& z, double v) const override { return z.squaredNorm() <= v; }
  /// sqrt(v) / packing_radius, the smallest scale containing the ball.
  double beta(double v, const Lattice& lat) const override;
  std::optional<double> level_log_volume(double v) const override;

  /// Density value t of the level set indexed by v.
  double density_level(double v) const;

 private:
  int n_;
};

struct LrsuqOptions {
  /// Zero selects ceil(50 / packing_density(lat)), the Gaussian-ball cap.
  std::uint64_t max_iters = 0;
};

/// Draws the level from draw 0 of the shared stream, then runs the
/// rejection loop against beta·V(lat) on draws 1, 2, ...
/// M lives in the unscaled lattice G·Z^n.
Description lrsuq_encode(const NoiseModel& noise, const Lattice& lat, std::uint64_t seed, const VectorXd& x,
                         const LrsuqOptions& options = {});

/// beta·(M + V_K), bit-identical to the encoder's reconstruction.
VectorXd lrsuq_decode(const NoiseModel& noise, const Lattice& lat, std::uint64_t seed, const Description& d);

/// Level drawn by the shared stream for `seed`.
double lrsuq_level(const NoiseModel& noise, const Lattice& lat, std::uint64_t seed);

/// Probability that a single dither is accepted given the level:
/// vol(L_level) / vol(beta·V). Requires level_log_volume.
double acceptance_probability_given_level(const NoiseModel& noise, const Lattice& lat, double level);

}  // namespace rsuq

#endif  // RSUQ_LRSUQ_HPP_
