#ifndef RSUQ_DITHER_HPP_
#define RSUQ_DITHER_HPP_

#include <cstdint>
#include <stdexcept>

#include "rsuq/lattice.hpp"
#include "rsuq/philox.hpp"

namespace rsuq {

/// Seeded stream of i.i.d. dithers uniform over the scaled Voronoi cell
/// scale·V(lat). Draw i is a pure function of (seed, i): it reads words
/// [i·n, (i+1)·n) of the generator, so positioning is O(1).
template <typename Scalar>
class DitherStreamT {
 public:
  using Vector = VectorX<Scalar>;

  DitherStreamT(LatticeT<Scalar> lat, Scalar scale, std::uint64_t seed)
      : lat_(std::move(lat)), scale_(scale), seed_(seed), rng_(seed) {
    if (!(scale > 0)) throw std::invalid_argument("dither scale must be positive");
  }

  /// Uniform deviates in [0, 1)^n of the current draw; advances by one draw.
  Vector next_uniforms() {
    Vector u = uniforms_at(counter_);
    ++counter_;
    return u;
  }

  /// The next dither: fold a uniform point of the fundamental parallelepiped
  /// into the Voronoi cell, which preserves uniformity.
  Vector next() {
    const Vector w = lat_.generator() * next_uniforms();
    return scale_ * (w - nearest_point(lat_, w).embedding);
  }

  /// Positions the stream so that the following draw is the draw_index-th
  /// (0-based) draw of a fresh stream.
  DitherStreamT& jump_to(std::uint64_t draw_index) {
    counter_ = draw_index;
    return *this;
  }

  /// The word of the current draw at `lane` in (0, 1), without advancing.
  double open_uniform(int lane) const {
    return open_unit_uniform(rng_.word(counter_ * stride() + static_cast<std::uint64_t>(lane)));
  }

  std::uint64_t position() const { return counter_; }
  std::uint64_t seed() const { return seed_; }
  Scalar scale() const { return scale_; }
  const LatticeT<Scalar>& lattice() const { return lat_; }
  std::uint64_t stride() const { return static_cast<std::uint64_t>(lat_.dim()); }

 private:
  Vector uniforms_at(std::uint64_t draw) const {
    const std::uint64_t base = draw * stride();
    Vector u(lat_.dim());
    for (int i = 0; i < lat_.dim(); ++i) {
      u[i] = static_cast<Scalar>(unit_uniform(rng_.word(base + static_cast<std::uint64_t>(i))));
    }
    return u;
  }

  LatticeT<Scalar> lat_;
  Scalar scale_;
  std::uint64_t seed_;
  Philox4x32 rng_;
  std::uint64_t counter_ = 0;
};

using DitherStream = DitherStreamT<double>;

}  // namespace rsuq

#endif  // RSUQ_DITHER_HPP_
