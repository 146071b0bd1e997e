#ifndef RSUQ_RSUQ_HPP_
#define RSUQ_RSUQ_HPP_

#include <cstdint>
#include <functional>
#include <stdexcept>

#include "rsuq/dither.hpp"
#include "rsuq/lattice.hpp"

namespace rsuq {

using Eigen::VectorXd;

/// Raised when the rejection loop exceeds its iteration cap.
class IterationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejection-sampled quantizer with error uniform over the ball r·B^n,
/// run against the Voronoi cell of the lattice scaled by
/// scale = r / packing_radius, the smallest scale containing the ball.
struct RsuqConfig {
  Lattice lattice;
  double radius;
  double scale;
  std::uint64_t seed;
  std::uint64_t max_iters;

  /// Ball configuration with max_iters = ceil(50 / delta), failure
  /// probability below e^-50.
  static RsuqConfig ball(Lattice lat, double radius, std::uint64_t seed);

  int dim() const { return lattice.dim(); }
  /// Acceptance probability of each dither, equal to the packing density.
  double acceptance_probability() const;
};

/// Output of the encoder: stopping index K >= 1 and the lattice point M.
/// For RSUQ, M lives in the scaled lattice scale·G·Z^n.
struct Description {
  std::uint64_t index = 1;
  IntVector coords;

  bool operator==(const Description& other) const {
    return index == other.index && coords.size() == other.coords.size() && coords == other.coords;
  }
};

/// Membership predicate for a general acceptance region A inside the scaled
/// cell; argument is the candidate error M + V_i - x.
using AcceptanceRegion = std::function<bool(const VectorXd&)>;

/// Ball instantiation: first i with ||M + V_i - x|| <= r.
Description rsuq_encode(const RsuqConfig& cfg, const VectorXd& x);

/// General-set instantiation. The caller guarantees A lies in the scaled
/// cell; cfg.radius is unused.
Description rsuq_encode(const RsuqConfig& cfg, const VectorXd& x, const AcceptanceRegion& region);

/// Reconstruction M + V_K. Bit-identical to the encoder's value when the
/// configuration matches; a mismatch cannot be detected.
VectorXd rsuq_decode(const RsuqConfig& cfg, const Description& d);

/// decode(encode(x)) - x, distributed uniformly over the ball for every x.
VectorXd error_sample(const RsuqConfig& cfg, const VectorXd& x);

/// Shared reconstruction arithmetic for encoder and decoder.
VectorXd rsuq_reconstruct(const RsuqConfig& cfg, const IntVector& coords, const VectorXd& dither);

}  // namespace rsuq

#endif  // RSUQ_RSUQ_HPP_
