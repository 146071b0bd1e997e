#ifndef RSUQ_LATTICE_HPP_
#define RSUQ_LATTICE_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsuq/special_functions.hpp"

namespace rsuq {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

enum class LatticeFamily { Integer, Checkerboard, Hexagonal, Gosset, User };

/// A point G·j of the lattice, carried with both its integer coordinates in
/// the generator basis and its embedding.
template <typename Scalar>
struct LatticePointT {
  IntVector coords;
  VectorX<Scalar> embedding;
};

/// Lattice G·Z^n with its geometric constants. The columns of the generator
/// are the basis vectors. Copies share the immutable state.
template <typename Scalar>
class LatticeT {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  LatticeT(std::string name, Matrix generator, LatticeFamily family = LatticeFamily::User,
           std::optional<Scalar> packing_radius = std::nullopt,
           std::optional<Scalar> covering_radius = std::nullopt,
           std::optional<Scalar> nsm = std::nullopt,
           std::vector<IntVector> minimal_vectors = {});

  const std::string& name() const { return data_->name; }
  LatticeFamily family() const { return data_->family; }
  int dim() const { return static_cast<int>(data_->generator.rows()); }
  const Matrix& generator() const { return data_->generator; }
  const Matrix& generator_inverse() const { return data_->inverse; }
  Scalar det() const { return data_->det; }
  Scalar packing_radius() const { return data_->packing_radius; }
  std::optional<Scalar> covering_radius() const { return data_->covering_radius; }
  std::optional<Scalar> nsm() const { return data_->nsm; }

  /// Integer coordinates of the shortest nonzero vectors (both signs). Only
  /// populated for the built-in families, where they drive tie resolution.
  const std::vector<IntVector>& minimal_vectors() const { return data_->minimal; }
  /// Embeddings of minimal_vectors() as the columns of a matrix.
  const Matrix& minimal_embeddings() const { return data_->minimal_embeddings; }
  /// Factors of G = Q·R used for enumeration.
  const Matrix& q_transpose() const { return data_->q_transpose; }
  const Matrix& r_factor() const { return data_->r; }

  template <typename Derived>
  Vector embed(const Eigen::MatrixBase<Derived>& coords) const {
    return data_->generator * coords.template cast<Scalar>();
  }

 private:
  struct Data {
    std::string name;
    LatticeFamily family;
    Matrix generator;
    Matrix inverse;
    Scalar det;
    Scalar packing_radius;
    std::optional<Scalar> covering_radius;
    std::optional<Scalar> nsm;
    std::vector<IntVector> minimal;
    Matrix minimal_embeddings;
    Matrix q_transpose;
    Matrix r;
  };
  std::shared_ptr<const Data> data_;
};

using Lattice = LatticeT<double>;
using LatticePoint = LatticePointT<double>;

namespace detail {

/// ||x - G j||^2 accumulated in long double.
template <typename Scalar, typename Derived>
long double squared_distance(const MatrixX<Scalar>& generator, const Eigen::MatrixBase<Derived>& x,
                             const IntVector& coords) {
  const Eigen::Index n = generator.rows();
  long double total = 0.0L;
  for (Eigen::Index r = 0; r < n; ++r) {
    long double point = 0.0L;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (coords[c] != 0) {
        point += static_cast<long double>(generator(r, c)) * static_cast<long double>(coords[c]);
      }
    }
    const long double diff = static_cast<long double>(x[r]) - point;
    total += diff * diff;
  }
  return total;
}

inline bool lex_less(const IntVector& a, const IntVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

template <typename Scalar>
IntVector round_to_int(const VectorX<Scalar>& v) {
  IntVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[i] = static_cast<std::int64_t>(std::llround(static_cast<double>(v[i])));
  }
  return out;
}

/// Calls visit(j) for every integer vector whose point G·j may lie within
/// sqrt(radius2) of x, where G = Q·R with R upper triangular and y = Q^T x.
/// Depth-first over the last coordinate first, pruned by partial distances;
/// the caller re-checks candidates exactly.
template <typename Scalar, typename Visit>
void for_each_in_sphere(const MatrixX<Scalar>& r, const VectorX<Scalar>& y, Scalar radius2, Visit&& visit) {
  const Eigen::Index n = r.rows();
  IntVector j(n);
  std::vector<Scalar> partial(static_cast<std::size_t>(n) + 1, Scalar(0));
  auto recurse = [&](auto&& self, Eigen::Index k) -> void {
    Scalar rest = y[k];
    for (Eigen::Index i = k + 1; i < n; ++i) rest -= r(k, i) * static_cast<Scalar>(j[i]);
    const Scalar diag = std::abs(r(k, k));
    const Scalar center = rest / r(k, k);
    const Scalar budget = radius2 - partial[static_cast<std::size_t>(k) + 1];
    if (budget < 0) return;
    const Scalar half = std::sqrt(budget) / diag;
    const auto lo = static_cast<std::int64_t>(std::ceil(center - half));
    const auto hi = static_cast<std::int64_t>(std::floor(center + half));
    for (std::int64_t v = lo; v <= hi; ++v) {
      j[k] = v;
      const Scalar step = diag * (static_cast<Scalar>(v) - center);
      partial[static_cast<std::size_t>(k)] = partial[static_cast<std::size_t>(k) + 1] + step * step;
      if (k == 0) {
        visit(static_cast<const IntVector&>(j));
      } else {
        self(self, k - 1);
      }
    }
  };
  recurse(recurse, n - 1);
}

/// Nearest point of D_n (integer vectors with even coordinate sum), in
/// embedding coordinates.
template <typename Scalar, typename Derived>
VectorX<Scalar> nearest_checkerboard(const Eigen::MatrixBase<Derived>& x) {
  const Eigen::Index n = x.size();
  VectorX<Scalar> f(n);
  std::int64_t parity = 0;
  Eigen::Index worst = 0;
  Scalar worst_gap = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    f[i] = std::nearbyint(x[i]);
    parity += static_cast<std::int64_t>(f[i]);
    const Scalar gap = std::abs(x[i] - f[i]);
    if (gap > worst_gap) {
      worst_gap = gap;
      worst = i;
    }
  }
  if (parity % 2 != 0) {
    f[worst] += (x[worst] > f[worst]) ? Scalar(1) : Scalar(-1);
  }
  return f;
}

template <typename Scalar>
std::vector<IntVector> coords_of(const MatrixX<Scalar>& inverse, const std::vector<VectorX<Scalar>>& points) {
  std::vector<IntVector> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(round_to_int<Scalar>(inverse * p));
  return out;
}

}  // namespace detail

template <typename Scalar>
LatticeT<Scalar>::LatticeT(std::string name, Matrix generator, LatticeFamily family,
                           std::optional<Scalar> packing_radius, std::optional<Scalar> covering_radius,
                           std::optional<Scalar> nsm, std::vector<IntVector> minimal_vectors) {
  if (generator.rows() == 0 || generator.rows() != generator.cols()) {
    throw std::invalid_argument("lattice generator must be a non-empty square matrix");
  }
  auto data = std::make_shared<Data>();
  data->name = std::move(name);
  data->family = family;
  data->det = std::abs(generator.determinant());
  const Scalar scale = generator.cwiseAbs().maxCoeff();
  if (!(data->det > std::pow(scale, generator.rows()) * Scalar(1e-12))) {
    throw std::invalid_argument("lattice generator is singular");
  }
  data->inverse = generator.inverse();
  const Eigen::HouseholderQR<Matrix> qr(generator);
  data->r = qr.matrixQR().template triangularView<Eigen::Upper>();
  data->q_transpose = qr.householderQ().transpose();
  data->generator = std::move(generator);
  data->covering_radius = covering_radius;
  data->nsm = nsm;
  data->minimal = std::move(minimal_vectors);
  data->minimal_embeddings.resize(data->generator.rows(), static_cast<Eigen::Index>(data->minimal.size()));
  for (std::size_t i = 0; i < data->minimal.size(); ++i) {
    data->minimal_embeddings.col(static_cast<Eigen::Index>(i)) =
        data->generator * data->minimal[i].template cast<Scalar>();
  }

  if (packing_radius) {
    data->packing_radius = *packing_radius;
  } else {
    // Shortest nonzero vector by enumeration inside the ball through the
    // shortest basis vector.
    const Scalar bound = data->generator.colwise().norm().minCoeff();
    long double best = static_cast<long double>(bound) * bound;
    const VectorX<Scalar> origin = VectorX<Scalar>::Zero(data->generator.rows());
    detail::for_each_in_sphere<Scalar>(data->r, origin, bound * bound * Scalar(1 + 1e-9), [&](const IntVector& j) {
      if (j.isZero()) return;
      const long double d = detail::squared_distance(data->generator, origin, j);
      if (d < best) best = d;
    });
    data->packing_radius = static_cast<Scalar>(std::sqrt(best) / 2.0L);
  }
  if (!(data->packing_radius > 0)) throw std::invalid_argument("packing radius must be positive");
  if (data->covering_radius && *data->covering_radius < data->packing_radius) {
    throw std::invalid_argument("covering radius is smaller than packing radius");
  }
  data_ = std::move(data);
}

/// Built-in lattice families: "Zn" (any n), "Dn" (n >= 2), "A2" (n = 2) and
/// "E8" (n = 8).
template <typename Scalar = double>
LatticeT<Scalar> builtin_lattice(const std::string& name, int n) {
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;
  if (n < 1) throw std::invalid_argument("lattice dimension must be positive");
  const Scalar half = Scalar(1) / 2;
  const Scalar root2 = std::sqrt(Scalar(2));

  if (name == "Zn" || name == "Z") {
    std::vector<Vector> mins;
    for (int i = 0; i < n; ++i) {
      mins.push_back(Vector::Unit(n, i));
      mins.push_back(-Vector::Unit(n, i));
    }
    const Matrix g = Matrix::Identity(n, n);
    return LatticeT<Scalar>("Zn", g, LatticeFamily::Integer, half, half * std::sqrt(Scalar(n)),
                            Scalar(1) / 12, detail::coords_of<Scalar>(g, mins));
  }
  if (name == "Dn" || name == "D") {
    if (n < 2) throw std::invalid_argument("Dn requires n >= 2");
    Matrix g = Matrix::Zero(n, n);
    g(0, 0) = -1;
    g(1, 0) = -1;
    for (int c = 1; c < n; ++c) {
      g(c - 1, c) = 1;
      g(c, c) = -1;
    }
    std::vector<Vector> mins;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        for (int sa : {-1, 1}) {
          for (int sb : {-1, 1}) {
            Vector v = Vector::Zero(n);
            v[a] = Scalar(sa);
            v[b] = Scalar(sb);
            mins.push_back(v);
          }
        }
      }
    }
    std::optional<Scalar> nsm;
    if (n == 3) nsm = Scalar(0.0787450656);
    if (n == 4) nsm = Scalar(0.0766032346);
    const Scalar covering = std::max(Scalar(1), std::sqrt(Scalar(n)) / 2);
    const Matrix inverse = g.inverse();
    return LatticeT<Scalar>("Dn", g, LatticeFamily::Checkerboard, root2 / 2, covering, nsm,
                            detail::coords_of<Scalar>(inverse, mins));
  }
  if (name == "A2") {
    if (n != 2) throw std::invalid_argument("A2 is two-dimensional");
    const Scalar r3 = std::sqrt(Scalar(3));
    Matrix g(2, 2);
    g << 1, half, 0, r3 / 2;
    std::vector<Vector> mins;
    for (const Vector& v : {Vector(g.col(0)), Vector(g.col(1)), Vector(g.col(1) - g.col(0))}) {
      mins.push_back(v);
      mins.push_back(-v);
    }
    const Matrix inverse = g.inverse();
    return LatticeT<Scalar>("A2", g, LatticeFamily::Hexagonal, half, Scalar(1) / r3,
                            Scalar(5) / (36 * r3), detail::coords_of<Scalar>(inverse, mins));
  }
  if (name == "E8") {
    if (n != 8) throw std::invalid_argument("E8 is eight-dimensional");
    // Rows are basis vectors in the usual presentation; columns of G.
    Matrix rows = Matrix::Zero(8, 8);
    rows(0, 0) = 2;
    for (int i = 1; i < 7; ++i) {
      rows(i, i - 1) = -1;
      rows(i, i) = 1;
    }
    rows.row(7).setConstant(half);
    const Matrix g = rows.transpose();
    std::vector<Vector> mins;
    for (int a = 0; a < 8; ++a) {
      for (int b = a + 1; b < 8; ++b) {
        for (int sa : {-1, 1}) {
          for (int sb : {-1, 1}) {
            Vector v = Vector::Zero(8);
            v[a] = Scalar(sa);
            v[b] = Scalar(sb);
            mins.push_back(v);
          }
        }
      }
    }
    for (int mask = 0; mask < 256; ++mask) {
      if (__builtin_popcount(static_cast<unsigned>(mask)) % 2 != 0) continue;
      Vector v(8);
      for (int i = 0; i < 8; ++i) v[i] = (mask >> i & 1) ? -half : half;
      mins.push_back(v);
    }
    const Matrix inverse = g.inverse();
    return LatticeT<Scalar>("E8", g, LatticeFamily::Gosset, root2 / 2, Scalar(1),
                            Scalar(929) / 12960, detail::coords_of<Scalar>(inverse, mins));
  }
  throw std::invalid_argument("unknown lattice '" + name + "'");
}

/// Closest lattice point to x. Among equidistant points the one with the
/// lexicographically smallest integer coordinates wins; distances compare
/// exactly, without tolerance.
template <typename Scalar, typename Derived>
LatticePointT<Scalar> nearest_point(const LatticeT<Scalar>& lat, const Eigen::MatrixBase<Derived>& x) {
  using Vector = VectorX<Scalar>;
  const int n = lat.dim();
  if (x.size() != n) throw std::invalid_argument("nearest_point: dimension mismatch");
  const auto& g = lat.generator();
  const auto& inverse = lat.generator_inverse();

  IntVector j(n);
  switch (lat.family()) {
    case LatticeFamily::Integer: {
      // Halves round down, which is already the lexicographic choice.
      for (int i = 0; i < n; ++i) j[i] = static_cast<std::int64_t>(std::ceil(x[i] - Scalar(0.5)));
      return {j, lat.embed(j)};
    }
    case LatticeFamily::Checkerboard: {
      j = detail::round_to_int<Scalar>(inverse * detail::nearest_checkerboard<Scalar>(x));
      break;
    }
    case LatticeFamily::Gosset: {
      const Vector shift = Vector::Constant(n, Scalar(0.5));
      const Vector even = detail::nearest_checkerboard<Scalar>(x);
      const Vector odd = detail::nearest_checkerboard<Scalar>(x - shift) + shift;
      const Vector& pick = ((x - even).squaredNorm() <= (x - odd).squaredNorm()) ? even : odd;
      j = detail::round_to_int<Scalar>(inverse * pick);
      break;
    }
    case LatticeFamily::Hexagonal: {
      // The reduced basis makes the nearest point a corner of the
      // fundamental parallelogram containing x.
      const Vector u = inverse * x;
      const std::int64_t f0 = static_cast<std::int64_t>(std::floor(u[0]));
      const std::int64_t f1 = static_cast<std::int64_t>(std::floor(u[1]));
      long double best = 0;
      bool first = true;
      for (std::int64_t a = f0; a <= f0 + 1; ++a) {
        for (std::int64_t b = f1; b <= f1 + 1; ++b) {
          IntVector c(2);
          c << a, b;
          const long double d = detail::squared_distance(g, x, c);
          if (first || d < best) {
            best = d;
            j = c;
            first = false;
          }
        }
      }
      break;
    }
    case LatticeFamily::User: {
      const Vector u = inverse * x;
      const IntVector babai = detail::round_to_int<Scalar>(u);
      long double radius2 = detail::squared_distance(g, x, babai);
      if (lat.covering_radius()) {
        const long double cov = static_cast<long double>(*lat.covering_radius());
        radius2 = std::min(radius2, cov * cov);
      }
      const Scalar radius = static_cast<Scalar>(std::sqrt(radius2) * (1.0L + 1e-9L)) + Scalar(1e-12);
      j = babai;
      long double best = detail::squared_distance(g, x, babai);
      const Vector y = lat.q_transpose() * x;
      detail::for_each_in_sphere<Scalar>(lat.r_factor(), y, radius * radius, [&](const IntVector& c) {
        const long double d = detail::squared_distance(g, x, c);
        if (d < best || (d == best && detail::lex_less(c, j))) {
          best = d;
          j = c;
        }
      });
      return {j, lat.embed(j)};
    }
  }

  // Walk along minimal vectors to the lexicographically smallest of any
  // equidistant points. For root lattices the minimizers of a tie form a
  // face of a Delaunay cell whose edges are minimal vectors, so greedy
  // descent reaches the lexicographic minimum.
  // A cheap screen in working precision discards neighbours that are
  // clearly farther; survivors are compared exactly.
  const auto& mins = lat.minimal_vectors();
  const auto& emb = lat.minimal_embeddings();
  long double best = detail::squared_distance(g, x, j);
  bool moved = true;
  while (moved) {
    moved = false;
    const Vector residual = x - lat.embed(j);
    const Scalar approx = residual.squaredNorm();
    const Scalar slack = Scalar(1e-6) * (Scalar(1) + approx);
    for (std::size_t i = 0; i < mins.size(); ++i) {
      if ((residual - emb.col(static_cast<Eigen::Index>(i))).squaredNorm() > approx + slack) continue;
      const IntVector c = j + mins[i];
      const long double d = detail::squared_distance(g, x, c);
      if (d < best || (d == best && detail::lex_less(c, j))) {
        best = d;
        j = c;
        moved = true;
        break;
      }
    }
  }
  return {j, lat.embed(j)};
}

/// Packing density lambda^n kappa_n / det.
template <typename Scalar>
Scalar packing_density(const LatticeT<Scalar>& lat) {
  const int n = lat.dim();
  return static_cast<Scalar>(std::exp(n * std::log(static_cast<double>(lat.packing_radius())) +
                                      log_unit_ball_volume(n) - std::log(static_cast<double>(lat.det()))));
}

template <typename Scalar>
Scalar covering_density(const LatticeT<Scalar>& lat) {
  if (!lat.covering_radius()) throw std::invalid_argument("covering radius unknown for lattice " + lat.name());
  const int n = lat.dim();
  return static_cast<Scalar>(std::exp(n * std::log(static_cast<double>(*lat.covering_radius())) +
                                      log_unit_ball_volume(n) - std::log(static_cast<double>(lat.det()))));
}

/// Reads a user lattice: first line n, then n rows of n reals (row-major G),
/// then optional "packing_radius=", "covering_radius=" and "nsm=" lines.
template <typename Scalar = double>
LatticeT<Scalar> read_lattice_config(std::istream& in, std::string name = "user") {
  int n = 0;
  if (!(in >> n) || n < 1) throw std::runtime_error("lattice config: bad dimension line");
  MatrixX<Scalar> g(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double v;
      if (!(in >> v)) throw std::runtime_error("lattice config: expected " + std::to_string(n * n) + " entries");
      g(r, c) = static_cast<Scalar>(v);
    }
  }
  std::optional<Scalar> packing, covering, nsm;
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::runtime_error("lattice config: unexpected token '" + token + "'");
    const std::string key = token.substr(0, eq);
    std::istringstream value_stream(token.substr(eq + 1));
    value_stream.imbue(std::locale::classic());
    double value;
    if (!(value_stream >> value)) throw std::runtime_error("lattice config: bad value for " + key);
    if (key == "packing_radius") {
      packing = static_cast<Scalar>(value);
    } else if (key == "covering_radius") {
      covering = static_cast<Scalar>(value);
    } else if (key == "nsm") {
      nsm = static_cast<Scalar>(value);
    } else {
      throw std::runtime_error("lattice config: unknown key " + key);
    }
  }
  return LatticeT<Scalar>(std::move(name), std::move(g), LatticeFamily::User, packing, covering, nsm);
}

template <typename Scalar = double>
LatticeT<Scalar> load_lattice_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lattice config " + path);
  in.imbue(std::locale::classic());
  return read_lattice_config<Scalar>(in, path);
}

}  // namespace rsuq

#endif  // RSUQ_LATTICE_HPP_
