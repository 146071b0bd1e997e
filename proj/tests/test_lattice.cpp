#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rsuq/lattice.hpp"
#include "rsuq/philox.hpp"

using namespace rsuq;

namespace {

// Calls visit(j) for every integer vector in the box [lo, hi], in
// lexicographic order.
template <typename Visit>
void for_each_in_box(const IntVector& lo, const IntVector& hi, Visit&& visit) {
  const Eigen::Index n = lo.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lo[i] > hi[i]) return;
  }
  IntVector j = lo;
  while (true) {
    visit(j);
    Eigen::Index i = n - 1;
    while (i >= 0 && j[i] == hi[i]) {
      j[i] = lo[i];
      --i;
    }
    if (i < 0) return;
    ++j[i];
  }
}

Eigen::VectorXd random_point(const Philox4x32& rng, std::uint64_t i, int n, double spread) {
  Eigen::VectorXd x(n);
  for (int k = 0; k < n; ++k) x[k] = spread * (2.0 * unit_uniform(rng.word(i * n + k)) - 1.0);
  return x;
}

// Exhaustive search over a box of integer coordinates around the rounded
// basis coordinates, with exact lexicographic tie-break.
IntVector brute_force(const Lattice& lat, const Eigen::VectorXd& x, int reach) {
  const int n = lat.dim();
  const Eigen::VectorXd u = lat.generator_inverse() * x;
  IntVector lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = static_cast<std::int64_t>(std::llround(u[i])) - reach;
    hi[i] = lo[i] + 2 * reach;
  }
  IntVector best = lo;
  long double best_d = detail::squared_distance(lat.generator(), x, lo);
  for_each_in_box(lo, hi, [&](const IntVector& c) {
    const long double d = detail::squared_distance(lat.generator(), x, c);
    if (d < best_d || (d == best_d && detail::lex_less(c, best))) {
      best_d = d;
      best = c;
    }
  });
  return best;
}

// Nearest point of D_n by rounding and fixing the parity at the worst
// coordinate.
Eigen::VectorXd nearest_dn(const Eigen::VectorXd& x) {
  Eigen::VectorXd f = x.array().round();
  if (static_cast<long long>(std::llround(f.sum())) % 2 != 0) {
    Eigen::Index worst = 0;
    (x - f).cwiseAbs().maxCoeff(&worst);
    f[worst] += (x[worst] > f[worst]) ? 1.0 : -1.0;
  }
  return f;
}

Eigen::VectorXd nearest_e8(const Eigen::VectorXd& x) {
  const Eigen::VectorXd h = Eigen::VectorXd::Constant(8, 0.5);
  const Eigen::VectorXd a = nearest_dn(x);
  const Eigen::VectorXd b = nearest_dn(x - h) + h;
  return (x - a).squaredNorm() <= (x - b).squaredNorm() ? a : b;
}

}  // namespace

TEST_CASE("builtin constants") {
  const Lattice z2 = builtin_lattice("Zn", 2);
  CHECK(z2.packing_radius() == doctest::Approx(0.5));
  CHECK(z2.det() == doctest::Approx(1.0));

  const Lattice e8 = builtin_lattice("E8", 8);
  CHECK(e8.packing_radius() == doctest::Approx(std::sqrt(2.0) / 2));
  CHECK(e8.det() == doctest::Approx(1.0));
  CHECK(e8.minimal_vectors().size() == 240);

  const Lattice d4 = builtin_lattice("Dn", 4);
  CHECK(d4.packing_radius() == doctest::Approx(std::sqrt(2.0) / 2));
  CHECK(d4.det() == doctest::Approx(2.0));
  CHECK(d4.minimal_vectors().size() == 24);

  const Lattice a2 = builtin_lattice("A2", 2);
  CHECK(a2.packing_radius() == doctest::Approx(0.5));
  CHECK(a2.det() == doctest::Approx(std::sqrt(3.0) / 2));
  CHECK(a2.minimal_vectors().size() == 6);

  CHECK_THROWS(builtin_lattice("E8", 7));
  CHECK_THROWS(builtin_lattice("Dn", 1));
  CHECK_THROWS(builtin_lattice("A2", 3));
  CHECK_THROWS(builtin_lattice("Leech", 24));
}

TEST_CASE("packing radius by enumeration agrees with the closed forms") {
  for (const auto& [name, n] : {std::pair{"Zn", 3}, {"Dn", 4}, {"Dn", 5}, {"A2", 2}, {"E8", 8}}) {
    const Lattice builtin = builtin_lattice(name, n);
    const Lattice user("user", builtin.generator());
    CHECK(user.packing_radius() == doctest::Approx(builtin.packing_radius()).epsilon(1e-12));
  }
}

TEST_CASE("densities") {
  CHECK(packing_density(builtin_lattice("Zn", 2)) == doctest::Approx(M_PI / 4));
  CHECK(packing_density(builtin_lattice("E8", 8)) == doctest::Approx(std::pow(M_PI, 4) / 384));
  CHECK(packing_density(builtin_lattice("A2", 2)) == doctest::Approx(M_PI / (2 * std::sqrt(3.0))));
  CHECK(packing_density(builtin_lattice("Dn", 4)) == doctest::Approx(M_PI * M_PI / 16));
  const Lattice z1 = builtin_lattice("Zn", 1);
  CHECK(packing_density(z1) == doctest::Approx(1.0));
  CHECK(covering_density(z1) == doctest::Approx(1.0));
  CHECK(covering_density(builtin_lattice("Zn", 2)) == doctest::Approx(M_PI / 2));
  CHECK_THROWS(covering_density(Lattice("user", Eigen::Matrix2d::Identity())));
}

TEST_CASE("nearest point examples") {
  const Lattice z2 = builtin_lattice("Zn", 2);
  auto p = nearest_point(z2, Eigen::Vector2d(0.4, -1.6));
  CHECK(p.coords == (IntVector(2) << 0, -2).finished());
  p = nearest_point(z2, Eigen::Vector2d(0.5, 0.5));
  CHECK(p.coords == (IntVector(2) << 0, 0).finished());

  const Lattice d4 = builtin_lattice("Dn", 4);
  const Eigen::Vector4d x(0.6, 0.2, 0.0, 0.0);
  CHECK(nearest_point(d4, x).embedding.isZero());
  CHECK(detail::squared_distance(d4.generator(), x, brute_force(d4, x, 3)) == doctest::Approx(0.40));
  CHECK_THROWS(nearest_point(z2, Eigen::Vector3d::Zero()));
}

TEST_CASE("fast decoders match exhaustive search") {
  const Philox4x32 rng(11);
  for (const auto& [name, n, reach] : {std::tuple{"Zn", 3, 2}, {"Dn", 3, 2}, {"Dn", 4, 2}, {"Dn", 5, 2}, {"A2", 2, 3}}) {
    const Lattice lat = builtin_lattice(name, n);
    for (std::uint64_t i = 0; i < 300; ++i) {
      const Eigen::VectorXd x = random_point(rng, i, n, 6.0);
      CHECK(nearest_point(lat, x).coords == brute_force(lat, x, reach));
    }
  }
}

TEST_CASE("E8 decoder matches an independent coset decoder") {
  const Lattice e8 = builtin_lattice("E8", 8);
  const Philox4x32 rng(12);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const Eigen::VectorXd x = random_point(rng, i, 8, 5.0);
    const auto p = nearest_point(e8, x);
    CHECK((x - p.embedding).squaredNorm() == doctest::Approx((x - nearest_e8(x)).squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("ties resolve to the lexicographically smallest coordinates") {
  // Half-integer grids put many inputs on Voronoi boundaries. Enumeration
  // over the same generator applies the tie rule directly.
  for (const auto& [name, n] : {std::pair{"Zn", 3}, {"Dn", 3}, {"Dn", 4}, {"A2", 2}, {"E8", 8}}) {
    const Lattice lat = builtin_lattice(name, n);
    const Lattice user("user", lat.generator());
    const Philox4x32 rng(13);
    for (std::uint64_t i = 0; i < 200; ++i) {
      Eigen::VectorXd x(n);
      for (int k = 0; k < n; ++k) x[k] = 0.5 * static_cast<double>(rng.word(i * n + k) % 9) - 2.0;
      if (std::string(name) == "A2") x = lat.generator() * (x / 3.0);
      CHECK(nearest_point(lat, x).coords == nearest_point(user, x).coords);
    }
  }
}

TEST_CASE("shift covariance and covering radius") {
  const Philox4x32 rng(14);
  for (const auto& [name, n] : {std::pair{"Zn", 2}, {"Dn", 4}, {"A2", 2}, {"E8", 8}}) {
    const Lattice lat = builtin_lattice(name, n);
    for (std::uint64_t i = 0; i < 300; ++i) {
      const Eigen::VectorXd x = random_point(rng, i, n, 4.0);
      IntVector k(n);
      for (int c = 0; c < n; ++c) k[c] = static_cast<std::int64_t>(rng.word(1000 + i * n + c) % 11) - 5;
      const auto p = nearest_point(lat, x);
      CHECK(nearest_point(lat, Eigen::VectorXd(x + lat.embed(k))).coords == p.coords + k);
      CHECK((x - p.embedding).norm() <= *lat.covering_radius() + 1e-12);
    }
  }
}

TEST_CASE("user lattice from a config") {
  std::istringstream in("2\n1 0.5\n0 0.8660254037844386\ncovering_radius=0.5773502691896257\n");
  const Lattice user = read_lattice_config(in, "hex");
  CHECK(user.dim() == 2);
  CHECK(user.family() == LatticeFamily::User);
  CHECK(user.packing_radius() == doctest::Approx(0.5));
  CHECK(covering_density(user) == doctest::Approx(covering_density(builtin_lattice("A2", 2))));

  // A skewed basis exercises enumeration well beyond Babai rounding.
  Eigen::Matrix3d g;
  g << 1, 0.9, 0.3, 0, 0.4, 0.7, 0, 0, 0.35;
  const Lattice skew("skew", g);
  const Philox4x32 rng(15);
  for (std::uint64_t i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = random_point(rng, i, 3, 3.0);
    CHECK(nearest_point(skew, x).coords == brute_force(skew, x, 6));
  }

  std::istringstream bad("2\n1 0\n0\n");
  CHECK_THROWS(read_lattice_config(bad));
  std::istringstream singular("2\n1 2\n2 4\n");
  CHECK_THROWS(read_lattice_config(singular));
  std::istringstream unknown("1\n1\nfoo=3\n");
  CHECK_THROWS(read_lattice_config(unknown));
}
