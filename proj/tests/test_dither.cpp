#include <doctest.h>

#include <cmath>
#include <vector>

#include "rsuq/dither.hpp"
#include "rsuq/special_functions.hpp"

using namespace rsuq;

TEST_CASE("dithers lie in the scaled Voronoi cell") {
  for (const auto& [name, n] : {std::pair{"Zn", 2}, {"Dn", 4}, {"A2", 2}, {"E8", 8}}) {
    const Lattice lat = builtin_lattice(name, n);
    DitherStream s(lat, 2.5, 3);
    for (int i = 0; i < 500; ++i) {
      const Eigen::VectorXd v = s.next();
      CHECK(nearest_point(lat, Eigen::VectorXd(v / 2.5)).coords.isZero());
      CHECK(v.norm() <= 2.5 * *lat.covering_radius() + 1e-12);
    }
  }
}

TEST_CASE("dither stream is deterministic and addressable") {
  const Lattice lat = builtin_lattice("E8", 8);
  DitherStream a(lat, 1.0, 99), b(lat, 1.0, 99), c(lat, 1.0, 100);
  std::vector<Eigen::VectorXd> first;
  for (int i = 0; i < 1000; ++i) {
    first.push_back(a.next());
    CHECK(first.back() == b.next());
  }
  CHECK(first[0] != c.next());
  CHECK(a.position() == 1000);
  for (std::uint64_t k : {0u, 1u, 17u, 999u}) {
    a.jump_to(k);
    CHECK(a.next() == first[k]);
  }
}

TEST_CASE("dither coordinates are uniform on Z^2") {
  // Chi-square on a 10 x 10 grid over [-1/2, 1/2)^2.
  const Lattice z2 = builtin_lattice("Zn", 2);
  DitherStream s(z2, 1.0, 5);
  constexpr int kBins = 10;
  constexpr int kDraws = 100000;
  std::vector<double> counts(kBins * kBins, 0.0);
  for (int i = 0; i < kDraws; ++i) {
    const Eigen::VectorXd v = s.next();
    const int a = std::min(kBins - 1, static_cast<int>((v[0] + 0.5) * kBins));
    const int b = std::min(kBins - 1, static_cast<int>((v[1] + 0.5) * kBins));
    counts[a * kBins + b] += 1.0;
  }
  const double expected = static_cast<double>(kDraws) / counts.size();
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi_square_sf(counts.size() - 1, chi2) > 0.01);
}

TEST_CASE("dither second moment matches the cell") {
  // E||V||^2 = n G det^{2/n} for a dither uniform on the Voronoi cell.
  for (const auto& [name, n] : {std::pair{"A2", 2}, {"E8", 8}}) {
    const Lattice lat = builtin_lattice(name, n);
    DitherStream s(lat, 1.0, 6);
    double sum = 0.0;
    constexpr int kDraws = 50000;
    for (int i = 0; i < kDraws; ++i) sum += s.next().squaredNorm();
    const double expected = n * *lat.nsm() * std::pow(lat.det(), 2.0 / n);
    CHECK(sum / kDraws == doctest::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("invalid scale") { CHECK_THROWS(DitherStream(builtin_lattice("Zn", 2), 0.0, 1)); }
