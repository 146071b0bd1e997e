#include <doctest.h>

#include <cmath>

#include "rsuq/philox.hpp"
#include "rsuq/special_functions.hpp"

using namespace rsuq;

TEST_CASE("unit ball volumes") {
  CHECK(std::exp(log_unit_ball_volume(1)) == doctest::Approx(2.0));
  CHECK(std::exp(log_unit_ball_volume(2)) == doctest::Approx(kPi));
  CHECK(std::exp(log_unit_ball_volume(3)) == doctest::Approx(4.0 * kPi / 3.0));
  CHECK(std::exp(log_unit_ball_volume(8)) == doctest::Approx(std::pow(kPi, 4) / 24.0));
  CHECK(log2_unit_ball_volume(2) == doctest::Approx(std::log2(kPi)));
}

TEST_CASE("incomplete gamma") {
  // P(1, x) = 1 - e^-x and P(1/2, x) = erf(sqrt x).
  for (double x : {0.01, 0.5, 1.0, 3.0, 20.0}) {
    CHECK(gamma_p(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
    CHECK(gamma_p(0.5, x) == doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
    CHECK(gamma_p(3.5, x) + gamma_q(3.5, x) == doctest::Approx(1.0).epsilon(1e-14));
  }
  // chi^2_2 has cdf 1 - e^{-x/2}.
  CHECK(chi_square_cdf(2, 3.0) == doctest::Approx(1.0 - std::exp(-1.5)));
  CHECK(chi_square_sf(4, 9.487729036781154) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("inverse incomplete gamma") {
  for (double a : {0.5, 1.0, 2.0, 5.0, 13.0}) {
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9, 1 - 1e-9}) {
      const double x = gamma_p_inv(a, p);
      CHECK(gamma_p(a, x) == doctest::Approx(p).epsilon(1e-10));
    }
  }
  CHECK_THROWS(gamma_p_inv(2.0, 0.0));
  CHECK_THROWS(gamma_p_inv(2.0, 1.0));
}

TEST_CASE("normal and kolmogorov") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  // Tabulated critical values of the Kolmogorov distribution.
  CHECK(kolmogorov_sf(1.3580986393225505) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(kolmogorov_sf(1.6276236115189480) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(kolmogorov_sf(0.5) == doctest::Approx(0.9639452436648751).epsilon(1e-9));
  CHECK(kolmogorov_sf(0.0) == 1.0);
  CHECK(sinc(0.0) == 1.0);
  CHECK(sinc(0.5) == doctest::Approx(2.0 / kPi));
}

TEST_CASE("philox known answers") {
  const Philox4x32::Block zero = Philox4x32(0)({0, 0, 0, 0});
  CHECK(zero == Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const Philox4x32::Block ones =
      Philox4x32(~0ull)({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
  CHECK(ones == Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  const Philox4x32::Block pi = Philox4x32(0x299f31d0a4093822ull)(
      {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
  CHECK(pi == Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("philox words and deviates") {
  const Philox4x32 a(42), b(42), c(43);
  for (std::uint64_t i = 0; i < 64; ++i) {
    CHECK(a.word(i) == b.word(i));
    CHECK(a.word(i) != a.word(i, 1));
  }
  CHECK(a.word(0) != c.word(0));
  CHECK(unit_uniform(0) == 0.0);
  CHECK(unit_uniform(~0ull) < 1.0);
  CHECK(open_unit_uniform(0) > 0.0);
  CHECK(open_unit_uniform(~0ull) < 1.0);
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
}
