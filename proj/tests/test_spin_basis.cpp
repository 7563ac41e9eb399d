#include <doctest.h>

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "hofid/spin_basis.hpp"

using hofid::Mask;
using hofid::SectorBasis;

TEST_CASE("L=4 half-filled sector is the six masks in ascending order") {
  const SectorBasis b(4, 2);
  const std::vector<Mask> expected = {0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100};
  CHECK(b.dim() == 6);
  CHECK(std::vector<Mask>(b.states().begin(), b.states().end()) == expected);
}

TEST_CASE("sector dimensions") {
  CHECK(SectorBasis(14, 7).dim() == 3432);
  CHECK(hofid::zero_magnetization_basis(26).dim() == 10400600);
  for (int L = 4; L <= 26; L += 2) {
    CHECK(hofid::binomial(L, L / 2) == hofid::zero_magnetization_basis(L).dim());
  }
}

TEST_CASE("rank and unrank on the L=4 sector") {
  const SectorBasis b(4, 2);
  CHECK(b.rank(0b0101) == 1);
  CHECK(b.rank(0b1100) == 5);
  CHECK_THROWS_AS(b.rank(0b0111), std::invalid_argument);
  CHECK_THROWS_AS(b.rank(0b10011), std::invalid_argument);
  CHECK(b.unrank(0) == 0b0011);
  CHECK(b.unrank(5) == 0b1100);
  CHECK_THROWS_AS(b.unrank(6), std::out_of_range);
  CHECK_FALSE(b.contains(0b0111));
  CHECK(b.contains(0b1010));
}

TEST_CASE("rank/unrank bijection for every sector up to L=16") {
  for (int L = 4; L <= 16; L += 2) {
    for (int n_up = 0; n_up <= L; ++n_up) {
      const SectorBasis b(L, n_up);
      REQUIRE(b.dim() == hofid::binomial(L, n_up));
      const auto states = b.states();
      for (std::size_t i = 0; i < b.dim(); ++i) {
        if (i > 0) REQUIRE(states[i - 1] < states[i]);
        REQUIRE(std::popcount(states[i]) == n_up);
        REQUIRE((states[i] >> L) == 0);
        REQUIRE(b.rank(b.unrank(i)) == i);
        REQUIRE(b.unrank(b.rank(states[i])) == states[i]);
      }
    }
  }
}

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(SectorBasis(13, 6), std::invalid_argument);
  CHECK_THROWS_AS(SectorBasis(32, 16), std::invalid_argument);
  CHECK_THROWS_AS(SectorBasis(2, 1), std::invalid_argument);
  CHECK_THROWS_AS(SectorBasis(8, 9), std::invalid_argument);
  CHECK_THROWS_AS(SectorBasis(8, -1), std::invalid_argument);
}
