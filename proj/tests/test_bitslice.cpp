#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "copim/bitslice.hpp"

using namespace copim;

namespace {

// Independent counting oracle: compositions of n with parts in [1, max]
// follow a(n) = a(n-1) + ... + a(n-max), a(0) = 1.
long long composition_count(int n, int max_part) {
  std::vector<long long> a(static_cast<std::size_t>(n) + 1, 0);
  a[0] = 1;
  for (int i = 1; i <= n; ++i)
    for (int p = 1; p <= std::min(max_part, i); ++p) a[static_cast<std::size_t>(i)] += a[static_cast<std::size_t>(i - p)];
  return a[static_cast<std::size_t>(n)];
}

// Bit-extraction oracle for D(h, l, x) built from division/modulo rather
// than shifts and masks.
int crop_oracle(int h, int l, int x) {
  int magnitude = x < 0 ? -x : x;
  int value = (magnitude / (1 << l)) % (1 << (h - l + 1));
  return x < 0 ? -value : value;
}

}  // namespace

TEST_SUITE("bitslice") {

TEST_CASE("enumeration matches the composition recurrence") {
  CHECK(enumerate_slicings(8, 4).size() == 108);
  CHECK(composition_count(8, 4) == 108);
  for (int bits = 1; bits <= 10; ++bits)
    CHECK(enumerate_slicings(bits, 4).size() ==
          static_cast<std::size_t>(composition_count(bits, 4)));
}

TEST_CASE("enumeration basics") {
  auto single = enumerate_slicings(1, 4);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == Slicing({1}));

  CHECK(enumerate_slicings(4, 4).size() == 8);

  auto all = enumerate_slicings(8, 4);
  for (const Slicing& s : all) {
    CHECK(s.operand_bits() == 8);
    for (int w : s.widths()) {
      CHECK(w >= 1);
      CHECK(w <= 4);
    }
  }

  SUBCASE("deterministic and lexicographic") {
    auto again = enumerate_slicings(8, 4);
    CHECK(all == again);
    for (std::size_t i = 1; i < all.size(); ++i)
      CHECK(std::lexicographical_compare(all[i - 1].widths().begin(),
                                         all[i - 1].widths().end(),
                                         all[i].widths().begin(), all[i].widths().end()));
  }

  SUBCASE("invalid arguments rejected") {
    CHECK_THROWS(enumerate_slicings(0, 4));
    CHECK_THROWS(enumerate_slicings(8, 0));
    CHECK_THROWS(enumerate_slicings(-1, 4));
  }
}

TEST_CASE("slicing bit ranges") {
  Slicing s({4, 2, 2});
  CHECK(s.high(0) == 7);
  CHECK(s.low(0) == 4);
  CHECK(s.high(1) == 3);
  CHECK(s.low(1) == 2);
  CHECK(s.high(2) == 1);
  CHECK(s.low(2) == 0);
  CHECK(s.str() == "4,2,2");
  CHECK(Slicing::parse("4,2,2") == s);
  CHECK_THROWS(Slicing::parse(""));
  CHECK_THROWS(Slicing::parse("4,x"));
  CHECK_THROWS(Slicing(std::vector<int>{0, 8}));
}

TEST_CASE("slice_signed examples") {
  CHECK(slice_signed(3, 0, 11) == 11);
  CHECK(slice_signed(7, 4, 179) == 11);  // 179 = 0b10110011
  CHECK(slice_signed(3, 0, -13) == -13);
  CHECK(slice_signed(7, 4, -13) == 0);
}

TEST_CASE("slice_signed matches the extraction oracle and is sign-symmetric") {
  for (int x = -255; x <= 255; ++x)
    for (int l = 0; l <= 7; ++l)
      for (int h = l; h <= 7; ++h) {
        CHECK(slice_signed(h, l, x) == crop_oracle(h, l, x));
        CHECK(slice_signed(h, l, -x) == -slice_signed(h, l, x));
      }
}

TEST_CASE("slice_operand examples") {
  auto a = slice_operand(10, Slicing({4, 4}));
  REQUIRE(a.size() == 2);
  CHECK(a[0] == SignedSlice{0, 4});
  CHECK(a[1] == SignedSlice{10, 0});

  auto b = slice_operand(-200, Slicing({4, 2, 2}));  // 200 = 0b11001000
  REQUIRE(b.size() == 3);
  CHECK(b[0] == SignedSlice{-12, 4});
  CHECK(b[1] == SignedSlice{-2, 2});
  CHECK(b[2] == SignedSlice{0, 0});

  for (const Slicing& s : enumerate_slicings(8, 4))
    for (const SignedSlice& piece : slice_operand(0, s)) CHECK(piece.value == 0);
}

TEST_CASE("round trip and sign purity over every slicing") {
  auto slicings = enumerate_slicings(8, 4);
  REQUIRE(slicings.size() == 108);
  for (const Slicing& s : slicings)
    for (int x = -255; x <= 255; ++x) {
      auto slices = slice_operand(x, s);
      REQUIRE(slices.size() == static_cast<std::size_t>(s.count()));
      CHECK(reconstruct(slices) == x);
      for (int i = 0; i < s.count(); ++i) {
        int v = slices[static_cast<std::size_t>(i)].value;
        // sign(slice) in {0, sign(x)}
        if (x >= 0) CHECK(v >= 0);
        if (x <= 0) CHECK(v <= 0);
        CHECK(std::abs(v) < (1 << s.width(i)));
      }
    }
}

TEST_CASE("reconstruct of empty list is 0") {
  CHECK(reconstruct({}) == 0);
}

}  // TEST_SUITE
