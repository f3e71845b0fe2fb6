#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace copim {

// An ordered partition of an operand's bits into contiguous slices,
// most-significant slice first. A Slicing of (4,2,2) over an 8b operand
// covers bit ranges [7..4], [3..2], [1..0].
class Slicing {
 public:
  Slicing() = default;
  explicit Slicing(std::vector<int> widths);
  static Slicing parse(std::string_view text);  // "4,2,2"

  const std::vector<int>& widths() const { return widths_; }
  int count() const { return static_cast<int>(widths_.size()); }
  int operand_bits() const;
  int max_width() const;
  int width(int i) const { return widths_[static_cast<std::size_t>(i)]; }
  int low(int i) const { return lows_[static_cast<std::size_t>(i)]; }
  int high(int i) const { return low(i) + width(i) - 1; }
  std::string str() const;

  bool operator==(const Slicing& other) const { return widths_ == other.widths_; }
  bool operator!=(const Slicing& other) const { return !(*this == other); }

 private:
  std::vector<int> widths_;
  std::vector<int> lows_;
};

// One slice of a signed operand: the cropped magnitude bits carry the
// operand's sign, and bit_index_low gives the weight 2^l on reconstruction.
struct SignedSlice {
  int value = 0;
  int bit_index_low = 0;
  bool operator==(const SignedSlice&) const = default;
};

// All ordered compositions of operand_bits into parts in [1, max_bits],
// in lexicographic order on the width tuples. (8, 4) yields 108.
std::vector<Slicing> enumerate_slicings(int operand_bits, int max_bits);

// D(h, l, x): crops signed x to bits [h..l] of its magnitude, shifted so
// bit l is least significant, preserving the sign.
int slice_signed(int h, int l, int x);

std::vector<SignedSlice> slice_operand(int x, const Slicing& slicing);

// Sum of value_i * 2^(l_i); exact inverse of slice_operand.
int reconstruct(std::span<const SignedSlice> slices);

}  // namespace copim
