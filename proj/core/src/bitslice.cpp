#include "copim/bitslice.hpp"

#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace copim {

Slicing::Slicing(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.empty()) throw std::invalid_argument("slicing: empty width list");
  int total = 0;
  for (int w : widths_) {
    if (w < 1 || w > 8) throw std::invalid_argument("slicing: width out of [1,8]");
    total += w;
  }
  if (total > 16) throw std::invalid_argument("slicing: operand wider than 16b");
  lows_.resize(widths_.size());
  int low = 0;
  for (std::size_t i = widths_.size(); i-- > 0;) {
    lows_[i] = low;
    low += widths_[i];
  }
}

Slicing Slicing::parse(std::string_view text) {
  std::vector<int> widths;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string part(text.substr(pos, comma - pos));
    if (part.empty()) throw std::invalid_argument("slicing: empty width in '" + std::string(text) + "'");
    char* end = nullptr;
    long v = std::strtol(part.c_str(), &end, 10);
    if (end == nullptr || *end != '\0')
      throw std::invalid_argument("slicing: bad width '" + part + "'");
    widths.push_back(static_cast<int>(v));
    pos = comma + 1;
  }
  return Slicing(widths);
}

int Slicing::operand_bits() const {
  return std::accumulate(widths_.begin(), widths_.end(), 0);
}

int Slicing::max_width() const {
  int m = 0;
  for (int w : widths_) m = std::max(m, w);
  return m;
}

std::string Slicing::str() const {
  std::string out;
  for (std::size_t i = 0; i < widths_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(widths_[i]);
  }
  return out;
}

namespace {

void enumerate_rec(int remaining, int max_bits, std::vector<int>& current,
                   std::vector<Slicing>& out) {
  if (remaining == 0) {
    out.emplace_back(current);
    return;
  }
  for (int w = 1; w <= std::min(max_bits, remaining); ++w) {
    current.push_back(w);
    enumerate_rec(remaining - w, max_bits, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<Slicing> enumerate_slicings(int operand_bits, int max_bits) {
  if (operand_bits < 1 || max_bits < 1)
    throw std::invalid_argument("enumerate_slicings: arguments must be positive");
  std::vector<Slicing> out;
  std::vector<int> current;
  enumerate_rec(operand_bits, max_bits, current, out);
  return out;
}

int slice_signed(int h, int l, int x) {
  int magnitude = x < 0 ? -x : x;
  int width = h - l + 1;
  int cropped = (magnitude >> l) & ((1 << width) - 1);
  return x < 0 ? -cropped : cropped;
}

std::vector<SignedSlice> slice_operand(int x, const Slicing& slicing) {
  std::vector<SignedSlice> out;
  out.reserve(static_cast<std::size_t>(slicing.count()));
  for (int i = 0; i < slicing.count(); ++i)
    out.push_back({slice_signed(slicing.high(i), slicing.low(i), x), slicing.low(i)});
  return out;
}

int reconstruct(std::span<const SignedSlice> slices) {
  int total = 0;
  for (const SignedSlice& s : slices) total += s.value << s.bit_index_low;
  return total;
}

}  // namespace copim
