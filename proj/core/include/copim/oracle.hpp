#pragma once

#include <cstdint>
#include <vector>

#include "copim/network.hpp"
#include "copim/tensor.hpp"

namespace copim {

// Layer input lowered to dot-product rows: one row of filter_size()
// operands per (sample, output position). Unsigned layers produce u8
// rows; signed layers produce i8 rows that the pipeline splits into
// positive/negative pulse phases.
struct LoweredInput {
  int samples = 0;
  int positions = 0;  // output positions per sample (1 for FC)
  int k = 0;
  bool is_signed = false;
  std::vector<std::uint8_t> unsigned_rows;  // [pass][k] when !is_signed
  std::vector<std::int8_t> signed_rows;     // [pass][k] when is_signed

  std::size_t passes() const {
    return static_cast<std::size_t>(samples) * static_cast<std::size_t>(positions);
  }
};

LoweredInput lower_input(const LayerSpec& layer, const Tensor& inputs);

// Patch-unrolling of one [C, H, W] sample into a [K, positions] matrix so
// the convolution becomes a matrix multiply. Out-of-image taps read the
// input zero point (unsigned) or 0 (signed), i.e. a real-valued zero.
Tensor im2col(const Tensor& sample, const LayerSpec& layer);

// Output tensor dims for a layer applied to inputs: FC [N, out], conv
// [N, out, out_h, out_w]. Validates geometry.
std::vector<std::uint32_t> output_dims(const LayerSpec& layer, const Tensor& inputs);

struct OracleResult {
  Tensor psums;    // i32, same dims as outputs
  Tensor outputs;  // u8 or i8 per the layer's quantization
  std::int64_t max_abs_psum = 0;
};

// Exact integer reference: signed weights (w - zero_point) times signed
// inputs, full-precision psums, then the shared output quantization.
OracleResult ideal_layer(const LayerSpec& layer, const Tensor& inputs);

}  // namespace copim
