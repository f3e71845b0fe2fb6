#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "copim/encoder.hpp"
#include "copim/metrics.hpp"
#include "copim/network.hpp"
#include "copim/oracle.hpp"
#include "copim/tensor.hpp"
#include "copim/xbar.hpp"

namespace copim {

// Runtime input slicing strategy.
//
//   speculation(widths): three wide slices (2-4b each, summing to 8) are
//     converted first; a column whose ADC pins at a bound is marked failed
//     and recomputed from that slice's 1b reslices in recovery cycles.
//     Recovery cycles always run; only failed columns consume converts.
//   recovery_only(): eight 1b slices, every column converted and
//     committed each cycle (saturated values are propagated).
//   plain(widths): a fixed slicing with commit-always semantics; used by
//     ablation studies that need e.g. 4b input slices without speculation.
class InputPlan {
 public:
  static InputPlan speculation(const Slicing& widths = Slicing({4, 2, 2}));
  static InputPlan recovery_only();
  static InputPlan plain(const Slicing& widths);

  bool speculation_enabled() const { return speculative_; }
  const Slicing& wide_slices() const { return wide_; }

  // Crossbar cycles for one 8b input pass; doubled for signed inputs.
  int cycles_per_pass(bool signed_inputs = false) const;
  // Converts per column when no speculation fails.
  int nominal_converts_per_column() const;
  std::string describe() const;

 private:
  InputPlan(Slicing wide, bool speculative);
  Slicing wide_;
  bool speculative_ = false;
};

// center * sum(inputs), the digital term of the center+offset dot product.
std::int64_t input_sum_term(std::span<const std::uint8_t> inputs, int center);

struct SignedSplit {
  std::vector<std::uint8_t> positive;  // max(x, 0)
  std::vector<std::uint8_t> negative;  // max(-x, 0)
};
SignedSplit split_signed_inputs(std::span<const std::int8_t> inputs);

// Converts consumed by one column over one pass: one per speculative
// slice plus the widths of the failed ones; without speculation, one per
// executed slice.
int count_converts(const std::vector<bool>& failed_wide_slices, const InputPlan& plan);

// psums [N, channels, ...] i32 -> quantized 8b outputs, ReLU folded.
Tensor quantize_outputs(const Tensor& psums, const QuantParams& params);

struct TraceRow {
  std::int32_t layer = 0, chunk = 0, filter = 0, slice = 0;
  std::int64_t pass = 0;
  std::int32_t cycle = 0;
  std::uint8_t phase = 0;  // 0 wide/speculative, 1 single-bit/recovery
  std::int32_t raw_sum = 0, pos_total = 0, neg_total = 0;
  double noisy_sum = 0.0;
  std::int32_t adc_out = 0;
  bool converted = false;
  bool saturated = false;
};

struct LayerRunOptions {
  int threads = 1;
  bool collect_traces = false;
  int layer_index = 0;  // distinguishes RNG streams across layers
};

struct LayerRunResult {
  Tensor outputs;
  Tensor psums;  // i32, pre-quantization
  RunMetrics metrics;
  std::vector<TraceRow> traces;
};

// Simulates one compiled layer: analog column sums per input-slice cycle,
// optional Gaussian noise, ADC conversion, shift+add psum assembly, the
// digital center term, and output quantization. Signed-input layers run
// positive and negative pulse phases and subtract. Deterministic for a
// fixed config seed regardless of thread count.
LayerRunResult run_layer(const LayerSpec& layer, const EncodedLayer& encoded,
                         const Tensor& inputs, const CrossbarConfig& config,
                         const InputPlan& plan, const LayerRunOptions& options = {});

}  // namespace copim
