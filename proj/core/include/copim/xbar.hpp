#pragma once

#include <cstdint>
#include <span>

#include "copim/rng.hpp"

namespace copim {

// Crossbar geometry and converter settings for one run.
struct CrossbarConfig {
  int rows = 512;
  int adc_bits = 7;
  bool adc_signed = true;     // signed clamp [-2^(b-1), 2^(b-1)-1]; unsigned [0, 2^b-1]
  int dac_max_bits = 4;       // widest input slice the pulse-train DAC can emit
  double noise_level = 0.0;   // E; column-sum sigma is E * sqrt(N+ + N-)
  std::uint64_t rng_seed = 0;

  int adc_min() const { return adc_signed ? -(1 << (adc_bits - 1)) : 0; }
  int adc_max() const {
    return adc_signed ? (1 << (adc_bits - 1)) - 1 : (1 << adc_bits) - 1;
  }
  void validate() const;
};

// One column, one cycle: raw = pos - neg, where pos/neg accumulate the
// sliced products of positive/negative weight slices.
struct ColumnSumResult {
  std::int32_t raw = 0;
  std::int32_t pos = 0;
  std::int32_t neg = 0;
};

// Checked entry point; validates lengths and slice ranges.
ColumnSumResult column_sum(std::span<const std::uint8_t> input_slices,
                           std::span<const std::int8_t> column,
                           int dac_max_bits = 4, int weight_slice_bits = 4);

// Hot path used by the pipeline after per-layer validation.
inline ColumnSumResult accumulate_column(const std::uint8_t* input_slices,
                                         const std::int8_t* column, std::size_t n) {
  std::int32_t signed_sum = 0;
  std::int32_t magnitude_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::int32_t in = input_slices[i];
    std::int32_t w = column[i];
    signed_sum += in * w;
    magnitude_sum += in * (w < 0 ? -w : w);
  }
  ColumnSumResult r;
  r.raw = signed_sum;
  r.pos = (magnitude_sum + signed_sum) / 2;
  r.neg = (magnitude_sum - signed_sum) / 2;
  return r;
}

// Gaussian perturbation of a column sum. The standard normal draw comes
// from the provided stream and does not depend on noise_level, so runs at
// different E values see the same underlying draws scaled differently.
double inject_noise(std::int64_t raw_sum, std::int64_t pos_total, std::int64_t neg_total,
                    double noise_level, rng::Stream& stream);

struct AdcResult {
  int value = 0;
  bool saturated = false;  // output equals an ADC bound
};

// Rounds to nearest (ties away from zero) and clamps to the ADC range.
// The step size is one column-sum LSB, so in-range integers convert
// exactly. An output equal to either bound is flagged saturated; the
// speculation machinery treats that as a detected failure.
AdcResult adc_convert(double sum, const CrossbarConfig& config);

}  // namespace copim
