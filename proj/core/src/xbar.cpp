#include "copim/xbar.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace copim {

void CrossbarConfig::validate() const {
  if (rows < 1) throw std::invalid_argument("crossbar config: rows must be >= 1");
  if (adc_bits < 2 || adc_bits > 16)
    throw std::invalid_argument("crossbar config: adc_bits out of [2,16]");
  if (dac_max_bits < 1 || dac_max_bits > 4)
    throw std::invalid_argument("crossbar config: dac_max_bits out of [1,4]");
  if (noise_level < 0) throw std::invalid_argument("crossbar config: negative noise level");
}

ColumnSumResult column_sum(std::span<const std::uint8_t> input_slices,
                           std::span<const std::int8_t> column,
                           int dac_max_bits, int weight_slice_bits) {
  if (input_slices.size() != column.size())
    throw std::invalid_argument("column_sum: input/column length mismatch (" +
                                std::to_string(input_slices.size()) + " vs " +
                                std::to_string(column.size()) + ")");
  int input_limit = (1 << dac_max_bits) - 1;
  int weight_limit = (1 << weight_slice_bits) - 1;
  for (std::size_t i = 0; i < input_slices.size(); ++i) {
    if (input_slices[i] > input_limit)
      throw std::invalid_argument("column_sum: input slice value " +
                                  std::to_string(input_slices[i]) + " exceeds DAC range");
    int w = column[i];
    if (w < -weight_limit || w > weight_limit)
      throw std::invalid_argument("column_sum: weight slice value " + std::to_string(w) +
                                  " does not fit " + std::to_string(weight_slice_bits) + "b");
  }
  return accumulate_column(input_slices.data(), column.data(), input_slices.size());
}

double inject_noise(std::int64_t raw_sum, std::int64_t pos_total, std::int64_t neg_total,
                    double noise_level, rng::Stream& stream) {
  if (noise_level < 0) throw std::invalid_argument("inject_noise: negative noise level");
  if (noise_level == 0.0) return static_cast<double>(raw_sum);
  double sigma = noise_level * std::sqrt(static_cast<double>(pos_total + neg_total));
  return static_cast<double>(raw_sum) + sigma * stream.gaussian();
}

AdcResult adc_convert(double sum, const CrossbarConfig& config) {
  long long rounded = std::llround(sum);  // ties away from zero
  int lo = config.adc_min();
  int hi = config.adc_max();
  int value = rounded < lo ? lo : (rounded > hi ? hi : static_cast<int>(rounded));
  return {value, value == lo || value == hi};
}

}  // namespace copim
