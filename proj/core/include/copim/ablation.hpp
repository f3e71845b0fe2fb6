#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "copim/metrics.hpp"
#include "copim/network.hpp"
#include "copim/tensor.hpp"

namespace copim {

// The four accumulative setups measured by the ablation command:
//   isaac          128x128, unsigned arithmetic, 8b unsigned ADC,
//                  four 2b weight slices, eight 1b input slices
//   center_offset  512x512 with solved centers, 7b signed ADC,
//                  same fixed slicing and 1b inputs
//   adaptive       + per-layer weight slicing search under the budget
//   raella         + speculative (4,2,2) input slicing with recovery
std::vector<MetricsRow> run_ablation(const NetworkManifest& manifest, const Tensor& inputs,
                                     double error_budget, std::uint64_t seed, int threads);

// Column-sum saturation ladder: the fraction of raw column sums outside
// the signed 7b window, measured on the same data as each strategy is
// stacked. Stage order: unsigned offsets -> solved centers -> searched
// weight slicing (both with 4b input slices) -> 1b recovery input slices.
struct LadderPoint {
  std::string stage;
  double saturation_rate = 0.0;
  std::int64_t column_sums = 0;
  Slicing weight_slicing;
};

std::vector<LadderPoint> run_saturation_ladder(const NetworkManifest& manifest,
                                               const Tensor& inputs, double error_budget,
                                               std::uint64_t seed, int threads);

}  // namespace copim
