#pragma once

#include <optional>
#include <vector>

#include "copim/encoder.hpp"
#include "copim/network.hpp"
#include "copim/pipeline.hpp"
#include "copim/tensor.hpp"

namespace copim {

// Mean absolute difference over positions where expected is nonzero;
// returns 0 when every expected output is zero. Output sparsity from
// folded ReLU would otherwise dilute the measure.
double layer_error(const Tensor& expected, const Tensor& actual);

struct CompileOptions {
  double error_budget = 0.09;
  CrossbarConfig config;
  CenterMode center_mode = CenterMode::optimal;
  std::optional<Slicing> fixed_slicing;  // skip the search; applies to every layer
  int threads = 1;
};

struct SlicingChoice {
  Slicing slicing;
  std::vector<std::vector<int>> centers;  // [filter][chunk]
  double measured_error = 0.0;
  bool budget_met = false;
  bool forced_last = false;
  int candidates_evaluated = 0;
};

// Per-layer slicing search. Evaluates all 108 candidate slicings with 1b
// input slices against the exact oracle outputs and picks the slicing
// with the fewest slices whose error stays under budget; slice-count ties
// break toward lower error, then enumeration order. When nothing meets
// the budget the minimum-error slicing is returned with budget_met =
// false.
SlicingChoice find_best_slicing(const LayerSpec& layer, const Tensor& test_inputs,
                                double budget, const CrossbarConfig& config,
                                CenterMode mode = CenterMode::optimal, int threads = 1,
                                int layer_index = 0);

struct CompiledLayer {
  LayerArtifact record;
  EncodedLayer encoded;
};

// Whole-network preprocessing: per-layer activations are propagated with
// the exact oracle, each layer's slicing is searched (the last layer is
// pinned to eight 1b weight slices), and centers are solved for the
// accepted slicing.
std::vector<CompiledLayer> compile_network(const std::vector<LayerSpec>& layers,
                                           const Tensor& calibration,
                                           const CompileOptions& options);

CompiledArtifact make_artifact(const std::string& manifest_rel_path,
                               const CompileOptions& options,
                               const std::vector<CompiledLayer>& layers);

// Rebuilds the crossbar images for a previously compiled artifact from
// the manifest weights and the stored centers.
std::vector<EncodedLayer> encode_from_artifact(const NetworkManifest& manifest,
                                               const CompiledArtifact& artifact);

}  // namespace copim
