#include "copim/compiler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "copim/oracle.hpp"
#include "copim/parallel.hpp"

namespace copim {

double layer_error(const Tensor& expected, const Tensor& actual) {
  if (expected.dims() != actual.dims() || expected.dtype() != actual.dtype())
    throw std::invalid_argument("layer_error: tensors are " + expected.shape_str() + " vs " +
                                actual.shape_str());
  auto value_at = [](const Tensor& t, std::size_t i) -> double {
    return t.dtype() == DType::i8 ? static_cast<double>(t.i8()[i])
                                  : static_cast<double>(t.u8()[i]);
  };
  if (expected.dtype() != DType::u8 && expected.dtype() != DType::i8)
    throw std::invalid_argument("layer_error: expected 8b output tensors");

  double total = 0.0;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    double e = value_at(expected, i);
    if (e == 0.0) continue;
    total += std::abs(e - value_at(actual, i));
    ++nonzero;
  }
  return nonzero == 0 ? 0.0 : total / static_cast<double>(nonzero);
}

namespace {

Slicing last_layer_slicing() { return Slicing({1, 1, 1, 1, 1, 1, 1, 1}); }

// Centers for one (mode, slicing) pair across every (filter, chunk).
std::vector<std::vector<int>> centers_for(const LayerSpec& layer, const Slicing& slicing,
                                          const CrossbarConfig& config, CenterMode mode) {
  std::span<const std::uint8_t> weights = layer.weights.u8();
  int k = layer.filter_size();
  std::vector<int> chunk_sizes = chunk_partition(k, config.rows);
  std::vector<std::vector<int>> centers(static_cast<std::size_t>(layer.out_channels));
  for (int f = 0; f < layer.out_channels; ++f) {
    const std::uint8_t* row = weights.data() + static_cast<std::size_t>(f) * k;
    int start = 0;
    for (std::size_t c = 0; c < chunk_sizes.size(); ++c) {
      FilterChunk chunk;
      chunk.filter_id = f;
      chunk.chunk_index = static_cast<int>(c);
      chunk.weights.assign(row + start, row + start + chunk_sizes[c]);
      centers[static_cast<std::size_t>(f)].push_back(
          resolve_center(chunk, slicing, mode, layer.weight_zero_point));
      start += chunk_sizes[c];
    }
  }
  return centers;
}

double measure_error(const LayerSpec& layer, const Tensor& test_inputs,
                     const Tensor& expected_outputs, const EncodedLayer& encoded,
                     const CrossbarConfig& config, int layer_index) {
  LayerRunOptions opts;
  opts.threads = 1;
  opts.layer_index = layer_index;
  LayerRunResult run = run_layer(layer, encoded, test_inputs, config,
                                 InputPlan::recovery_only(), opts);
  return layer_error(expected_outputs, run.outputs);
}

SlicingChoice evaluate_fixed(const LayerSpec& layer, const Tensor& test_inputs,
                             const Tensor& expected, const Slicing& slicing, double budget,
                             const CrossbarConfig& config, CenterMode mode, int layer_index,
                             bool forced_last) {
  SlicingChoice choice;
  choice.slicing = slicing;
  choice.centers = centers_for(layer, slicing, config, mode);
  EncodedLayer encoded =
      encode_layer_with_centers(layer.weights.u8(), layer.out_channels, layer.filter_size(),
                                slicing, config.rows, choice.centers, layer.weight_zero_point);
  choice.measured_error = measure_error(layer, test_inputs, expected, encoded, config,
                                        layer_index);
  choice.budget_met = choice.measured_error < budget;
  choice.forced_last = forced_last;
  choice.candidates_evaluated = 1;
  return choice;
}

}  // namespace

SlicingChoice find_best_slicing(const LayerSpec& layer, const Tensor& test_inputs,
                                double budget, const CrossbarConfig& config, CenterMode mode,
                                int threads, int layer_index) {
  if (test_inputs.size() == 0)
    throw std::runtime_error("layer '" + layer.name + "': no test inputs for the slicing search");
  if (!(budget > 0))
    throw std::invalid_argument("find_best_slicing: error budget must be positive");
  config.validate();

  Tensor expected = ideal_layer(layer, test_inputs).outputs;
  std::vector<Slicing> candidates = enumerate_slicings(8, 4);
  std::size_t n = candidates.size();

  // Per-candidate centers. The optimal-center solve shares one cost table
  // per chunk across all candidates.
  std::vector<std::vector<std::vector<int>>> centers(n);  // [candidate][filter][chunk]
  std::span<const std::uint8_t> weights = layer.weights.u8();
  int k = layer.filter_size();
  std::vector<int> chunk_sizes = chunk_partition(k, config.rows);
  for (auto& per_candidate : centers)
    per_candidate.resize(static_cast<std::size_t>(layer.out_channels));

  unsigned worker_count = resolve_threads(threads);
  parallel_for(static_cast<std::size_t>(layer.out_channels), worker_count,
               [&](std::size_t f_begin, std::size_t f_end) {
                 for (std::size_t f = f_begin; f < f_end; ++f) {
                   const std::uint8_t* row = weights.data() + f * static_cast<std::size_t>(k);
                   int start = 0;
                   for (std::size_t c = 0; c < chunk_sizes.size(); ++c) {
                     FilterChunk chunk;
                     chunk.filter_id = static_cast<int>(f);
                     chunk.chunk_index = static_cast<int>(c);
                     chunk.weights.assign(row + start, row + start + chunk_sizes[c]);
                     std::vector<int> solved;
                     if (mode == CenterMode::optimal) {
                       solved = solve_centers(chunk, candidates);
                     } else {
                       solved.assign(n, resolve_center(chunk, candidates[0], mode,
                                                       layer.weight_zero_point));
                     }
                     for (std::size_t cand = 0; cand < n; ++cand)
                       centers[cand][f].push_back(solved[cand]);
                     start += chunk_sizes[c];
                   }
                 }
               });

  std::vector<double> errors(n, 0.0);
  parallel_for(n, worker_count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t cand = begin; cand < end; ++cand) {
      EncodedLayer encoded = encode_layer_with_centers(
          weights, layer.out_channels, k, candidates[cand], config.rows, centers[cand],
          layer.weight_zero_point);
      errors[cand] = measure_error(layer, test_inputs, expected, encoded, config, layer_index);
    }
  });

  // Fewest slices under budget; ties break to lower error, then to the
  // earlier candidate. Strict comparisons keep the scan order-stable.
  std::size_t best = n;  // sentinel: nothing under budget yet
  int best_slices = std::numeric_limits<int>::max();
  double best_error = std::numeric_limits<double>::infinity();
  for (std::size_t cand = 0; cand < n; ++cand) {
    if (!(errors[cand] < budget)) continue;
    int slices = candidates[cand].count();
    bool better = slices < best_slices || (slices == best_slices && errors[cand] < best_error);
    if (best == n || better) {
      best = cand;
      best_slices = slices;
      best_error = errors[cand];
    }
  }

  SlicingChoice choice;
  choice.candidates_evaluated = static_cast<int>(n);
  if (best == n) {
    // Nothing met the budget: fall back to the minimum-error slicing.
    std::size_t fallback = 0;
    for (std::size_t cand = 1; cand < n; ++cand)
      if (errors[cand] < errors[fallback]) fallback = cand;
    choice.slicing = candidates[fallback];
    choice.centers = std::move(centers[fallback]);
    choice.measured_error = errors[fallback];
    choice.budget_met = false;
  } else {
    choice.slicing = candidates[best];
    choice.centers = std::move(centers[best]);
    choice.measured_error = errors[best];
    choice.budget_met = true;
  }
  return choice;
}

std::vector<CompiledLayer> compile_network(const std::vector<LayerSpec>& layers,
                                           const Tensor& calibration,
                                           const CompileOptions& options) {
  if (layers.empty()) throw std::runtime_error("compile_network: no layers");
  if (calibration.size() == 0)
    throw std::runtime_error("compile_network: calibration activations are missing");
  options.config.validate();

  std::vector<CompiledLayer> out;
  Tensor activations = calibration;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& layer = layers[i];
    layer.validate();

    Tensor expected = ideal_layer(layer, activations).outputs;
    SlicingChoice choice;
    if (options.fixed_slicing) {
      choice = evaluate_fixed(layer, activations, expected, *options.fixed_slicing,
                              options.error_budget, options.config, options.center_mode,
                              static_cast<int>(i), false);
    } else if (layer.is_last_layer) {
      // Most conservative slicing for the last layer regardless of budget.
      choice = evaluate_fixed(layer, activations, expected, last_layer_slicing(),
                              options.error_budget, options.config, options.center_mode,
                              static_cast<int>(i), true);
    } else {
      choice = find_best_slicing(layer, activations, options.error_budget, options.config,
                                 options.center_mode, options.threads, static_cast<int>(i));
    }

    CompiledLayer compiled;
    compiled.record.name = layer.name;
    compiled.record.slicing = choice.slicing;
    compiled.record.centers = choice.centers;
    compiled.record.measured_error = choice.measured_error;
    compiled.record.budget_met = choice.budget_met;
    compiled.record.forced_last = choice.forced_last;
    compiled.record.candidates_evaluated = choice.candidates_evaluated;
    compiled.encoded = encode_layer_with_centers(layer.weights.u8(), layer.out_channels,
                                                 layer.filter_size(), choice.slicing,
                                                 options.config.rows, choice.centers,
                                                 layer.weight_zero_point);
    out.push_back(std::move(compiled));

    // Next layer's activations come from the exact oracle, not from the
    // simulated path, so per-layer error stays isolated.
    if (i + 1 < layers.size()) {
      if (layer.quant.output_signed != layers[i + 1].input_signed)
        throw std::runtime_error("layer '" + layers[i + 1].name +
                                 "': input signedness does not match the outputs of '" +
                                 layer.name + "'");
      activations = std::move(expected);
    }
  }
  return out;
}

CompiledArtifact make_artifact(const std::string& manifest_rel_path,
                               const CompileOptions& options,
                               const std::vector<CompiledLayer>& layers) {
  CompiledArtifact artifact;
  artifact.manifest_path = manifest_rel_path;
  artifact.seed = options.config.rng_seed;
  artifact.error_budget = options.error_budget;
  artifact.center_mode = options.center_mode;
  artifact.config = options.config;
  for (const CompiledLayer& layer : layers) artifact.layers.push_back(layer.record);
  return artifact;
}

std::vector<EncodedLayer> encode_from_artifact(const NetworkManifest& manifest,
                                               const CompiledArtifact& artifact) {
  if (manifest.layers.size() != artifact.layers.size())
    throw std::runtime_error("artifact lists " + std::to_string(artifact.layers.size()) +
                             " layers but the manifest has " +
                             std::to_string(manifest.layers.size()));
  std::vector<EncodedLayer> out;
  for (std::size_t i = 0; i < manifest.layers.size(); ++i) {
    const LayerSpec& layer = manifest.layers[i];
    const LayerArtifact& record = artifact.layers[i];
    if (layer.name != record.name)
      throw std::runtime_error("artifact layer '" + record.name +
                               "' does not match manifest layer '" + layer.name + "'");
    try {
      out.push_back(encode_layer_with_centers(layer.weights.u8(), layer.out_channels,
                                              layer.filter_size(), record.slicing,
                                              artifact.config.rows, record.centers,
                                              layer.weight_zero_point));
    } catch (const std::exception& e) {
      throw std::runtime_error("layer '" + layer.name + "': " + e.what());
    }
  }
  return out;
}

}  // namespace copim
