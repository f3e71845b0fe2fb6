#include "copim/ablation.hpp"

#include <stdexcept>

#include "copim/compiler.hpp"
#include "copim/oracle.hpp"
#include "copim/pipeline.hpp"

namespace copim {

namespace {

struct SetupSpec {
  std::string name;
  CrossbarConfig config;
  CenterMode mode = CenterMode::optimal;
  bool adaptive = false;      // run the slicing search instead of (2,2,2,2)
  bool speculative = false;
};

// Simulated network chain: each layer consumes the previous layer's
// simulated outputs, the way a deployment run would.
std::vector<MetricsRow> simulate_chain(const std::string& setup,
                                       const NetworkManifest& manifest,
                                       const std::vector<CompiledLayer>& compiled,
                                       const Tensor& inputs, const CrossbarConfig& config,
                                       const InputPlan& plan, int threads) {
  std::vector<MetricsRow> rows;
  Tensor activations = inputs;
  for (std::size_t i = 0; i < manifest.layers.size(); ++i) {
    LayerRunOptions opts;
    opts.threads = threads;
    opts.layer_index = static_cast<int>(i);
    LayerRunResult run = run_layer(manifest.layers[i], compiled[i].encoded, activations,
                                   config, plan, opts);
    rows.push_back({setup, manifest.layers[i].name, run.metrics});
    activations = std::move(run.outputs);
  }
  return rows;
}

}  // namespace

std::vector<MetricsRow> run_ablation(const NetworkManifest& manifest, const Tensor& inputs,
                                     double error_budget, std::uint64_t seed, int threads) {
  if (inputs.size() == 0) throw std::runtime_error("ablation: the input set is empty");
  if (manifest.calibration.size() == 0)
    throw std::runtime_error("ablation: manifest has no calibration_inputs");

  std::vector<SetupSpec> setups(4);
  setups[0].name = "isaac";
  setups[0].config.rows = 128;
  setups[0].config.adc_bits = 8;
  setups[0].config.adc_signed = false;
  setups[0].mode = CenterMode::unsigned_raw;

  setups[1].name = "center_offset";
  setups[1].config.rows = 512;
  setups[1].config.adc_bits = 7;
  setups[1].mode = CenterMode::optimal;

  setups[2] = setups[1];
  setups[2].name = "adaptive";
  setups[2].adaptive = true;

  setups[3] = setups[2];
  setups[3].name = "raella";
  setups[3].speculative = true;

  std::vector<MetricsRow> rows;
  std::vector<CompiledLayer> adaptive_compiled;  // shared by setups 3 and 4
  for (SetupSpec& setup : setups) {
    setup.config.rng_seed = seed;
    CompileOptions options;
    options.error_budget = error_budget;
    options.config = setup.config;
    options.center_mode = setup.mode;
    options.threads = threads;
    if (!setup.adaptive) options.fixed_slicing = Slicing({2, 2, 2, 2});

    const std::vector<CompiledLayer>* compiled = nullptr;
    std::vector<CompiledLayer> own;
    if (setup.adaptive && !adaptive_compiled.empty()) {
      compiled = &adaptive_compiled;
    } else {
      own = compile_network(manifest.layers, manifest.calibration, options);
      if (setup.adaptive) {
        adaptive_compiled = std::move(own);
        compiled = &adaptive_compiled;
      } else {
        compiled = &own;
      }
    }

    InputPlan plan = setup.speculative ? InputPlan::speculation() : InputPlan::recovery_only();
    std::vector<MetricsRow> setup_rows =
        simulate_chain(setup.name, manifest, *compiled, inputs, setup.config, plan, threads);
    rows.insert(rows.end(), setup_rows.begin(), setup_rows.end());
  }
  return rows;
}

std::vector<LadderPoint> run_saturation_ladder(const NetworkManifest& manifest,
                                               const Tensor& inputs, double error_budget,
                                               std::uint64_t seed, int threads) {
  if (inputs.size() == 0) throw std::runtime_error("saturation ladder: the input set is empty");

  CrossbarConfig config;
  config.rows = 512;
  config.adc_bits = 7;
  config.rng_seed = seed;

  struct Stage {
    std::string name;
    CenterMode mode;
    bool searched;   // use the compiled slicing instead of (4,4)
    bool recovery;   // 1b input slices instead of (4,4)
  };
  std::vector<Stage> stages = {{"unsigned", CenterMode::unsigned_raw, false, false},
                               {"center_offset", CenterMode::optimal, false, false},
                               {"adaptive", CenterMode::optimal, true, false},
                               {"recovery", CenterMode::optimal, true, true}};

  std::vector<LadderPoint> points(stages.size());
  for (std::size_t s = 0; s < stages.size(); ++s) points[s].stage = stages[s].name;

  // Per-layer activations are oracle-propagated so every stage sees the
  // same operands.
  Tensor activations = inputs;
  for (std::size_t i = 0; i < manifest.layers.size(); ++i) {
    const LayerSpec& layer = manifest.layers[i];

    SlicingChoice searched = find_best_slicing(layer, activations, error_budget, config,
                                               CenterMode::optimal, threads,
                                               static_cast<int>(i));
    for (std::size_t s = 0; s < stages.size(); ++s) {
      const Stage& stage = stages[s];
      Slicing weight_slicing = stage.searched ? searched.slicing : Slicing({4, 4});
      EncodedLayer encoded;
      if (stage.searched) {
        encoded = encode_layer_with_centers(layer.weights.u8(), layer.out_channels,
                                            layer.filter_size(), weight_slicing, config.rows,
                                            searched.centers, layer.weight_zero_point);
      } else {
        encoded = encode_layer(layer.weights.u8(), layer.out_channels, layer.filter_size(),
                               weight_slicing, config.rows, stage.mode,
                               layer.weight_zero_point);
      }
      InputPlan plan =
          stage.recovery ? InputPlan::recovery_only() : InputPlan::plain(Slicing({4, 4}));
      LayerRunOptions opts;
      opts.threads = threads;
      opts.layer_index = static_cast<int>(i);
      LayerRunResult run = run_layer(layer, encoded, activations, config, plan, opts);

      const PhaseStats& spec = run.metrics.speculation;
      const PhaseStats& rec = run.metrics.recovery;
      std::int64_t sums = spec.column_sums + rec.column_sums;
      std::int64_t sats = spec.window_saturations + rec.window_saturations;
      points[s].column_sums += sums;
      points[s].saturation_rate += static_cast<double>(sats);  // numerator for now
      points[s].weight_slicing = weight_slicing;
    }
    activations = ideal_layer(layer, activations).outputs;
  }

  for (LadderPoint& p : points)
    p.saturation_rate = p.column_sums ? p.saturation_rate / static_cast<double>(p.column_sums)
                                      : 0.0;
  return points;
}

}  // namespace copim
