#include "copim/commands.hpp"

#include <iostream>
#include <stdexcept>

#include "copim/ablation.hpp"
#include "copim/compiler.hpp"
#include "copim/oracle.hpp"
#include "copim/pipeline.hpp"
#include "copim/synth.hpp"

namespace copim {

namespace {

std::string relative_or_absolute(const std::filesystem::path& target,
                                 const std::filesystem::path& base_dir) {
  std::error_code ec;
  std::filesystem::path rel = std::filesystem::relative(target, base_dir, ec);
  if (ec || rel.empty()) return target.string();
  return rel.generic_string();
}

std::string trace_csv(const std::vector<TraceRow>& traces) {
  std::string text =
      "layer,chunk,filter,slice,pass,cycle,phase,raw_sum,pos_total,neg_total,"
      "noisy_sum,adc_out,converted,saturated\n";
  for (const TraceRow& t : traces) {
    text += std::to_string(t.layer);
    text += ',';
    text += std::to_string(t.chunk);
    text += ',';
    text += std::to_string(t.filter);
    text += ',';
    text += std::to_string(t.slice);
    text += ',';
    text += std::to_string(t.pass);
    text += ',';
    text += std::to_string(t.cycle);
    text += ',';
    text += t.phase == 0 ? "speculation" : "recovery";
    text += ',';
    text += std::to_string(t.raw_sum);
    text += ',';
    text += std::to_string(t.pos_total);
    text += ',';
    text += std::to_string(t.neg_total);
    text += ',';
    text += format_double(t.noisy_sum);
    text += ',';
    text += std::to_string(t.adc_out);
    text += ',';
    text += t.converted ? "1" : "0";
    text += ',';
    text += t.saturated ? "1" : "0";
    text += '\n';
  }
  return text;
}

}  // namespace

void cmd_compile(const CompileCmd& cmd) {
  NetworkManifest manifest = NetworkManifest::load(cmd.manifest);
  if (manifest.calibration.size() == 0)
    throw std::runtime_error(cmd.manifest.string() +
                             ": manifest has no calibration_inputs; compilation needs test "
                             "activations");

  CompileOptions options;
  options.error_budget = cmd.error_budget;
  options.config.rows = cmd.rows;
  options.config.adc_bits = cmd.adc_bits;
  options.config.noise_level = cmd.noise;
  options.config.rng_seed = cmd.seed.value_or(manifest.seed);
  options.center_mode = cmd.zero_offset ? CenterMode::zero_offset : CenterMode::optimal;
  options.threads = cmd.threads;
  if (cmd.fixed_slicing) options.fixed_slicing = Slicing::parse(*cmd.fixed_slicing);

  std::vector<CompiledLayer> compiled =
      compile_network(manifest.layers, manifest.calibration, options);

  std::filesystem::path out_dir = cmd.output.parent_path();
  if (out_dir.empty()) out_dir = ".";
  CompiledArtifact artifact = make_artifact(
      relative_or_absolute(std::filesystem::absolute(cmd.manifest),
                           std::filesystem::absolute(out_dir)),
      options, compiled);
  artifact.save(cmd.output);
}

void cmd_simulate(const SimulateCmd& cmd) {
  CompiledArtifact artifact = CompiledArtifact::load(cmd.artifact);
  std::filesystem::path artifact_dir = std::filesystem::absolute(cmd.artifact).parent_path();
  NetworkManifest manifest = NetworkManifest::load(artifact_dir / artifact.manifest_path);

  CrossbarConfig config = artifact.config;
  if (cmd.noise) config.noise_level = *cmd.noise;
  if (cmd.seed) config.rng_seed = *cmd.seed;

  InputPlan plan = cmd.no_speculation
                       ? InputPlan::recovery_only()
                       : InputPlan::speculation(cmd.spec_slicing
                                                    ? Slicing::parse(*cmd.spec_slicing)
                                                    : Slicing({4, 2, 2}));

  std::vector<EncodedLayer> encoded = encode_from_artifact(manifest, artifact);
  Tensor activations = read_tensor(cmd.input);

  std::vector<MetricsRow> rows;
  RunMetrics merged;
  std::vector<TraceRow> traces;
  std::string setup = plan.speculation_enabled() ? "speculation" : "recovery_only";
  for (std::size_t i = 0; i < manifest.layers.size(); ++i) {
    LayerRunOptions opts;
    opts.threads = cmd.threads;
    opts.collect_traces = cmd.traces.has_value();
    opts.layer_index = static_cast<int>(i);
    LayerRunResult run =
        run_layer(manifest.layers[i], encoded[i], activations, config, plan, opts);
    rows.push_back({setup, manifest.layers[i].name, run.metrics});
    merged.merge(run.metrics);
    if (cmd.traces)
      traces.insert(traces.end(), run.traces.begin(), run.traces.end());
    activations = std::move(run.outputs);
  }

  write_tensor(cmd.output, activations);
  write_metrics_csv(cmd.metrics, rows);
  if (cmd.histogram) write_histogram_csv(*cmd.histogram, merged);
  if (cmd.traces) write_file_atomic(*cmd.traces, trace_csv(traces));
}

void cmd_oracle(const OracleCmd& cmd) {
  NetworkManifest manifest = NetworkManifest::load(cmd.manifest);
  Tensor activations = read_tensor(cmd.input);
  Tensor psums;
  for (const LayerSpec& layer : manifest.layers) {
    OracleResult result = ideal_layer(layer, activations);
    activations = std::move(result.outputs);
    psums = std::move(result.psums);
  }
  write_tensor(cmd.output, activations);
  if (cmd.psums) write_tensor(*cmd.psums, psums);
}

void cmd_ablate(const AblateCmd& cmd) {
  NetworkManifest manifest = NetworkManifest::load(cmd.manifest);
  Tensor inputs = read_tensor(cmd.inputs);
  std::vector<MetricsRow> rows = run_ablation(manifest, inputs, cmd.error_budget,
                                              cmd.seed.value_or(manifest.seed), cmd.threads);
  write_metrics_csv(cmd.output, rows);

  if (!cmd.quiet) {
    // Relative ADC energy per setup from the cost model: exponential
    // Energy/Convert times measured Converts/MAC over utilization.
    std::cout << "setup          converts/mac  rel_adc_energy\n";
    std::string current;
    RunMetrics totals;
    double utilization = 1.0;
    int adc_bits = 8;
    auto flush = [&]() {
      if (current.empty()) return;
      double cpm = totals.converts_per_mac_measured();
      double energy = titanium_energy(adc_energy_per_convert(adc_bits), cpm,
                                      static_cast<double>(totals.total_macs), utilization);
      std::printf("%-14s %.6f      %.4g\n", current.c_str(), cpm, energy);
      totals = RunMetrics{};
    };
    for (const MetricsRow& row : rows) {
      if (row.setup != current) {
        flush();
        current = row.setup;
        adc_bits = row.setup == "isaac" ? 8 : 7;
      }
      totals.merge(row.metrics);
      utilization = row.metrics.utilization;
    }
    flush();
  }
}

void cmd_noise_sweep(const NoiseSweepCmd& cmd) {
  NetworkManifest manifest = NetworkManifest::load(cmd.manifest);
  if (manifest.calibration.size() == 0)
    throw std::runtime_error(cmd.manifest.string() + ": manifest has no calibration_inputs");
  Tensor inputs = read_tensor(cmd.inputs);

  std::string text = "noise,layer,slices,layer_error\n";
  for (double level : cmd.levels) {
    if (level < 0) throw std::runtime_error("noise sweep: negative noise level");
    CompileOptions options;
    options.error_budget = cmd.error_budget;
    options.config.noise_level = level;
    options.config.rng_seed = cmd.seed.value_or(manifest.seed);
    options.threads = cmd.threads;
    std::vector<CompiledLayer> compiled =
        compile_network(manifest.layers, manifest.calibration, options);

    // Per-layer error against the oracle on oracle-propagated activations,
    // simulated with the deployment plan at this noise level.
    Tensor activations = inputs;
    for (std::size_t i = 0; i < manifest.layers.size(); ++i) {
      const LayerSpec& layer = manifest.layers[i];
      OracleResult expected = ideal_layer(layer, activations);
      LayerRunOptions opts;
      opts.threads = cmd.threads;
      opts.layer_index = static_cast<int>(i);
      LayerRunResult run = run_layer(layer, compiled[i].encoded, activations, options.config,
                                     InputPlan::speculation(), opts);
      text += format_double(level);
      text += ',';
      text += layer.name;
      text += ',';
      text += std::to_string(compiled[i].record.slicing.count());
      text += ',';
      text += format_double(layer_error(expected.outputs, run.outputs));
      text += '\n';
      activations = std::move(expected.outputs);
    }
  }
  write_file_atomic(cmd.output, text);
}

void cmd_gen(const GenCmd& cmd) {
  NetworkManifest manifest = synth::demo_network(cmd.seed);
  write_network_bundle(cmd.outdir, manifest);
  write_tensor(cmd.outdir / "input.rtsr", synth::demo_input(cmd.seed, cmd.samples));
  std::cout << "wrote " << (cmd.outdir / "net.json").string()
            << " plus weight/calibration/input tensors\n";
}

}  // namespace copim
