// copim: compile-time preprocessing and bit-exact functional simulation of
// center+offset analog PIM inference.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "copim/commands.hpp"

namespace {

struct SeedOpt {
  std::uint64_t value = 0;
  bool set = false;
};

void add_seed(CLI::App* app, SeedOpt& seed) {
  app->add_option_function<std::uint64_t>(
         "--seed", [&seed](std::uint64_t v) { seed.value = v; seed.set = true; },
         "RNG seed (default: the manifest seed)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional simulator and compiler for center+offset analog PIM inference"};
  app.require_subcommand(1);

  copim::CompileCmd compile_cmd;
  SeedOpt compile_seed;
  CLI::App* compile = app.add_subcommand(
      "compile", "Search per-layer weight slicings and solve centers");
  compile->add_option("manifest", compile_cmd.manifest, "network manifest JSON")->required();
  compile->add_option("-o,--output", compile_cmd.output, "compiled artifact path")->required();
  compile->add_option("--error-budget", compile_cmd.error_budget,
                      "mean |error| allowed on nonzero 8b outputs");
  compile->add_option("--rows", compile_cmd.rows, "crossbar rows");
  compile->add_option("--adc-bits", compile_cmd.adc_bits, "signed ADC resolution");
  compile->add_option("--noise", compile_cmd.noise, "noise level E for noise-aware compilation");
  compile->add_option("--threads", compile_cmd.threads, "worker threads");
  compile->add_flag("--zero-offset", compile_cmd.zero_offset,
                    "pin centers at the weight zero point (differential encoding)");
  compile->add_option("--fixed-slicing",
                      [&compile_cmd](const std::vector<std::string>& v) {
                        compile_cmd.fixed_slicing = v.back();
                        return true;
                      },
                      "skip the search and use this slicing, e.g. 2,2,2,2");
  add_seed(compile, compile_seed);

  copim::SimulateCmd sim_cmd;
  SeedOpt sim_seed;
  double sim_noise = -1.0;
  std::string sim_spec_slicing;
  std::string sim_histogram, sim_traces;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a compiled network");
  simulate->add_option("artifact", sim_cmd.artifact, "compiled artifact JSON")->required();
  simulate->add_option("input", sim_cmd.input, "input tensor (.rtsr)")->required();
  simulate->add_option("--out", sim_cmd.output, "output tensor path")->required();
  simulate->add_option("--metrics", sim_cmd.metrics, "metrics CSV path")->required();
  simulate->add_option("--histogram", sim_histogram, "column-sum histogram CSV path");
  simulate->add_option("--emit-traces", sim_traces, "per-column trace CSV path");
  simulate->add_flag("--no-speculation", sim_cmd.no_speculation,
                     "run the eight 1b recovery slices only");
  simulate->add_option("--spec-slicing", sim_spec_slicing,
                       "speculative input slicing (default 4,2,2)");
  simulate->add_option("--noise", sim_noise, "override the artifact noise level");
  simulate->add_option("--threads", sim_cmd.threads, "worker threads");
  add_seed(simulate, sim_seed);

  copim::OracleCmd oracle_cmd;
  std::string oracle_psums;
  CLI::App* oracle = app.add_subcommand("oracle", "Run the exact integer reference");
  oracle->add_option("manifest", oracle_cmd.manifest, "network manifest JSON")->required();
  oracle->add_option("input", oracle_cmd.input, "input tensor (.rtsr)")->required();
  oracle->add_option("--out", oracle_cmd.output, "output tensor path")->required();
  oracle->add_option("--psums", oracle_psums, "final-layer psum tensor path");

  copim::AblateCmd ablate_cmd;
  SeedOpt ablate_seed;
  CLI::App* ablate = app.add_subcommand(
      "ablate", "Measure the four accumulative strategy setups");
  ablate->add_option("manifest", ablate_cmd.manifest, "network manifest JSON")->required();
  ablate->add_option("inputs", ablate_cmd.inputs, "input tensor (.rtsr)")->required();
  ablate->add_option("-o,--output", ablate_cmd.output, "metrics CSV path")->required();
  ablate->add_option("--error-budget", ablate_cmd.error_budget, "slicing-search budget");
  ablate->add_option("--threads", ablate_cmd.threads, "worker threads");
  ablate->add_flag("--quiet", ablate_cmd.quiet, "suppress the stdout summary");
  add_seed(ablate, ablate_seed);

  copim::NoiseSweepCmd sweep_cmd;
  SeedOpt sweep_seed;
  CLI::App* sweep = app.add_subcommand(
      "noise-sweep", "Recompile and simulate across noise levels");
  sweep->add_option("manifest", sweep_cmd.manifest, "network manifest JSON")->required();
  sweep->add_option("inputs", sweep_cmd.inputs, "input tensor (.rtsr)")->required();
  sweep->add_option("-o,--output", sweep_cmd.output, "CSV path")->required();
  sweep->add_option("--levels", sweep_cmd.levels, "noise levels E")->delimiter(',');
  sweep->add_option("--error-budget", sweep_cmd.error_budget, "slicing-search budget");
  sweep->add_option("--threads", sweep_cmd.threads, "worker threads");
  add_seed(sweep, sweep_seed);

  copim::GenCmd gen_cmd;
  CLI::App* gen = app.add_subcommand("gen", "Write a small synthetic demo network");
  gen->add_option("outdir", gen_cmd.outdir, "output directory")->required();
  gen->add_option("--seed", gen_cmd.seed, "generator seed");
  gen->add_option("--samples", gen_cmd.samples, "samples in input.rtsr");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*compile) {
      if (compile_seed.set) compile_cmd.seed = compile_seed.value;
      copim::cmd_compile(compile_cmd);
    } else if (*simulate) {
      if (sim_seed.set) sim_cmd.seed = sim_seed.value;
      if (sim_noise >= 0) sim_cmd.noise = sim_noise;
      if (!sim_spec_slicing.empty()) sim_cmd.spec_slicing = sim_spec_slicing;
      if (!sim_histogram.empty()) sim_cmd.histogram = sim_histogram;
      if (!sim_traces.empty()) sim_cmd.traces = sim_traces;
      copim::cmd_simulate(sim_cmd);
    } else if (*oracle) {
      if (!oracle_psums.empty()) oracle_cmd.psums = oracle_psums;
      copim::cmd_oracle(oracle_cmd);
    } else if (*ablate) {
      if (ablate_seed.set) ablate_cmd.seed = ablate_seed.value;
      copim::cmd_ablate(ablate_cmd);
    } else if (*sweep) {
      if (sweep_seed.set) sweep_cmd.seed = sweep_seed.value;
      copim::cmd_noise_sweep(sweep_cmd);
    } else if (*gen) {
      copim::cmd_gen(gen_cmd);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
