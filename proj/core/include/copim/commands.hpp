#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace copim {

// File-level command implementations behind the CLI. Each throws
// std::runtime_error with a diagnostic on failure; the CLI maps that to a
// nonzero exit code. All outputs are written atomically and are
// byte-reproducible for fixed seeds and flags.

struct CompileCmd {
  std::filesystem::path manifest;
  std::filesystem::path output;
  double error_budget = 0.09;
  int rows = 512;
  int adc_bits = 7;
  double noise = 0.0;
  std::optional<std::uint64_t> seed;  // defaults to the manifest seed
  int threads = 1;
  bool zero_offset = false;                  // differential-encoding ablation mode
  std::optional<std::string> fixed_slicing;  // e.g. "2,2,2,2"
};
void cmd_compile(const CompileCmd& cmd);

struct SimulateCmd {
  std::filesystem::path artifact;
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path metrics;
  std::optional<std::filesystem::path> histogram;
  std::optional<std::filesystem::path> traces;
  bool no_speculation = false;
  std::optional<std::string> spec_slicing;  // e.g. "4,2,2"
  std::optional<double> noise;              // overrides the artifact noise level
  std::optional<std::uint64_t> seed;        // overrides the artifact seed
  int threads = 1;
};
void cmd_simulate(const SimulateCmd& cmd);

struct OracleCmd {
  std::filesystem::path manifest;
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::filesystem::path> psums;  // final-layer psums, i32
};
void cmd_oracle(const OracleCmd& cmd);

struct AblateCmd {
  std::filesystem::path manifest;
  std::filesystem::path inputs;
  std::filesystem::path output;  // metrics CSV
  double error_budget = 0.09;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool quiet = false;
};
void cmd_ablate(const AblateCmd& cmd);

struct NoiseSweepCmd {
  std::filesystem::path manifest;
  std::filesystem::path inputs;
  std::filesystem::path output;  // CSV: noise,layer,slices,layer_error
  std::vector<double> levels = {0.0, 0.04, 0.08, 0.12};
  double error_budget = 0.09;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};
void cmd_noise_sweep(const NoiseSweepCmd& cmd);

struct GenCmd {
  std::filesystem::path outdir;
  std::uint64_t seed = 1;
  int samples = 2;
};
void cmd_gen(const GenCmd& cmd);

}  // namespace copim
