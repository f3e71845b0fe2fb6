#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "copim/bitslice.hpp"
#include "copim/encoder.hpp"
#include "copim/tensor.hpp"
#include "copim/xbar.hpp"

namespace copim {

enum class LayerKind { fully_connected, convolution };
enum class Activation { identity, relu };

// Per-output-channel affine quantization of psums to 8b.
struct QuantParams {
  std::vector<double> scale{1.0};  // broadcast when length 1
  std::vector<double> bias{0.0};
  Activation activation = Activation::identity;
  bool output_signed = false;

  double scale_for(int channel) const;
  double bias_for(int channel) const;
  void validate(const std::string& context, int channels) const;
};

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::fully_connected;
  int in_channels = 0;   // input features for FC
  int out_channels = 0;  // output features / filters
  int kernel_h = 1, kernel_w = 1;
  int stride_h = 1, stride_w = 1;
  int pad_h = 0, pad_w = 0;

  std::string weights_path;  // as written in the manifest
  Tensor weights;            // u8; FC [out, in], conv [out, cin, kh, kw]

  QuantParams quant;
  bool input_signed = false;  // signed activations run as two pulse phases
  bool is_last_layer = false;
  int weight_zero_point = 128;
  int input_zero_point = 0;

  // Weights contributing to one output value (one "filter").
  int filter_size() const;
  void validate() const;
};

struct NetworkManifest {
  std::uint64_t seed = 0;
  std::filesystem::path base_dir;  // directory the manifest was loaded from
  std::string calibration_path;    // empty when absent
  Tensor calibration;              // loaded when calibration_path is set
  std::vector<LayerSpec> layers;

  static NetworkManifest load(const std::filesystem::path& path);
  std::string to_json() const;
};

// Serializes a manifest plus all referenced tensors into a directory.
void write_network_bundle(const std::filesystem::path& dir, const NetworkManifest& manifest,
                          const std::string& manifest_filename = "net.json");

const char* center_mode_name(CenterMode mode);
CenterMode center_mode_from_name(const std::string& name);

// Compiled per-layer record: the accepted slicing, per-(filter, chunk)
// centers, and the error measured for the accepted slicing.
struct LayerArtifact {
  std::string name;
  Slicing slicing;
  std::vector<std::vector<int>> centers;  // [filter][chunk]
  double measured_error = 0.0;
  bool budget_met = true;    // false marks the minimum-error fallback
  bool forced_last = false;  // last-layer rule applied
  int candidates_evaluated = 0;
};

struct CompiledArtifact {
  std::string manifest_path;  // relative to the artifact file
  std::uint64_t seed = 0;
  double error_budget = 0.09;
  CenterMode center_mode = CenterMode::optimal;
  CrossbarConfig config;
  std::vector<LayerArtifact> layers;

  static CompiledArtifact load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string to_json() const;
};

}  // namespace copim
