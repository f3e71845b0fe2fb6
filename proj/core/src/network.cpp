#include "copim/network.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace copim {

using nlohmann::json;

double QuantParams::scale_for(int channel) const {
  return scale.size() == 1 ? scale[0] : scale[static_cast<std::size_t>(channel)];
}

double QuantParams::bias_for(int channel) const {
  return bias.size() == 1 ? bias[0] : bias[static_cast<std::size_t>(channel)];
}

void QuantParams::validate(const std::string& context, int channels) const {
  auto check_len = [&](const std::vector<double>& v, const char* what) {
    if (v.size() != 1 && v.size() != static_cast<std::size_t>(channels))
      throw std::runtime_error(context + ": " + what + " must have 1 or " +
                               std::to_string(channels) + " entries, got " +
                               std::to_string(v.size()));
  };
  check_len(scale, "scale");
  check_len(bias, "bias");
  for (double s : scale)
    if (!(s > 0)) throw std::runtime_error(context + ": quantization scale must be > 0");
}

int LayerSpec::filter_size() const {
  return kind == LayerKind::fully_connected ? in_channels
                                            : in_channels * kernel_h * kernel_w;
}

void LayerSpec::validate() const {
  std::string ctx = "layer '" + name + "'";
  if (in_channels < 1 || out_channels < 1)
    throw std::runtime_error(ctx + ": channel counts must be >= 1");
  if (weight_zero_point < 0 || weight_zero_point > 255)
    throw std::runtime_error(ctx + ": weight zero point out of [0,255]");
  if (input_zero_point < 0 || input_zero_point > 255)
    throw std::runtime_error(ctx + ": input zero point out of [0,255]");
  if (input_signed && input_zero_point != 0)
    throw std::runtime_error(ctx + ": signed inputs are already centered; input zero point must be 0");
  if (weights.dtype() != DType::u8)
    throw std::runtime_error(ctx + ": weights must be u8, got " + weights.shape_str());

  std::vector<std::uint32_t> expect;
  if (kind == LayerKind::fully_connected) {
    expect = {static_cast<std::uint32_t>(out_channels), static_cast<std::uint32_t>(in_channels)};
  } else {
    if (kernel_h < 1 || kernel_w < 1 || stride_h < 1 || stride_w < 1)
      throw std::runtime_error(ctx + ": kernel and stride must be >= 1");
    if (pad_h < 0 || pad_w < 0) throw std::runtime_error(ctx + ": negative padding");
    expect = {static_cast<std::uint32_t>(out_channels), static_cast<std::uint32_t>(in_channels),
              static_cast<std::uint32_t>(kernel_h), static_cast<std::uint32_t>(kernel_w)};
  }
  if (weights.dims() != expect)
    throw std::runtime_error(ctx + ": weight tensor is " + weights.shape_str() +
                             ", inconsistent with the declared shape");
  quant.validate(ctx, out_channels);
}

namespace {

LayerKind kind_from_name(const std::string& s, const std::string& ctx) {
  if (s == "fully_connected") return LayerKind::fully_connected;
  if (s == "convolution") return LayerKind::convolution;
  throw std::runtime_error(ctx + ": unknown layer kind '" + s + "'");
}

Activation activation_from_name(const std::string& s, const std::string& ctx) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw std::runtime_error(ctx + ": unknown activation '" + s + "'");
}

std::vector<double> number_or_array(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  return {j.get<double>()};
}

json number_or_array_to_json(const std::vector<double>& v) {
  if (v.size() == 1) return json(v[0]);
  return json(v);
}

}  // namespace

NetworkManifest NetworkManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }

  NetworkManifest m;
  m.base_dir = path.parent_path();
  m.seed = j.value("seed", std::uint64_t{0});
  int default_wzp = 128, default_izp = 0;
  if (j.contains("defaults")) {
    default_wzp = j["defaults"].value("weight_zero_point", 128);
    default_izp = j["defaults"].value("input_zero_point", 0);
  }
  if (j.contains("calibration_inputs")) {
    m.calibration_path = j["calibration_inputs"].get<std::string>();
    m.calibration = read_tensor(m.base_dir / m.calibration_path);
  }
  if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty())
    throw std::runtime_error(path.string() + ": manifest has no layers");

  std::size_t n = j["layers"].size();
  for (std::size_t i = 0; i < n; ++i) {
    const json& lj = j["layers"][i];
    LayerSpec layer;
    layer.name = lj.value("name", "layer" + std::to_string(i));
    std::string ctx = "layer '" + layer.name + "'";
    layer.kind = kind_from_name(lj.at("kind").get<std::string>(), ctx);
    layer.in_channels = lj.at("in_channels").get<int>();
    layer.out_channels = lj.at("out_channels").get<int>();
    if (layer.kind == LayerKind::convolution) {
      auto pair_of = [&](const char* key, int def) -> std::pair<int, int> {
        if (!lj.contains(key)) return {def, def};
        const json& v = lj[key];
        if (v.is_array()) return {v.at(0).get<int>(), v.at(1).get<int>()};
        return {v.get<int>(), v.get<int>()};
      };
      std::tie(layer.kernel_h, layer.kernel_w) = pair_of("kernel", 1);
      std::tie(layer.stride_h, layer.stride_w) = pair_of("stride", 1);
      std::tie(layer.pad_h, layer.pad_w) = pair_of("padding", 0);
    }
    layer.weights_path = lj.at("weights").get<std::string>();
    layer.weights = read_tensor(m.base_dir / layer.weights_path);
    if (lj.contains("scale")) layer.quant.scale = number_or_array(lj["scale"]);
    if (lj.contains("bias")) layer.quant.bias = number_or_array(lj["bias"]);
    layer.quant.activation =
        activation_from_name(lj.value("activation", std::string("identity")), ctx);
    layer.quant.output_signed = lj.value("output_signed", false);
    layer.input_signed = lj.value("input_signed", false);
    layer.weight_zero_point = lj.value("weight_zero_point", default_wzp);
    layer.input_zero_point = lj.value("input_zero_point", default_izp);
    layer.is_last_layer = lj.value("is_last_layer", i + 1 == n);
    layer.validate();
    m.layers.push_back(std::move(layer));
  }
  return m;
}

std::string NetworkManifest::to_json() const {
  json j;
  j["seed"] = seed;
  if (!calibration_path.empty()) j["calibration_inputs"] = calibration_path;
  json layers_json = json::array();
  std::size_t n = layers.size();
  for (std::size_t i = 0; i < n; ++i) {
    const LayerSpec& layer = layers[i];
    json lj;
    lj["name"] = layer.name;
    lj["kind"] = layer.kind == LayerKind::fully_connected ? "fully_connected" : "convolution";
    lj["in_channels"] = layer.in_channels;
    lj["out_channels"] = layer.out_channels;
    if (layer.kind == LayerKind::convolution) {
      lj["kernel"] = {layer.kernel_h, layer.kernel_w};
      lj["stride"] = {layer.stride_h, layer.stride_w};
      lj["padding"] = {layer.pad_h, layer.pad_w};
    }
    lj["weights"] = layer.weights_path;
    lj["scale"] = number_or_array_to_json(layer.quant.scale);
    lj["bias"] = number_or_array_to_json(layer.quant.bias);
    lj["activation"] = layer.quant.activation == Activation::relu ? "relu" : "identity";
    lj["output_signed"] = layer.quant.output_signed;
    lj["input_signed"] = layer.input_signed;
    lj["weight_zero_point"] = layer.weight_zero_point;
    lj["input_zero_point"] = layer.input_zero_point;
    if (layer.is_last_layer != (i + 1 == n)) lj["is_last_layer"] = layer.is_last_layer;
    layers_json.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers_json);
  return j.dump(2) + "\n";
}

void write_network_bundle(const std::filesystem::path& dir, const NetworkManifest& manifest,
                          const std::string& manifest_filename) {
  std::filesystem::create_directories(dir);
  for (const LayerSpec& layer : manifest.layers) {
    if (layer.weights_path.empty())
      throw std::runtime_error("layer '" + layer.name + "': no weights path set");
    write_tensor(dir / layer.weights_path, layer.weights);
  }
  if (!manifest.calibration_path.empty())
    write_tensor(dir / manifest.calibration_path, manifest.calibration);
  write_file_atomic(dir / manifest_filename, manifest.to_json());
}

const char* center_mode_name(CenterMode mode) {
  switch (mode) {
    case CenterMode::optimal: return "optimal";
    case CenterMode::zero_offset: return "zero_offset";
    case CenterMode::unsigned_raw: return "unsigned";
  }
  return "?";
}

CenterMode center_mode_from_name(const std::string& name) {
  if (name == "optimal") return CenterMode::optimal;
  if (name == "zero_offset") return CenterMode::zero_offset;
  if (name == "unsigned") return CenterMode::unsigned_raw;
  throw std::runtime_error("unknown center mode '" + name + "'");
}

CompiledArtifact CompiledArtifact::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open artifact: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (j.value("format", std::string()) != "copim-artifact")
    throw std::runtime_error(path.string() + ": not a compiled artifact");

  CompiledArtifact a;
  a.manifest_path = j.at("manifest").get<std::string>();
  a.seed = j.value("seed", std::uint64_t{0});
  a.error_budget = j.value("error_budget", 0.09);
  a.center_mode = center_mode_from_name(j.value("center_mode", std::string("optimal")));
  const json& cj = j.at("config");
  a.config.rows = cj.value("rows", 512);
  a.config.adc_bits = cj.value("adc_bits", 7);
  a.config.adc_signed = cj.value("adc_signed", true);
  a.config.dac_max_bits = cj.value("dac_max_bits", 4);
  a.config.noise_level = cj.value("noise_level", 0.0);
  a.config.rng_seed = a.seed;
  a.config.validate();

  for (const json& lj : j.at("layers")) {
    LayerArtifact la;
    la.name = lj.at("name").get<std::string>();
    la.slicing = Slicing(lj.at("slicing").get<std::vector<int>>());
    la.centers = lj.at("centers").get<std::vector<std::vector<int>>>();
    la.measured_error = lj.value("measured_error", 0.0);
    la.budget_met = lj.value("budget_met", true);
    la.forced_last = lj.value("forced_last", false);
    la.candidates_evaluated = lj.value("candidates_evaluated", 0);
    a.layers.push_back(std::move(la));
  }
  return a;
}

std::string CompiledArtifact::to_json() const {
  json j;
  j["format"] = "copim-artifact";
  j["version"] = 1;
  j["manifest"] = manifest_path;
  j["seed"] = seed;
  j["error_budget"] = error_budget;
  j["center_mode"] = center_mode_name(center_mode);
  j["config"] = {{"rows", config.rows},
                 {"adc_bits", config.adc_bits},
                 {"adc_signed", config.adc_signed},
                 {"dac_max_bits", config.dac_max_bits},
                 {"noise_level", config.noise_level}};
  json layers_json = json::array();
  for (const LayerArtifact& la : layers) {
    json lj;
    lj["name"] = la.name;
    lj["slicing"] = la.slicing.widths();
    lj["centers"] = la.centers;
    lj["measured_error"] = la.measured_error;
    lj["budget_met"] = la.budget_met;
    lj["forced_last"] = la.forced_last;
    lj["candidates_evaluated"] = la.candidates_evaluated;
    layers_json.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers_json);
  return j.dump(2) + "\n";
}

void CompiledArtifact::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json());
}

}  // namespace copim
