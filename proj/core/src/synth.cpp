#include "copim/synth.hpp"

#include <algorithm>
#include <cmath>

#include "copim/rng.hpp"

namespace copim::synth {

namespace {

std::uint8_t clip_u8(double v) {
  long r = std::lround(v);
  return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

std::size_t count_of(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

}  // namespace

Tensor bell_weights(int filters, int k, double mean, double sigma, std::uint64_t seed) {
  rng::Stream stream = rng::stream_for({seed, 0xBE11});
  std::vector<std::uint8_t> values(static_cast<std::size_t>(filters) *
                                   static_cast<std::size_t>(k));
  for (auto& v : values) v = clip_u8(stream.gaussian(mean, sigma));
  return Tensor::from_u8({static_cast<std::uint32_t>(filters), static_cast<std::uint32_t>(k)},
                         std::move(values));
}

Tensor skewed_inputs(std::vector<std::uint32_t> dims, double mean, double zero_prob,
                     std::uint64_t seed) {
  rng::Stream stream = rng::stream_for({seed, 0x5CE1});
  std::vector<std::uint8_t> values(count_of(dims));
  for (auto& v : values)
    v = stream.bernoulli(zero_prob) ? 0 : clip_u8(stream.exponential(mean));
  return Tensor::from_u8(std::move(dims), std::move(values));
}

Tensor signed_inputs(std::vector<std::uint32_t> dims, double sigma, std::uint64_t seed) {
  rng::Stream stream = rng::stream_for({seed, 0x516E});
  std::vector<std::int8_t> values(count_of(dims));
  for (auto& v : values) {
    long r = std::lround(stream.gaussian(0.0, sigma));
    v = static_cast<std::int8_t>(std::clamp(r, -128L, 127L));
  }
  return Tensor::from_i8(std::move(dims), std::move(values));
}

LayerSpec fc_layer(const std::string& name, int in_features, int out_features, Tensor weights,
                   const LayerSetup& setup) {
  LayerSpec layer;
  layer.name = name;
  layer.kind = LayerKind::fully_connected;
  layer.in_channels = in_features;
  layer.out_channels = out_features;
  layer.weights = std::move(weights);
  layer.weights_path = name + "_w.rtsr";
  layer.quant.scale = {setup.scale};
  layer.quant.bias = {setup.bias};
  layer.quant.activation = setup.activation;
  layer.quant.output_signed = setup.output_signed;
  layer.input_signed = setup.input_signed;
  layer.weight_zero_point = setup.weight_zero_point;
  layer.input_zero_point = setup.input_zero_point;
  layer.is_last_layer = setup.is_last;
  return layer;
}

LayerSpec conv_layer(const std::string& name, int in_channels, int out_channels, int kernel,
                     int stride, int pad, Tensor weights, const LayerSetup& setup) {
  LayerSpec layer;
  layer.name = name;
  layer.kind = LayerKind::convolution;
  layer.in_channels = in_channels;
  layer.out_channels = out_channels;
  layer.kernel_h = layer.kernel_w = kernel;
  layer.stride_h = layer.stride_w = stride;
  layer.pad_h = layer.pad_w = pad;
  layer.weights = std::move(weights);
  layer.weights_path = name + "_w.rtsr";
  layer.quant.scale = {setup.scale};
  layer.quant.bias = {setup.bias};
  layer.quant.activation = setup.activation;
  layer.quant.output_signed = setup.output_signed;
  layer.input_signed = setup.input_signed;
  layer.weight_zero_point = setup.weight_zero_point;
  layer.input_zero_point = setup.input_zero_point;
  layer.is_last_layer = setup.is_last;
  return layer;
}

NetworkManifest demo_network(std::uint64_t seed) {
  NetworkManifest m;
  m.seed = seed;

  LayerSetup conv1_setup;
  conv1_setup.scale = 0.02;
  conv1_setup.activation = Activation::relu;
  Tensor w1 = bell_weights(8, 3 * 3 * 3, 128.0, 9.0, seed + 1);
  w1 = Tensor::from_u8({8, 3, 3, 3}, {w1.u8().begin(), w1.u8().end()});
  m.layers.push_back(conv_layer("conv1", 3, 8, 3, 1, 1, std::move(w1), conv1_setup));

  LayerSetup conv2_setup;
  conv2_setup.scale = 0.01;
  conv2_setup.activation = Activation::relu;
  Tensor w2 = bell_weights(12, 8 * 3 * 3, 128.0, 7.0, seed + 2);
  w2 = Tensor::from_u8({12, 8, 3, 3}, {w2.u8().begin(), w2.u8().end()});
  m.layers.push_back(conv_layer("conv2", 8, 12, 3, 2, 0, std::move(w2), conv2_setup));

  LayerSetup fc_setup;
  fc_setup.scale = 0.01;
  fc_setup.is_last = true;
  int fc_in = 12 * 3 * 3;  // conv2 output on an 8x8 image
  m.layers.push_back(
      fc_layer("fc1", fc_in, 10, bell_weights(10, fc_in, 128.0, 8.0, seed + 3), fc_setup));

  m.calibration_path = "calib.rtsr";
  m.calibration = skewed_inputs({10, 3, 8, 8}, 14.0, 0.4, seed + 4);
  return m;
}

Tensor demo_input(std::uint64_t seed, int samples) {
  return skewed_inputs({static_cast<std::uint32_t>(samples), 3, 8, 8}, 14.0, 0.4, seed + 5);
}

}  // namespace copim::synth
