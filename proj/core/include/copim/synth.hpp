#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "copim/network.hpp"
#include "copim/tensor.hpp"

namespace copim::synth {

// u8 [filters, k] weights: clipped rounded Gaussians around mean.
Tensor bell_weights(int filters, int k, double mean, double sigma, std::uint64_t seed);

// Right-skewed u8 activations: zero with probability zero_prob, otherwise
// exponential with the given mean, clipped to [0, 255]. Mimics the sparse
// small-valued distributions of quantized post-ReLU activations.
Tensor skewed_inputs(std::vector<std::uint32_t> dims, double mean, double zero_prob,
                     std::uint64_t seed);

// i8 activations: clipped rounded Gaussians, for signed-input layers.
Tensor signed_inputs(std::vector<std::uint32_t> dims, double sigma, std::uint64_t seed);

struct LayerSetup {
  double scale = 1.0;
  double bias = 0.0;
  Activation activation = Activation::identity;
  bool output_signed = false;
  bool input_signed = false;
  int weight_zero_point = 128;
  int input_zero_point = 0;
  bool is_last = false;
};

LayerSpec fc_layer(const std::string& name, int in_features, int out_features, Tensor weights,
                   const LayerSetup& setup = {});
LayerSpec conv_layer(const std::string& name, int in_channels, int out_channels, int kernel,
                     int stride, int pad, Tensor weights, const LayerSetup& setup = {});

// Small conv+conv+fc demo network with bell-curve weights, right-skewed
// calibration activations, and tensor paths filled in for bundling.
NetworkManifest demo_network(std::uint64_t seed);

// Sample input batch matching demo_network's first layer.
Tensor demo_input(std::uint64_t seed, int samples = 2);

}  // namespace copim::synth
