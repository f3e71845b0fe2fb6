#include <doctest.h>

#include <vector>

#include "copim/oracle.hpp"
#include "copim/pipeline.hpp"
#include "copim/rng.hpp"
#include "copim/synth.hpp"

using namespace copim;

namespace {

// Second, independent convolution: direct loops on the [N,C,H,W] tensor,
// no patch matrix.
std::vector<std::int64_t> direct_conv_psums(const LayerSpec& layer, const Tensor& input) {
  auto d = input.dims();
  int n_samples = static_cast<int>(d[0]);
  int h = static_cast<int>(d[2]);
  int w = static_cast<int>(d[3]);
  int out_h = (h + 2 * layer.pad_h - layer.kernel_h) / layer.stride_h + 1;
  int out_w = (w + 2 * layer.pad_w - layer.kernel_w) / layer.stride_w + 1;
  std::vector<std::int64_t> psums;
  auto in = input.u8();
  auto wt = layer.weights.u8();
  for (int n = 0; n < n_samples; ++n)
    for (int f = 0; f < layer.out_channels; ++f)
      for (int oy = 0; oy < out_h; ++oy)
        for (int ox = 0; ox < out_w; ++ox) {
          std::int64_t acc = 0;
          for (int c = 0; c < layer.in_channels; ++c)
            for (int ky = 0; ky < layer.kernel_h; ++ky)
              for (int kx = 0; kx < layer.kernel_w; ++kx) {
                int y = oy * layer.stride_h - layer.pad_h + ky;
                int x = ox * layer.stride_w - layer.pad_w + kx;
                int value =
                    (y >= 0 && y < h && x >= 0 && x < w)
                        ? in[((static_cast<std::size_t>(n) * layer.in_channels + c) * h + y) * w + x]
                        : layer.input_zero_point;
                int weight =
                    wt[((static_cast<std::size_t>(f) * layer.in_channels + c) * layer.kernel_h + ky) *
                           layer.kernel_w + kx];
                acc += static_cast<std::int64_t>(weight - layer.weight_zero_point) *
                       (value - layer.input_zero_point);
              }
          psums.push_back(acc);
        }
  return psums;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("fully connected psums by hand") {
  synth::LayerSetup setup;
  setup.weight_zero_point = 0;
  setup.input_zero_point = 0;
  setup.scale = 1.0;
  LayerSpec layer = synth::fc_layer("fc", 2, 2, Tensor::from_u8({2, 2}, {1, 2, 3, 4}), setup);
  Tensor input = Tensor::from_u8({2}, {5, 6});
  OracleResult r = ideal_layer(layer, input);
  REQUIRE(r.psums.dims() == std::vector<std::uint32_t>{1, 2});
  CHECK(r.psums.i32()[0] == 17);
  CHECK(r.psums.i32()[1] == 39);
  CHECK(r.outputs.u8()[0] == 17);
  CHECK(r.outputs.u8()[1] == 39);
  CHECK(r.max_abs_psum == 39);
}

TEST_CASE("1x1 conv with unit weight is a clamped identity") {
  synth::LayerSetup setup;
  setup.weight_zero_point = 0;
  setup.input_zero_point = 0;
  setup.scale = 1.0;
  LayerSpec layer =
      synth::conv_layer("c", 1, 1, 1, 1, 0, Tensor::from_u8({1, 1, 1, 1}, {1}), setup);
  Tensor input = synth::skewed_inputs({1, 1, 4, 4}, 20.0, 0.2, 5);
  OracleResult r = ideal_layer(layer, input);
  REQUIRE(r.outputs.dims() == std::vector<std::uint32_t>{1, 1, 4, 4});
  for (std::size_t i = 0; i < input.size(); ++i) CHECK(r.outputs.u8()[i] == input.u8()[i]);
}

TEST_CASE("im2col examples") {
  synth::LayerSetup setup;
  LayerSpec one_by_one =
      synth::conv_layer("c", 2, 1, 1, 1, 0, Tensor(DType::u8, {1, 2, 1, 1}), setup);
  Tensor input = Tensor::from_u8({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  Tensor matrix = im2col(input, one_by_one);
  // 1x1 kernel, stride 1: the matrix is the flattened input.
  REQUIRE(matrix.dims() == std::vector<std::uint32_t>{2, 4});
  for (int i = 0; i < 8; ++i) CHECK(matrix.u8()[static_cast<std::size_t>(i)] == i + 1);

  LayerSpec two_by_two =
      synth::conv_layer("c2", 1, 1, 2, 1, 0, Tensor(DType::u8, {1, 1, 2, 2}), setup);
  Tensor small = Tensor::from_u8({1, 2, 2}, {9, 8, 7, 6});
  Tensor single = im2col(small, two_by_two);
  // 2x2 input, 2x2 kernel, no padding: one column of the 4 values.
  REQUIRE(single.dims() == std::vector<std::uint32_t>{4, 1});
  CHECK(single.u8()[0] == 9);
  CHECK(single.u8()[1] == 8);
  CHECK(single.u8()[2] == 7);
  CHECK(single.u8()[3] == 6);

  CHECK_THROWS(im2col(Tensor(DType::u8, {2, 2}), two_by_two));  // not [C,H,W]
  LayerSpec fc = synth::fc_layer("f", 4, 1, Tensor(DType::u8, {1, 4}), setup);
  CHECK_THROWS(im2col(small, fc));
}

TEST_CASE("conv matches the direct convolution on random cases") {
  rng::Stream stream(99);
  for (int trial = 0; trial < 12; ++trial) {
    synth::LayerSetup setup;
    setup.weight_zero_point = stream.uniform_int(0, 255);
    setup.input_zero_point = stream.uniform_int(0, 40);
    setup.scale = 0.01;
    setup.activation = Activation::relu;
    int cin = stream.uniform_int(1, 3);
    int cout = stream.uniform_int(1, 4);
    int kernel = stream.uniform_int(1, 3);
    int stride = stream.uniform_int(1, 2);
    int pad = stream.uniform_int(0, 1);
    int hw = stream.uniform_int(kernel, 7);
    LayerSpec layer = synth::conv_layer(
        "rand", cin, cout, kernel, stride, pad,
        synth::bell_weights(cout, cin * kernel * kernel, 120.0, 40.0, 1000 + trial), setup);
    layer.weights = Tensor::from_u8(
        {static_cast<std::uint32_t>(cout), static_cast<std::uint32_t>(cin),
         static_cast<std::uint32_t>(kernel), static_cast<std::uint32_t>(kernel)},
        {layer.weights.u8().begin(), layer.weights.u8().end()});
    Tensor input = synth::skewed_inputs(
        {2, static_cast<std::uint32_t>(cin), static_cast<std::uint32_t>(hw),
         static_cast<std::uint32_t>(hw)},
        25.0, 0.3, 2000 + trial);
    OracleResult r = ideal_layer(layer, input);
    std::vector<std::int64_t> direct = direct_conv_psums(layer, input);
    REQUIRE(r.psums.size() == direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i)
      CHECK(r.psums.i32()[i] == static_cast<std::int32_t>(direct[i]));
  }
}

TEST_CASE("conv via im2col equals direct matmul on the patch matrix") {
  synth::LayerSetup setup;
  setup.weight_zero_point = 100;
  LayerSpec layer =
      synth::conv_layer("c", 2, 3, 3, 1, 1, synth::bell_weights(3, 18, 128, 30, 7), setup);
  layer.weights =
      Tensor::from_u8({3, 2, 3, 3}, {layer.weights.u8().begin(), layer.weights.u8().end()});
  Tensor input = synth::skewed_inputs({1, 2, 5, 5}, 30.0, 0.2, 8);
  OracleResult r = ideal_layer(layer, input);

  Tensor sample = Tensor::from_u8({2, 5, 5}, {input.u8().begin(), input.u8().end()});
  Tensor matrix = im2col(sample, layer);  // [K, P]
  int k = static_cast<int>(matrix.dims()[0]);
  int positions = static_cast<int>(matrix.dims()[1]);
  for (int f = 0; f < 3; ++f)
    for (int p = 0; p < positions; ++p) {
      std::int64_t acc = 0;
      for (int i = 0; i < k; ++i)
        acc += static_cast<std::int64_t>(
                   layer.weights.u8()[static_cast<std::size_t>(f) * k + i] - 100) *
               matrix.u8()[static_cast<std::size_t>(i) * positions + p];
      CHECK(r.psums.i32()[static_cast<std::size_t>(f) * positions + p] ==
            static_cast<std::int32_t>(acc));
    }
}

TEST_CASE("signed-input layers consume i8 tensors") {
  synth::LayerSetup setup;
  setup.input_signed = true;
  setup.output_signed = true;
  setup.weight_zero_point = 128;
  setup.scale = 0.05;
  LayerSpec layer =
      synth::fc_layer("bert", 16, 4, synth::bell_weights(4, 16, 128, 20, 3), setup);
  Tensor input = synth::signed_inputs({3, 16}, 40.0, 4);
  OracleResult r = ideal_layer(layer, input);
  CHECK(r.outputs.dtype() == DType::i8);

  std::int64_t acc = 0;
  for (int i = 0; i < 16; ++i)
    acc += static_cast<std::int64_t>(layer.weights.u8()[static_cast<std::size_t>(i)] - 128) *
           input.i8()[static_cast<std::size_t>(i)];
  CHECK(r.psums.i32()[0] == static_cast<std::int32_t>(acc));

  Tensor wrong = synth::skewed_inputs({3, 16}, 20.0, 0.2, 5);
  CHECK_THROWS(ideal_layer(layer, wrong));  // dtype mismatch
}

TEST_CASE("shape errors carry the layer name") {
  synth::LayerSetup setup;
  LayerSpec layer = synth::fc_layer("fc7", 8, 2, Tensor(DType::u8, {2, 8}), setup);
  Tensor bad = Tensor(DType::u8, {3, 9});
  try {
    ideal_layer(layer, bad);
    FAIL("expected a shape error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("fc7") != std::string::npos);
  }
}

TEST_CASE("oracle psums stay within 16b for spec-sized layers") {
  synth::LayerSetup setup;
  setup.scale = 0.002;
  LayerSpec layer =
      synth::fc_layer("wide", 512, 8, synth::bell_weights(8, 512, 128, 10, 17), setup);
  Tensor input = synth::skewed_inputs({4, 512}, 12.0, 0.4, 18);
  OracleResult r = ideal_layer(layer, input);
  CHECK(r.max_abs_psum <= 32767);
}

}  // TEST_SUITE
