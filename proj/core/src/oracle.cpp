#include "copim/oracle.hpp"

#include <limits>
#include <stdexcept>

#include "copim/pipeline.hpp"

namespace copim {

namespace {

struct ConvGeometry {
  int samples;
  int height, width;
  int out_h, out_w;
};

ConvGeometry conv_geometry(const LayerSpec& layer, const std::vector<std::uint32_t>& dims) {
  std::string ctx = "layer '" + layer.name + "'";
  std::vector<std::uint32_t> d = dims;
  if (d.size() == 3) d.insert(d.begin(), 1);
  if (d.size() != 4)
    throw std::runtime_error(ctx + ": convolution input must be [C,H,W] or [N,C,H,W]");
  if (d[1] != static_cast<std::uint32_t>(layer.in_channels))
    throw std::runtime_error(ctx + ": input has " + std::to_string(d[1]) +
                             " channels, layer expects " + std::to_string(layer.in_channels));
  ConvGeometry g;
  g.samples = static_cast<int>(d[0]);
  g.height = static_cast<int>(d[2]);
  g.width = static_cast<int>(d[3]);
  int padded_h = g.height + 2 * layer.pad_h - layer.kernel_h;
  int padded_w = g.width + 2 * layer.pad_w - layer.kernel_w;
  if (padded_h < 0 || padded_w < 0)
    throw std::runtime_error(ctx + ": kernel larger than padded input");
  g.out_h = padded_h / layer.stride_h + 1;
  g.out_w = padded_w / layer.stride_w + 1;
  return g;
}

int fc_samples(const LayerSpec& layer, const Tensor& inputs) {
  std::string ctx = "layer '" + layer.name + "'";
  const auto& d = inputs.dims();
  std::size_t per_sample = 1;
  int samples = 1;
  if (d.size() == 1) {
    per_sample = d[0];
  } else {
    samples = static_cast<int>(d[0]);
    for (std::size_t i = 1; i < d.size(); ++i) per_sample *= d[i];
  }
  if (per_sample != static_cast<std::size_t>(layer.in_channels))
    throw std::runtime_error(ctx + ": input " + inputs.shape_str() + " does not provide " +
                             std::to_string(layer.in_channels) + " features per sample");
  return samples;
}

void check_input_dtype(const LayerSpec& layer, const Tensor& inputs) {
  std::string ctx = "layer '" + layer.name + "'";
  if (layer.input_signed && inputs.dtype() != DType::i8)
    throw std::runtime_error(ctx + ": signed-input layer requires an i8 tensor, got " +
                             inputs.shape_str());
  if (!layer.input_signed && inputs.dtype() != DType::u8)
    throw std::runtime_error(ctx + ": unsigned-input layer requires a u8 tensor, got " +
                             inputs.shape_str());
}

// Gathers one conv patch row; Fill is called with (k_index, value).
template <typename T, typename Fill>
void gather_patch(const T* sample, const LayerSpec& layer, const ConvGeometry& g, int oy,
                  int ox, T pad_value, Fill&& fill) {
  int k = 0;
  for (int c = 0; c < layer.in_channels; ++c) {
    const T* plane = sample + static_cast<std::size_t>(c) * g.height * g.width;
    for (int ky = 0; ky < layer.kernel_h; ++ky) {
      int y = oy * layer.stride_h - layer.pad_h + ky;
      for (int kx = 0; kx < layer.kernel_w; ++kx, ++k) {
        int x = ox * layer.stride_w - layer.pad_w + kx;
        bool inside = y >= 0 && y < g.height && x >= 0 && x < g.width;
        fill(k, inside ? plane[static_cast<std::size_t>(y) * g.width + x] : pad_value);
      }
    }
  }
}

}  // namespace

std::vector<std::uint32_t> output_dims(const LayerSpec& layer, const Tensor& inputs) {
  check_input_dtype(layer, inputs);
  if (layer.kind == LayerKind::fully_connected) {
    int samples = fc_samples(layer, inputs);
    return {static_cast<std::uint32_t>(samples), static_cast<std::uint32_t>(layer.out_channels)};
  }
  ConvGeometry g = conv_geometry(layer, inputs.dims());
  return {static_cast<std::uint32_t>(g.samples), static_cast<std::uint32_t>(layer.out_channels),
          static_cast<std::uint32_t>(g.out_h), static_cast<std::uint32_t>(g.out_w)};
}

LoweredInput lower_input(const LayerSpec& layer, const Tensor& inputs) {
  check_input_dtype(layer, inputs);
  LoweredInput low;
  low.k = layer.filter_size();
  low.is_signed = layer.input_signed;

  if (layer.kind == LayerKind::fully_connected) {
    low.samples = fc_samples(layer, inputs);
    low.positions = 1;
    if (low.is_signed)
      low.signed_rows.assign(inputs.i8().begin(), inputs.i8().end());
    else
      low.unsigned_rows.assign(inputs.u8().begin(), inputs.u8().end());
    return low;
  }

  ConvGeometry g = conv_geometry(layer, inputs.dims());
  low.samples = g.samples;
  low.positions = g.out_h * g.out_w;
  std::size_t plane = static_cast<std::size_t>(layer.in_channels) * g.height * g.width;
  std::size_t total = low.passes() * static_cast<std::size_t>(low.k);

  auto fill_all = [&](auto* rows, const auto* data, auto pad_value) {
    std::size_t row_at = 0;
    for (int n = 0; n < g.samples; ++n) {
      const auto* sample = data + static_cast<std::size_t>(n) * plane;
      for (int oy = 0; oy < g.out_h; ++oy)
        for (int ox = 0; ox < g.out_w; ++ox) {
          auto* row = rows + row_at;
          gather_patch(sample, layer, g, oy, ox, pad_value,
                       [&](int k, auto v) { row[k] = v; });
          row_at += static_cast<std::size_t>(low.k);
        }
    }
  };

  if (low.is_signed) {
    low.signed_rows.resize(total);
    fill_all(low.signed_rows.data(), inputs.i8().data(), static_cast<std::int8_t>(0));
  } else {
    low.unsigned_rows.resize(total);
    fill_all(low.unsigned_rows.data(), inputs.u8().data(),
             static_cast<std::uint8_t>(layer.input_zero_point));
  }
  return low;
}

Tensor im2col(const Tensor& sample, const LayerSpec& layer) {
  if (layer.kind != LayerKind::convolution)
    throw std::runtime_error("im2col: layer '" + layer.name + "' is not a convolution");
  check_input_dtype(layer, sample);
  if (sample.dims().size() != 3)
    throw std::runtime_error("im2col: expected a single [C,H,W] sample, got " +
                             sample.shape_str());
  ConvGeometry g = conv_geometry(layer, sample.dims());
  int k = layer.filter_size();
  int positions = g.out_h * g.out_w;
  Tensor out(sample.dtype(),
             {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(positions)});

  auto fill_matrix = [&](auto* dst, const auto* src, auto pad_value) {
    int p = 0;
    for (int oy = 0; oy < g.out_h; ++oy)
      for (int ox = 0; ox < g.out_w; ++ox, ++p)
        gather_patch(src, layer, g, oy, ox, pad_value, [&](int row, auto v) {
          dst[static_cast<std::size_t>(row) * positions + p] = v;
        });
  };
  if (sample.dtype() == DType::i8)
    fill_matrix(out.i8().data(), sample.i8().data(), static_cast<std::int8_t>(0));
  else
    fill_matrix(out.u8().data(), sample.u8().data(),
                static_cast<std::uint8_t>(layer.input_zero_point));
  return out;
}

OracleResult ideal_layer(const LayerSpec& layer, const Tensor& inputs) {
  LoweredInput low = lower_input(layer, inputs);
  std::vector<std::uint32_t> dims = output_dims(layer, inputs);

  const std::uint8_t* wdata = layer.weights.u8().data();
  int k = low.k;
  int filters = layer.out_channels;
  int positions = low.positions;

  Tensor psums(DType::i32, dims);
  std::span<std::int32_t> pdata = psums.i32();
  std::int64_t max_abs = 0;

  for (std::size_t pass = 0; pass < low.passes(); ++pass) {
    int n = static_cast<int>(pass) / positions;
    int p = static_cast<int>(pass) % positions;
    for (int f = 0; f < filters; ++f) {
      const std::uint8_t* w = wdata + static_cast<std::size_t>(f) * k;
      std::int64_t acc = 0;
      if (low.is_signed) {
        const std::int8_t* row = low.signed_rows.data() + pass * static_cast<std::size_t>(k);
        for (int i = 0; i < k; ++i)
          acc += static_cast<std::int64_t>(w[i] - layer.weight_zero_point) * row[i];
      } else {
        const std::uint8_t* row = low.unsigned_rows.data() + pass * static_cast<std::size_t>(k);
        for (int i = 0; i < k; ++i)
          acc += static_cast<std::int64_t>(w[i] - layer.weight_zero_point) *
                 (row[i] - layer.input_zero_point);
      }
      if (acc > std::numeric_limits<std::int32_t>::max() ||
          acc < std::numeric_limits<std::int32_t>::min())
        throw std::runtime_error("layer '" + layer.name +
                                 "': psum exceeds 32b, layer shape is malformed");
      max_abs = std::max(max_abs, acc < 0 ? -acc : acc);
      std::size_t out_at = (static_cast<std::size_t>(n) * filters + f) * positions + p;
      pdata[out_at] = static_cast<std::int32_t>(acc);
    }
  }

  OracleResult result;
  result.outputs = quantize_outputs(psums, layer.quant);
  result.psums = std::move(psums);
  result.max_abs_psum = max_abs;
  return result;
}

}  // namespace copim
