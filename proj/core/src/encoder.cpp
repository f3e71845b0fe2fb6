#include "copim/encoder.hpp"

#include <array>
#include <limits>
#include <stdexcept>
#include <string>

namespace copim {

OffsetPair offsets(int weight, int center) {
  if (weight < 0 || weight > 255) throw std::invalid_argument("offsets: weight out of [0,255]");
  return {weight > center ? weight - center : 0, center > weight ? center - weight : 0};
}

std::uint64_t column_cost(const FilterChunk& chunk, int center, const Slicing& slicing) {
  std::uint64_t total = 0;
  for (int i = 0; i < slicing.count(); ++i) {
    std::int64_t column = 0;
    for (std::uint8_t w : chunk.weights)
      column += slice_signed(slicing.high(i), slicing.low(i), w - center);
    std::uint64_t fourth = static_cast<std::uint64_t>(column * column);
    fourth *= fourth;
    total += fourth << slicing.low(i);
  }
  return total;
}

namespace {

// Per-chunk cost tables. slice_sums[center][low][width-1] is the summed
// slice value of (w - center) over the chunk for the column covering bits
// [low+width-1 .. low]; building it once makes the 255-center sweep cheap
// and lets all candidate slicings share the same pass over the weights.
class CenterCostTable {
 public:
  explicit CenterCostTable(const FilterChunk& chunk) {
    std::array<std::int64_t, 256> hist{};
    for (std::uint8_t w : chunk.weights) ++hist[w];
    for (int center = 1; center <= 255; ++center) {
      auto& slot = sums_[center];
      for (int v = 0; v <= 255; ++v) {
        std::int64_t n = hist[v];
        if (n == 0) continue;
        int off = v - center;
        int mag = off < 0 ? -off : off;
        std::int64_t sign = off < 0 ? -n : n;
        for (int low = 0; low < 8; ++low) {
          int max_w = std::min(4, 8 - low);
          for (int width = 1; width <= max_w; ++width) {
            int val = (mag >> low) & ((1 << width) - 1);
            slot[low * 4 + (width - 1)] += sign * val;
          }
        }
      }
    }
  }

  std::uint64_t cost(int center, const Slicing& slicing) const {
    const auto& slot = sums_[center];
    std::uint64_t total = 0;
    for (int i = 0; i < slicing.count(); ++i) {
      std::int64_t column = slot[slicing.low(i) * 4 + (slicing.width(i) - 1)];
      std::uint64_t fourth = static_cast<std::uint64_t>(column * column);
      fourth *= fourth;
      total += fourth << slicing.low(i);
    }
    return total;
  }

  int solve(const Slicing& slicing) const {
    int best_center = 1;
    std::uint64_t best_cost = std::numeric_limits<std::uint64_t>::max();
    for (int center = 1; center <= 255; ++center) {
      std::uint64_t c = cost(center, slicing);
      if (c < best_cost) {
        best_cost = c;
        best_center = center;
      }
    }
    return best_center;
  }

 private:
  std::array<std::array<std::int64_t, 32>, 256> sums_{};
};

void validate_weight_slicing(const Slicing& slicing) {
  if (slicing.operand_bits() != 8)
    throw std::invalid_argument("weight slicing must cover 8 bits, got " + slicing.str());
  if (slicing.max_width() > 4)
    throw std::invalid_argument("weight slice wider than the 4b device limit: " + slicing.str());
}

}  // namespace

int solve_center(const FilterChunk& chunk, const Slicing& slicing) {
  if (chunk.weights.empty()) throw std::invalid_argument("solve_center: empty chunk");
  validate_weight_slicing(slicing);
  return CenterCostTable(chunk).solve(slicing);
}

std::vector<int> solve_centers(const FilterChunk& chunk, std::span<const Slicing> slicings) {
  if (chunk.weights.empty()) throw std::invalid_argument("solve_centers: empty chunk");
  CenterCostTable table(chunk);
  std::vector<int> out;
  out.reserve(slicings.size());
  for (const Slicing& s : slicings) {
    validate_weight_slicing(s);
    out.push_back(table.solve(s));
  }
  return out;
}

int resolve_center(const FilterChunk& chunk, const Slicing& slicing, CenterMode mode,
                   int weight_zero_point) {
  switch (mode) {
    case CenterMode::optimal:
      return solve_center(chunk, slicing);
    case CenterMode::zero_offset:
      return weight_zero_point;
    case CenterMode::unsigned_raw:
      return 0;
  }
  throw std::logic_error("unknown center mode");
}

EncodedFilter encode_filter_with_center(const FilterChunk& chunk, const Slicing& slicing,
                                        int center, int max_rows) {
  if (static_cast<int>(chunk.weights.size()) > max_rows)
    throw std::invalid_argument("encode_filter: chunk of " +
                                std::to_string(chunk.weights.size()) +
                                " weights exceeds " + std::to_string(max_rows) +
                                " crossbar rows (partitioning bug upstream)");
  if (center < 0 || center > 255)
    throw std::invalid_argument("encode_filter: center out of [0,255]");
  validate_weight_slicing(slicing);

  EncodedFilter out;
  out.center = center;
  out.slicing = slicing;
  std::size_t n = chunk.weights.size();
  out.pos_offsets.resize(n);
  out.neg_offsets.resize(n);
  out.slice_columns.assign(static_cast<std::size_t>(slicing.count()),
                           std::vector<std::int8_t>(n));
  for (std::size_t r = 0; r < n; ++r) {
    OffsetPair off = offsets(chunk.weights[r], center);
    out.pos_offsets[r] = static_cast<std::uint8_t>(off.pos);
    out.neg_offsets[r] = static_cast<std::uint8_t>(off.neg);
    int signed_offset = chunk.weights[r] - center;
    for (int i = 0; i < slicing.count(); ++i)
      out.slice_columns[static_cast<std::size_t>(i)][r] = static_cast<std::int8_t>(
          slice_signed(slicing.high(i), slicing.low(i), signed_offset));
  }
  return out;
}

EncodedFilter encode_filter(const FilterChunk& chunk, const Slicing& slicing, int max_rows) {
  return encode_filter_with_center(chunk, slicing, solve_center(chunk, slicing), max_rows);
}

std::vector<int> chunk_partition(int k, int rows) {
  if (k < 1 || rows < 1) throw std::invalid_argument("chunk_partition: k and rows must be >= 1");
  std::vector<int> sizes;
  for (int start = 0; start < k; start += rows) sizes.push_back(std::min(rows, k - start));
  return sizes;
}

double EncodedLayer::utilization() const {
  if (chunk_sizes.empty() || rows == 0) return 1.0;
  return static_cast<double>(k) /
         (static_cast<double>(chunk_sizes.size()) * static_cast<double>(rows));
}

namespace {

EncodedLayer encode_layer_impl(std::span<const std::uint8_t> weights, int num_filters, int k,
                               const Slicing& slicing, int rows,
                               const std::vector<std::vector<int>>* centers, CenterMode mode,
                               int weight_zero_point) {
  if (num_filters < 1 || k < 1)
    throw std::invalid_argument("encode_layer: empty weight matrix");
  if (weights.size() != static_cast<std::size_t>(num_filters) * static_cast<std::size_t>(k))
    throw std::invalid_argument("encode_layer: weight matrix size mismatch");

  EncodedLayer layer;
  layer.slicing = slicing;
  layer.rows = rows;
  layer.k = k;
  layer.chunk_sizes = chunk_partition(k, rows);
  layer.filters.resize(static_cast<std::size_t>(num_filters));
  layer.signed_weight_sums.assign(static_cast<std::size_t>(num_filters), 0);

  for (int f = 0; f < num_filters; ++f) {
    const std::uint8_t* row = weights.data() + static_cast<std::size_t>(f) * k;
    std::int64_t sw = 0;
    for (int i = 0; i < k; ++i) sw += row[i] - weight_zero_point;
    layer.signed_weight_sums[static_cast<std::size_t>(f)] = sw;

    auto& chunks = layer.filters[static_cast<std::size_t>(f)];
    chunks.reserve(layer.chunk_sizes.size());
    int start = 0;
    for (std::size_t c = 0; c < layer.chunk_sizes.size(); ++c) {
      FilterChunk chunk;
      chunk.filter_id = f;
      chunk.chunk_index = static_cast<int>(c);
      chunk.weights.assign(row + start, row + start + layer.chunk_sizes[c]);
      int center = centers ? (*centers)[static_cast<std::size_t>(f)][c]
                           : resolve_center(chunk, slicing, mode, weight_zero_point);
      chunks.push_back(encode_filter_with_center(chunk, slicing, center, rows));
      start += layer.chunk_sizes[c];
    }
  }
  return layer;
}

}  // namespace

EncodedLayer encode_layer(std::span<const std::uint8_t> weights, int num_filters, int k,
                          const Slicing& slicing, int rows, CenterMode mode,
                          int weight_zero_point) {
  return encode_layer_impl(weights, num_filters, k, slicing, rows, nullptr, mode,
                           weight_zero_point);
}

EncodedLayer encode_layer_with_centers(std::span<const std::uint8_t> weights, int num_filters,
                                       int k, const Slicing& slicing, int rows,
                                       const std::vector<std::vector<int>>& centers,
                                       int weight_zero_point) {
  if (centers.size() != static_cast<std::size_t>(num_filters))
    throw std::invalid_argument("encode_layer: center table has wrong filter count");
  std::size_t chunks = chunk_partition(k, rows).size();
  for (const auto& per_filter : centers)
    if (per_filter.size() != chunks)
      throw std::invalid_argument("encode_layer: center table has wrong chunk count");
  return encode_layer_impl(weights, num_filters, k, slicing, rows, &centers,
                           CenterMode::optimal, weight_zero_point);
}

std::vector<std::vector<int>> layer_centers(const EncodedLayer& layer) {
  std::vector<std::vector<int>> out;
  out.reserve(layer.filters.size());
  for (const auto& chunks : layer.filters) {
    std::vector<int> centers;
    centers.reserve(chunks.size());
    for (const EncodedFilter& ef : chunks) centers.push_back(ef.center);
    out.push_back(std::move(centers));
  }
  return out;
}

}  // namespace copim
