#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "copim/bitslice.hpp"

namespace copim {

// A contiguous run of one filter's weights that fits in one crossbar
// column set. Weights are unsigned 8b; signedness lives in the layer's
// zero point and is recovered digitally.
struct FilterChunk {
  std::vector<std::uint8_t> weights;
  int filter_id = 0;
  int chunk_index = 0;
};

// How the per-chunk center is chosen.
//   optimal:      argmin of the column-balance cost over [1, 255]
//   zero_offset:  center pinned at the weight zero point, i.e. plain
//                 differential encoding of the signed weights
//   unsigned_raw: center 0; offsets are the raw unsigned weights
enum class CenterMode { optimal, zero_offset, unsigned_raw };

struct OffsetPair {
  int pos = 0;
  int neg = 0;
};

// pos = max(w - center, 0), neg = max(center - w, 0).
OffsetPair offsets(int weight, int center);

// Column-balance cost of a candidate center: for each slice column, the
// signed slice values of (w - center) are summed over the chunk, raised
// to the fourth power, and weighted by the column's bit position 2^l.
std::uint64_t column_cost(const FilterChunk& chunk, int center, const Slicing& slicing);

// Exhaustive minimization of column_cost over centers {1..255}; smallest
// center wins ties.
int solve_center(const FilterChunk& chunk, const Slicing& slicing);

// Batch variant sharing the per-chunk weight histogram across candidate
// slicings. Element i is the solved center for slicings[i]; results are
// identical to calling solve_center per slicing.
std::vector<int> solve_centers(const FilterChunk& chunk, std::span<const Slicing> slicings);

// One chunk's crossbar image: the center plus per-slice signed columns.
// slice_columns[i][r] holds the slice-i value of weights[r] - center;
// positive values program the positive device of the pair, negative the
// negative device.
struct EncodedFilter {
  int center = 0;
  Slicing slicing;
  std::vector<std::uint8_t> pos_offsets;
  std::vector<std::uint8_t> neg_offsets;
  std::vector<std::vector<std::int8_t>> slice_columns;  // [slice][row]
};

EncodedFilter encode_filter(const FilterChunk& chunk, const Slicing& slicing,
                            int max_rows = 512);
EncodedFilter encode_filter_with_center(const FilterChunk& chunk, const Slicing& slicing,
                                        int center, int max_rows = 512);

int resolve_center(const FilterChunk& chunk, const Slicing& slicing, CenterMode mode,
                   int weight_zero_point);

// Row-wise split of a k-weight filter into crossbar chunks.
std::vector<int> chunk_partition(int k, int rows);

// A whole layer's weights encoded for one slicing: filters x chunks of
// EncodedFilter plus the per-filter signed weight sums the digital side
// needs for zero-point correction.
struct EncodedLayer {
  Slicing slicing;
  int rows = 0;
  int k = 0;  // weights per filter
  std::vector<int> chunk_sizes;
  std::vector<std::vector<EncodedFilter>> filters;  // [filter][chunk]
  std::vector<std::int64_t> signed_weight_sums;     // per filter: sum of (w - zero_point)

  int num_filters() const { return static_cast<int>(filters.size()); }
  int num_chunks() const { return static_cast<int>(chunk_sizes.size()); }
  int columns_per_filter() const { return num_chunks() * slicing.count(); }
  double utilization() const;
};

// weights is row-major [num_filters][k].
EncodedLayer encode_layer(std::span<const std::uint8_t> weights, int num_filters, int k,
                          const Slicing& slicing, int rows, CenterMode mode,
                          int weight_zero_point);

// Re-encode with externally supplied centers (e.g. loaded from a compiled
// artifact); centers is [filter][chunk].
EncodedLayer encode_layer_with_centers(std::span<const std::uint8_t> weights, int num_filters,
                                       int k, const Slicing& slicing, int rows,
                                       const std::vector<std::vector<int>>& centers,
                                       int weight_zero_point);

std::vector<std::vector<int>> layer_centers(const EncodedLayer& layer);

}  // namespace copim
