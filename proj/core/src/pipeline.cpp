#include "copim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "copim/parallel.hpp"
#include "copim/rng.hpp"

namespace copim {

InputPlan::InputPlan(Slicing wide, bool speculative)
    : wide_(std::move(wide)), speculative_(speculative) {}

InputPlan InputPlan::speculation(const Slicing& widths) {
  if (widths.operand_bits() != 8)
    throw std::invalid_argument("speculation plan must cover 8 input bits, got " + widths.str());
  if (widths.count() != 3)
    throw std::invalid_argument("speculation plan needs exactly three slices, got " +
                                widths.str());
  for (int w : widths.widths())
    if (w < 2 || w > 4)
      throw std::invalid_argument("speculative slices must be 2-4 bits wide, got " +
                                  widths.str());
  return InputPlan(widths, true);
}

InputPlan InputPlan::recovery_only() {
  return InputPlan(Slicing({1, 1, 1, 1, 1, 1, 1, 1}), false);
}

InputPlan InputPlan::plain(const Slicing& widths) {
  if (widths.operand_bits() != 8)
    throw std::invalid_argument("input plan must cover 8 bits, got " + widths.str());
  return InputPlan(widths, false);
}

int InputPlan::cycles_per_pass(bool signed_inputs) const {
  int cycles = speculative_ ? wide_.count() + wide_.operand_bits() : wide_.count();
  return signed_inputs ? 2 * cycles : cycles;
}

int InputPlan::nominal_converts_per_column() const { return wide_.count(); }

std::string InputPlan::describe() const {
  return (speculative_ ? std::string("speculation(") : std::string("plain(")) + wide_.str() + ")";
}

std::int64_t input_sum_term(std::span<const std::uint8_t> inputs, int center) {
  std::int64_t sum = 0;
  for (std::uint8_t v : inputs) sum += v;
  return static_cast<std::int64_t>(center) * sum;
}

SignedSplit split_signed_inputs(std::span<const std::int8_t> inputs) {
  SignedSplit out;
  out.positive.resize(inputs.size());
  out.negative.resize(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    int v = inputs[i];
    out.positive[i] = static_cast<std::uint8_t>(v > 0 ? v : 0);
    out.negative[i] = static_cast<std::uint8_t>(v < 0 ? -v : 0);
  }
  return out;
}

int count_converts(const std::vector<bool>& failed_wide_slices, const InputPlan& plan) {
  const Slicing& wide = plan.wide_slices();
  if (!plan.speculation_enabled()) return wide.count();
  if (failed_wide_slices.size() != static_cast<std::size_t>(wide.count()))
    throw std::invalid_argument("count_converts: one flag per speculative slice expected");
  int total = wide.count();
  for (int i = 0; i < wide.count(); ++i)
    if (failed_wide_slices[static_cast<std::size_t>(i)]) total += wide.width(i);
  return total;
}

Tensor quantize_outputs(const Tensor& psums, const QuantParams& params) {
  if (psums.dtype() != DType::i32)
    throw std::invalid_argument("quantize_outputs: psums must be i32");
  if (psums.dims().size() < 2)
    throw std::invalid_argument("quantize_outputs: psums must be [N, channels, ...]");
  int channels = static_cast<int>(psums.dims()[1]);
  params.validate("quantize_outputs", channels);

  std::size_t inner = 1;
  for (std::size_t i = 2; i < psums.dims().size(); ++i) inner *= psums.dims()[i];
  std::size_t batch = psums.dims()[0];

  Tensor out(params.output_signed ? DType::i8 : DType::u8, psums.dims());
  int lo = params.output_signed ? -128 : 0;
  int hi = params.output_signed ? 127 : 255;
  std::span<const std::int32_t> in = psums.i32();

  std::size_t at = 0;
  for (std::size_t n = 0; n < batch; ++n) {
    for (int c = 0; c < channels; ++c) {
      double scale = params.scale_for(c);
      double bias = params.bias_for(c);
      for (std::size_t i = 0; i < inner; ++i, ++at) {
        double value = static_cast<double>(in[at]) * scale + bias;
        if (params.activation == Activation::relu && value < 0) value = 0;
        long long rounded = std::llround(value);
        int q = rounded < lo ? lo : (rounded > hi ? hi : static_cast<int>(rounded));
        if (params.output_signed)
          out.i8()[at] = static_cast<std::int8_t>(q);
        else
          out.u8()[at] = static_cast<std::uint8_t>(q);
      }
    }
  }
  return out;
}

namespace {

// One executed crossbar cycle within a pass.
struct CycleStep {
  bool speculative = false;  // wide slice whose result commits only on success
  bool recovery = false;     // 1b reslice converting failed columns only
  int wide_index = 0;        // owning wide slice (flag index)
  int shift = 0;             // input bit position; commit weight 2^shift
  int width = 1;
};

std::vector<CycleStep> build_schedule(const InputPlan& plan) {
  std::vector<CycleStep> steps;
  const Slicing& wide = plan.wide_slices();
  if (plan.speculation_enabled()) {
    for (int s = 0; s < wide.count(); ++s) {
      steps.push_back({true, false, s, wide.low(s), wide.width(s)});
      for (int b = wide.high(s); b >= wide.low(s); --b)
        steps.push_back({false, true, s, b, 1});
    }
  } else {
    for (int s = 0; s < wide.count(); ++s)
      steps.push_back({false, false, s, wide.low(s), wide.width(s)});
  }
  return steps;
}

struct PassContext {
  const LayerSpec* layer;
  const EncodedLayer* encoded;
  const LoweredInput* lowered;
  const CrossbarConfig* config;
  const InputPlan* plan;
  const std::vector<CycleStep>* schedule;
  const LayerRunOptions* options;
  int positions;
};

// Analog + digital work of one pulse phase (all of a pass for unsigned
// inputs; the positive or negative half for signed inputs). Returns the
// per-filter phase psums.
void run_phase(const PassContext& ctx, std::size_t pass, int phase_index,
               std::span<const std::uint8_t> row, std::span<std::int64_t> filter_acc,
               RunMetrics& metrics, std::vector<TraceRow>* traces) {
  const EncodedLayer& enc = *ctx.encoded;
  const CrossbarConfig& cfg = *ctx.config;
  const std::vector<CycleStep>& schedule = *ctx.schedule;
  int n_slices = enc.slicing.count();
  int n_wide = ctx.plan->wide_slices().count();
  bool noisy = cfg.noise_level > 0.0;

  // Input slice values per cycle, shared by every filter of a chunk.
  std::vector<std::uint8_t> slice_values;
  // Speculation failure flags per (weight-slice column, speculative slice).
  std::vector<bool> failed(static_cast<std::size_t>(n_slices) * n_wide);

  std::size_t offset = 0;
  for (std::size_t c = 0; c < enc.chunk_sizes.size(); ++c) {
    std::size_t len = static_cast<std::size_t>(enc.chunk_sizes[c]);
    const std::uint8_t* chunk_row = row.data() + offset;

    std::int64_t chunk_input_sum = 0;
    for (std::size_t r = 0; r < len; ++r) chunk_input_sum += chunk_row[r];

    slice_values.resize(schedule.size() * len);
    for (std::size_t step = 0; step < schedule.size(); ++step) {
      const CycleStep& cs = schedule[step];
      std::uint8_t mask = static_cast<std::uint8_t>((1 << cs.width) - 1);
      std::uint8_t* dst = slice_values.data() + step * len;
      for (std::size_t r = 0; r < len; ++r)
        dst[r] = static_cast<std::uint8_t>((chunk_row[r] >> cs.shift) & mask);
    }

    for (int f = 0; f < enc.num_filters(); ++f) {
      const EncodedFilter& ef = enc.filters[static_cast<std::size_t>(f)][c];
      std::fill(failed.begin(), failed.end(), false);

      for (std::size_t step = 0; step < schedule.size(); ++step) {
        const CycleStep& cs = schedule[step];
        const std::uint8_t* in = slice_values.data() + step * len;
        int cycle_id = phase_index * static_cast<int>(schedule.size()) + static_cast<int>(step);

        for (int j = 0; j < n_slices; ++j) {
          ColumnSumResult sum =
              accumulate_column(in, ef.slice_columns[static_cast<std::size_t>(j)].data(), len);

          PhaseStats& stats = cs.width > 1 ? metrics.speculation : metrics.recovery;
          stats.record_sum(sum.raw);

          std::size_t flag_at =
              static_cast<std::size_t>(j) * n_wide + static_cast<std::size_t>(cs.wide_index);
          bool convert = !cs.recovery || failed[flag_at];
          double noisy_sum = static_cast<double>(sum.raw);
          AdcResult adc{0, false};
          if (convert) {
            if (noisy) {
              rng::Stream stream = rng::stream_for(
                  {cfg.rng_seed, 0xC01D,
                   static_cast<std::uint64_t>(ctx.options->layer_index),
                   static_cast<std::uint64_t>(c),
                   static_cast<std::uint64_t>(f) * static_cast<std::uint64_t>(n_slices) +
                       static_cast<std::uint64_t>(j),
                   static_cast<std::uint64_t>(pass), static_cast<std::uint64_t>(cycle_id)});
              noisy_sum = inject_noise(sum.raw, sum.pos, sum.neg, cfg.noise_level, stream);
            }
            adc = adc_convert(noisy_sum, cfg);
            ++stats.adc_converts;
            ++metrics.total_adc_converts;
            if (adc.saturated) ++stats.adc_saturations;

            bool commit = true;
            if (cs.speculative) {
              if (adc.saturated) {
                failed[flag_at] = true;
                commit = false;
              }
            }
            if (commit) {
              std::int64_t weighted = static_cast<std::int64_t>(adc.value)
                                      << (cs.shift + enc.slicing.low(j));
              filter_acc[static_cast<std::size_t>(f)] += weighted;
            }
          }

          if (traces) {
            TraceRow t;
            t.layer = ctx.options->layer_index;
            t.chunk = static_cast<std::int32_t>(c);
            t.filter = f;
            t.slice = j;
            t.pass = static_cast<std::int64_t>(pass);
            t.cycle = cycle_id;
            t.phase = cs.width > 1 ? 0 : 1;
            t.raw_sum = sum.raw;
            t.pos_total = sum.pos;
            t.neg_total = sum.neg;
            t.noisy_sum = convert ? noisy_sum : static_cast<double>(sum.raw);
            t.adc_out = adc.value;
            t.converted = convert;
            t.saturated = adc.saturated;
            traces->push_back(t);
          }
        }
      }

      // Digital center term for this chunk, folded per phase.
      filter_acc[static_cast<std::size_t>(f)] +=
          static_cast<std::int64_t>(ef.center - ctx.layer->weight_zero_point) * chunk_input_sum;
    }
    offset += len;
  }
}

}  // namespace

LayerRunResult run_layer(const LayerSpec& layer, const EncodedLayer& encoded,
                         const Tensor& inputs, const CrossbarConfig& config,
                         const InputPlan& plan, const LayerRunOptions& options) {
  config.validate();
  std::string ctx = "layer '" + layer.name + "'";
  if (encoded.k != layer.filter_size())
    throw std::runtime_error(ctx + ": encoded for " + std::to_string(encoded.k) +
                             " weights per filter, layer has " +
                             std::to_string(layer.filter_size()));
  if (encoded.num_filters() != layer.out_channels)
    throw std::runtime_error(ctx + ": encoded filter count mismatch");
  if (encoded.rows != config.rows)
    throw std::runtime_error(ctx + ": encoded for " + std::to_string(encoded.rows) +
                             " rows, config has " + std::to_string(config.rows));
  if (plan.wide_slices().max_width() > config.dac_max_bits)
    throw std::runtime_error(ctx + ": input plan " + plan.describe() + " exceeds the " +
                             std::to_string(config.dac_max_bits) + "b DAC");

  LoweredInput lowered = lower_input(layer, inputs);
  std::vector<std::uint32_t> dims = output_dims(layer, inputs);
  std::vector<CycleStep> schedule = build_schedule(plan);

  PassContext pass_ctx{&layer,  &encoded,  &lowered,          &config,
                       &plan,   &schedule, &options,          lowered.positions};

  LayerRunResult result;
  result.psums = Tensor(DType::i32, dims);
  std::span<std::int32_t> psum_data = result.psums.i32();

  std::size_t passes = lowered.passes();
  int filters = encoded.num_filters();

  std::mutex merge_mutex;
  RunMetrics totals;
  std::vector<std::vector<TraceRow>> pass_traces;
  if (options.collect_traces) pass_traces.resize(passes);

  auto body = [&](std::size_t begin, std::size_t end) {
    RunMetrics local;
    std::vector<std::int64_t> acc(static_cast<std::size_t>(filters));
    std::vector<std::int64_t> neg_acc(static_cast<std::size_t>(filters));
    for (std::size_t pass = begin; pass < end; ++pass) {
      std::vector<TraceRow>* traces =
          options.collect_traces ? &pass_traces[pass] : nullptr;
      std::fill(acc.begin(), acc.end(), 0);

      if (lowered.is_signed) {
        std::span<const std::int8_t> row(
            lowered.signed_rows.data() + pass * static_cast<std::size_t>(lowered.k),
            static_cast<std::size_t>(lowered.k));
        SignedSplit split = split_signed_inputs(row);
        std::fill(neg_acc.begin(), neg_acc.end(), 0);
        run_phase(pass_ctx, pass, 0, split.positive, acc, local, traces);
        run_phase(pass_ctx, pass, 1, split.negative, neg_acc, local, traces);
        for (int f = 0; f < filters; ++f)
          acc[static_cast<std::size_t>(f)] -= neg_acc[static_cast<std::size_t>(f)];
      } else {
        std::span<const std::uint8_t> row(
            lowered.unsigned_rows.data() + pass * static_cast<std::size_t>(lowered.k),
            static_cast<std::size_t>(lowered.k));
        run_phase(pass_ctx, pass, 0, row, acc, local, traces);
        // Input zero-point correction, folded digitally per filter.
        if (layer.input_zero_point != 0)
          for (int f = 0; f < filters; ++f)
            acc[static_cast<std::size_t>(f)] -=
                static_cast<std::int64_t>(layer.input_zero_point) *
                encoded.signed_weight_sums[static_cast<std::size_t>(f)];
      }

      int n = static_cast<int>(pass) / lowered.positions;
      int p = static_cast<int>(pass) % lowered.positions;
      for (int f = 0; f < filters; ++f) {
        std::int64_t value = acc[static_cast<std::size_t>(f)];
        if (value > 32767 || value < -32768) ++local.psum_overflows;
        value = std::clamp<std::int64_t>(value, std::numeric_limits<std::int32_t>::min(),
                                         std::numeric_limits<std::int32_t>::max());
        std::size_t out_at =
            (static_cast<std::size_t>(n) * filters + f) * lowered.positions + p;
        psum_data[out_at] = static_cast<std::int32_t>(value);
      }
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    totals.merge(local);
  };

  parallel_for(passes, resolve_threads(options.threads), body);

  totals.passes = static_cast<std::int64_t>(passes);
  totals.columns = static_cast<std::int64_t>(filters) * encoded.num_chunks() *
                   encoded.slicing.count();
  totals.cycles = static_cast<std::int64_t>(passes) *
                  plan.cycles_per_pass(lowered.is_signed);
  totals.total_macs = static_cast<std::int64_t>(passes) * filters * encoded.k;
  totals.utilization = encoded.utilization();

  result.metrics = std::move(totals);
  result.outputs = quantize_outputs(result.psums, layer.quant);
  if (options.collect_traces)
    for (auto& rows : pass_traces)
      result.traces.insert(result.traces.end(), rows.begin(), rows.end());
  return result;
}

}  // namespace copim
