#include "copim/metrics.hpp"

#include "copim/tensor.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace copim {

int signed_bitwidth(std::int64_t value) {
  // Width w is minimal with -2^(w-1) <= value <= 2^(w-1) - 1.
  std::uint64_t magnitude =
      value >= 0 ? static_cast<std::uint64_t>(value)
                 : static_cast<std::uint64_t>(-(value + 1));
  int bits = 0;
  while (magnitude > 0) {
    ++bits;
    magnitude >>= 1;
  }
  return bits + 1;
}

void PhaseStats::record_sum(int raw_sum) {
  ++column_sums;
  if (raw_sum < kResolutionWindowMin || raw_sum > kResolutionWindowMax) ++window_saturations;
  ++bitwidth_hist[signed_bitwidth(raw_sum)];
}

void PhaseStats::merge(const PhaseStats& other) {
  column_sums += other.column_sums;
  window_saturations += other.window_saturations;
  adc_converts += other.adc_converts;
  adc_saturations += other.adc_saturations;
  for (const auto& [bits, count] : other.bitwidth_hist) bitwidth_hist[bits] += count;
}

double PhaseStats::saturation_rate() const {
  if (column_sums == 0) return 0.0;
  return static_cast<double>(window_saturations) / static_cast<double>(column_sums);
}

void RunMetrics::merge(const RunMetrics& other) {
  total_adc_converts += other.total_adc_converts;
  total_macs += other.total_macs;
  cycles += other.cycles;
  passes += other.passes;
  columns = std::max(columns, other.columns);
  psum_overflows += other.psum_overflows;
  speculation.merge(other.speculation);
  recovery.merge(other.recovery);
}

double RunMetrics::converts_per_mac_measured() const {
  if (total_macs == 0) return 0.0;
  return static_cast<double>(total_adc_converts) / static_cast<double>(total_macs);
}

double RunMetrics::mean_converts_per_column() const {
  if (passes == 0 || columns == 0) return 0.0;
  return static_cast<double>(total_adc_converts) /
         (static_cast<double>(passes) * static_cast<double>(columns));
}

double converts_per_mac(double rows, double weight_slices, double input_converts_per_pass) {
  if (rows <= 0 || weight_slices <= 0 || input_converts_per_pass <= 0)
    throw std::invalid_argument("converts_per_mac: arguments must be positive");
  return weight_slices * input_converts_per_pass / rows;
}

double titanium_energy(double energy_per_convert, double converts_per_mac,
                       double macs, double utilization) {
  if (utilization <= 0.0 || utilization > 1.0)
    throw std::invalid_argument("titanium_energy: utilization must be in (0, 1]");
  return energy_per_convert * converts_per_mac * macs / utilization;
}

double adc_energy_per_convert(int adc_bits, double exponent_base) {
  if (adc_bits < 1) throw std::invalid_argument("adc_energy_per_convert: bits must be >= 1");
  if (exponent_base <= 1.0)
    throw std::invalid_argument("adc_energy_per_convert: base must exceed 1");
  return std::pow(exponent_base, adc_bits - 8);
}

std::vector<HistogramRow> histogram_report(const RunMetrics& metrics) {
  std::vector<HistogramRow> rows;
  for (const auto& [bits, count] : metrics.speculation.bitwidth_hist)
    rows.push_back({"speculation", bits, count});
  for (const auto& [bits, count] : metrics.recovery.bitwidth_hist)
    rows.push_back({"recovery", bits, count});
  return rows;
}

void write_histogram_csv(const std::filesystem::path& path, const RunMetrics& metrics) {
  std::string text = "phase,bitwidth,count\n";
  for (const HistogramRow& row : histogram_report(metrics)) {
    text += row.phase;
    text += ',';
    text += std::to_string(row.bitwidth);
    text += ',';
    text += std::to_string(row.count);
    text += '\n';
  }
  write_file_atomic(path, text);
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::string metrics_csv_header() {
  return "setup,layer,converts,macs,converts_per_mac,spec_saturation_rate,"
         "recovery_saturation_rate,cycles,utilization\n";
}

std::string metrics_csv_line(const MetricsRow& row) {
  const RunMetrics& m = row.metrics;
  std::string line;
  line += row.setup;
  line += ',';
  line += row.layer;
  line += ',';
  line += std::to_string(m.total_adc_converts);
  line += ',';
  line += std::to_string(m.total_macs);
  line += ',';
  line += format_double(m.converts_per_mac_measured());
  line += ',';
  line += format_double(m.speculation.saturation_rate());
  line += ',';
  line += format_double(m.recovery.saturation_rate());
  line += ',';
  line += std::to_string(m.cycles);
  line += ',';
  line += format_double(m.utilization);
  line += '\n';
  return line;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::string text = metrics_csv_header();
  for (const MetricsRow& row : rows) text += metrics_csv_line(row);
  write_file_atomic(path, text);
}

}  // namespace copim
