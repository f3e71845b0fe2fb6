#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace copim {

// Reporting window for column-sum resolution: the signed 7b range the
// datapath is engineered around. Saturation rates in reports count raw
// sums outside this window, independent of the configured ADC.
inline constexpr int kResolutionWindowMin = -64;
inline constexpr int kResolutionWindowMax = 63;

// Minimal two's-complement width holding value; signed_bitwidth(0) == 1.
int signed_bitwidth(std::int64_t value);

// Per-phase column-sum statistics. "wide" cycles (multi-bit input slices)
// and "single-bit" cycles are tracked separately; with speculation enabled
// these are exactly the speculative and recovery phases.
struct PhaseStats {
  std::int64_t column_sums = 0;        // analog sums formed
  std::int64_t window_saturations = 0; // raw sum outside the 7b window
  std::int64_t adc_converts = 0;
  std::int64_t adc_saturations = 0;    // converted output pinned at an ADC bound
  std::map<int, std::int64_t> bitwidth_hist;

  void record_sum(int raw_sum);
  void merge(const PhaseStats& other);
  double saturation_rate() const;  // window-based; 0 when no sums recorded
};

struct RunMetrics {
  std::int64_t total_adc_converts = 0;
  std::int64_t total_macs = 0;
  std::int64_t cycles = 0;
  std::int64_t passes = 0;
  std::int64_t columns = 0;  // physical slice columns across filters and chunks
  std::int64_t psum_overflows = 0;  // psums that left the signed 16b range
  double utilization = 1.0;
  PhaseStats speculation;
  PhaseStats recovery;

  void merge(const RunMetrics& other);
  double converts_per_mac_measured() const;
  double mean_converts_per_column() const;  // per pass
};

// Converts/MAC from crossbar geometry: weight_slices * input_converts_per_pass / rows.
double converts_per_mac(double rows, double weight_slices, double input_converts_per_pass);

// ADC energy as the product of its four factors.
double titanium_energy(double energy_per_convert, double converts_per_mac,
                       double macs, double utilization);

// Relative Energy/Convert for an ADC resolution, exponential in bits and
// normalized to 1.0 at 8b.
double adc_energy_per_convert(int adc_bits, double exponent_base = 2.0);

struct HistogramRow {
  std::string phase;  // "speculation" | "recovery"
  int bitwidth = 0;
  std::int64_t count = 0;
};

std::vector<HistogramRow> histogram_report(const RunMetrics& metrics);
void write_histogram_csv(const std::filesystem::path& path, const RunMetrics& metrics);

// One row of the standard metrics CSV.
struct MetricsRow {
  std::string setup;
  std::string layer;
  RunMetrics metrics;
};

std::string metrics_csv_header();
std::string metrics_csv_line(const MetricsRow& row);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

// Deterministic float formatting shared by all CSV emitters.
std::string format_double(double value);

}  // namespace copim
