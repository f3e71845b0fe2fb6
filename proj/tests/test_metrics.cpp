#include <doctest.h>

#include <cmath>

#include "copim/metrics.hpp"

using namespace copim;

namespace {

// Smallest w with -2^(w-1) <= v <= 2^(w-1) - 1, by search.
int bitwidth_oracle(long long v) {
  for (int w = 1; w <= 63; ++w) {
    long long lo = -(1LL << (w - 1));
    long long hi = (1LL << (w - 1)) - 1;
    if (v >= lo && v <= hi) return w;
  }
  return 64;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("converts_per_mac anchor values") {
  CHECK(converts_per_mac(128, 4, 8) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(converts_per_mac(512, 4, 8) == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(converts_per_mac(512, 3, 8) == doctest::Approx(0.046875).epsilon(1e-12));
  // Measured-mean variant; lands within 10% of the reported 0.018.
  double speculative = converts_per_mac(512, 3, 3.3);
  CHECK(speculative == doctest::Approx(3.0 * 3.3 / 512.0).epsilon(1e-12));
  CHECK(std::abs(speculative - 0.0193) < 1e-4);
  CHECK_THROWS(converts_per_mac(0, 4, 8));
}

TEST_CASE("titanium_energy") {
  CHECK(titanium_energy(1, 1, 1, 1) == doctest::Approx(1.0));
  CHECK(titanium_energy(2, 0.25, 100, 0.5) == doctest::Approx(100.0));
  CHECK_THROWS(titanium_energy(1, 1, 1, 0.0));
  CHECK_THROWS(titanium_energy(1, 1, 1, 1.5));

  // Exponential Energy/Convert: one fewer bit at base 2 halves the energy.
  double e8 = adc_energy_per_convert(8);
  double e7 = adc_energy_per_convert(7);
  CHECK(e8 == doctest::Approx(1.0));
  CHECK(e7 == doctest::Approx(0.5));
  CHECK(titanium_energy(e7, 0.25, 1000, 1.0) ==
        doctest::Approx(0.5 * titanium_energy(e8, 0.25, 1000, 1.0)));
}

TEST_CASE("signed_bitwidth") {
  CHECK(signed_bitwidth(63) == 7);
  CHECK(signed_bitwidth(-64) == 7);
  CHECK(signed_bitwidth(0) == 1);
  CHECK(signed_bitwidth(64) == 8);
  CHECK(signed_bitwidth(-1) == 1);
  CHECK(signed_bitwidth(-65) == 8);
  for (long long v = -70000; v <= 70000; v += 7)
    CHECK(signed_bitwidth(v) == bitwidth_oracle(v));
}

TEST_CASE("phase stats and saturation rates") {
  PhaseStats stats;
  stats.record_sum(100);
  CHECK(stats.saturation_rate() == doctest::Approx(1.0));

  PhaseStats in_range;
  for (int s = -64; s <= 63; ++s) in_range.record_sum(s);
  CHECK(in_range.saturation_rate() == doctest::Approx(0.0));
  CHECK(in_range.bitwidth_hist.at(7) == 64);  // -64..-33 and 32..63

  PhaseStats merged = in_range;
  merged.merge(stats);
  CHECK(merged.column_sums == 129);
  CHECK(merged.window_saturations == 1);
}

TEST_CASE("histogram report covers both phases") {
  RunMetrics m;
  m.speculation.record_sum(5);
  m.recovery.record_sum(-100);
  auto rows = histogram_report(m);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].phase == "speculation");
  CHECK(rows[0].bitwidth == 4);
  CHECK(rows[1].phase == "recovery");
  CHECK(rows[1].bitwidth == 8);
}

TEST_CASE("metrics csv line shape") {
  MetricsRow row{"raella", "conv1", {}};
  row.metrics.total_adc_converts = 24;
  row.metrics.total_macs = 512;
  std::string line = metrics_csv_line(row);
  CHECK(line == "raella,conv1,24,512,0.046875,0,0,0,1\n");
  CHECK(metrics_csv_header().starts_with("setup,layer,converts,macs"));
}

}  // TEST_SUITE
