#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "phaseid/metrology.hpp"
#include "phaseid/simfeeder.hpp"
#include "test_support.hpp"

using namespace phaseid;
using Catch::Approx;
using testsupport::full_channel;
using testsupport::skeleton;

TEST_CASE("meter class table is the IEC set") {
  CHECK(meter_class_from_name("0.5").delta_class == 0.005);
  CHECK_FALSE(meter_class_from_name("0.5").s_type);
  CHECK(meter_class_from_name("0.2s").delta_class == 0.002);
  CHECK(meter_class_from_name("0.2s").s_type);
  CHECK_THROWS_AS(meter_class_from_name("2.0"), std::invalid_argument);
}

TEST_CASE("sigma_voltage is delta * U_n / 3") {
  NoiseContext ctx;
  ctx.u_n = 230.0;
  CHECK(sigma_voltage(meter_class_from_name("1.0"), ctx) == Approx(0.01 * 230.0 / 3.0));
  CHECK(sigma_voltage(meter_class_from_name("0.1"), ctx) == Approx(0.001 * 230.0 / 3.0));
  CHECK(sigma_voltage(MeterClass{"custom", 0.0, false}, ctx) == 0.0);
}

TEST_CASE("sigma_power: plain classes use the nominal rating") {
  NoiseContext ctx;
  ctx.p_n = 9200.0;
  const MeterClass c10 = meter_class_from_name("1.0");
  CHECK(sigma_power(c10, 100.0, ctx) == Approx(0.01 * 9200.0 / 3.0));
  CHECK(sigma_power(c10, 9000.0, ctx) == Approx(0.01 * 9200.0 / 3.0));  // reading-independent
}

TEST_CASE("sigma_power: s-classes scale with loading above the 20% floor") {
  NoiseContext ctx;
  ctx.p_n = 9200.0;
  const MeterClass c05s = meter_class_from_name("0.5s");
  CHECK(sigma_power(c05s, 920.0, ctx) == Approx(0.005 * 0.2 * 9200.0 / 3.0));  // floor branch
  CHECK(sigma_power(c05s, 4600.0, ctx) == Approx(0.005 * 4600.0 / 3.0));       // proportional
  CHECK(sigma_power(c05s, -4600.0, ctx) == Approx(0.005 * 4600.0 / 3.0));      // |reading|
}

TEST_CASE("s-class sigma is continuous at the branch point and non-decreasing") {
  NoiseContext ctx;
  ctx.p_n = 10000.0;
  const MeterClass mc = meter_class_from_name("0.2s");
  const double at_floor = sigma_power(mc, 0.2 * ctx.p_n, ctx);
  const double just_above = sigma_power(mc, 0.2 * ctx.p_n * (1.0 + 1e-12), ctx);
  CHECK(just_above == Approx(at_floor).epsilon(1e-9));
  double prev = 0.0;
  for (double r = 0.0; r <= 2.0 * ctx.p_n; r += 97.0) {
    const double s = sigma_power(mc, r, ctx);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("zero-delta class leaves the campaign bit-identical") {
  const MeasurementCampaign c = generate_campaign(testsupport::quick_preset('C', 1), 3);
  NoiseContext ctx;
  const MeasurementCampaign out = inject_noise(c, MeterClass{"custom", 0.0, false}, ctx);
  CHECK(out.voltage->values == c.voltage->values);
  CHECK(out.power->values == c.power->values);
  CHECK(*out.transformer_voltage == *c.transformer_voltage);
  CHECK(*out.transformer_power == *c.transformer_power);
}

TEST_CASE("same seed and run index reproduce the same noise") {
  const MeasurementCampaign c = generate_campaign(testsupport::quick_preset('C', 1), 3);
  const MeterClass mc = meter_class_from_name("0.5");
  NoiseContext ctx;
  ctx.seed = 17;
  ctx.run_index = 4;
  const MeasurementCampaign a = inject_noise(c, mc, ctx);
  const MeasurementCampaign b = inject_noise(c, mc, ctx);
  CHECK(a.voltage->values == b.voltage->values);
  CHECK(a.power->values == b.power->values);
  CHECK(*a.transformer_power == *b.transformer_power);
  CHECK(a.truth == c.truth);
  CHECK(a.timestamps == c.timestamps);
}

TEST_CASE("injected voltage noise matches the class sigma empirically") {
  // One million cells: T = 2000, N = 500.
  const std::size_t t_count = 2000;
  const std::size_t n = 500;
  MeasurementCampaign c = skeleton(t_count, n, 1);
  c.voltage = full_channel(Matrix(t_count, n, 230.0));

  const MeterClass mc = meter_class_from_name("1.0");
  NoiseContext ctx;
  ctx.seed = 99;
  const double sigma = sigma_voltage(mc, ctx);
  const MeasurementCampaign noisy = inject_noise(c, mc, ctx);

  double sum = 0.0;
  double sum_sq = 0.0;
  const double cells = static_cast<double>(t_count * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto col = noisy.voltage->values.col(i);
    for (double v : col) {
      const double e = v - 230.0;
      sum += e;
      sum_sq += e * e;
    }
  }
  const double mean = sum / cells;
  const double std_dev = std::sqrt(sum_sq / cells - mean * mean);
  CHECK(std_dev == Approx(sigma).epsilon(0.01));
  CHECK(std::abs(mean) < 4.0 * sigma / std::sqrt(cells));
}

TEST_CASE("noise draws on different run indices are independent") {
  const std::size_t t_count = 1000;
  const std::size_t n = 100;
  MeasurementCampaign c = skeleton(t_count, n, 1);
  c.voltage = full_channel(Matrix(t_count, n, 230.0));
  const MeterClass mc = meter_class_from_name("1.0");
  NoiseContext ctx0;
  ctx0.seed = 5;
  ctx0.run_index = 0;
  NoiseContext ctx1 = ctx0;
  ctx1.run_index = 1;
  const MeasurementCampaign a = inject_noise(c, mc, ctx0);
  const MeasurementCampaign b = inject_noise(c, mc, ctx1);

  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  const double cells = static_cast<double>(t_count * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto ca = a.voltage->values.col(i);
    auto cb = b.voltage->values.col(i);
    for (std::size_t t = 0; t < t_count; ++t) {
      const double ea = ca[t] - 230.0;
      const double eb = cb[t] - 230.0;
      sa += ea;
      sb += eb;
      saa += ea * ea;
      sbb += eb * eb;
      sab += ea * eb;
    }
  }
  const double cov = sab / cells - (sa / cells) * (sb / cells);
  const double corr = cov / std::sqrt((saa / cells - (sa / cells) * (sa / cells)) *
                                      (sbb / cells - (sb / cells) * (sb / cells)));
  CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("transformer meters can use an overridden class") {
  const MeasurementCampaign c = generate_campaign(testsupport::quick_preset('C', 1), 3);
  const MeterClass mc = meter_class_from_name("1.0");
  NoiseContext ctx;
  ctx.seed = 3;
  ctx.transformer_class = MeterClass{"custom", 0.0, false};
  const MeasurementCampaign out = inject_noise(c, mc, ctx);
  CHECK(*out.transformer_voltage == *c.transformer_voltage);  // override silenced it
  CHECK(*out.transformer_power == *c.transformer_power);
  CHECK_FALSE(out.voltage->values == c.voltage->values);  // customers still noised
}
