#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "phaseid/metrology.hpp"
#include "phaseid/model.hpp"
#include "phaseid/simfeeder.hpp"
#include "test_support.hpp"

using namespace phaseid;
using testsupport::full_channel;
using testsupport::skeleton;

TEST_CASE("validate_campaign flags T mismatch between matrices") {
  MeasurementCampaign c = skeleton(96, 2);
  c.voltage = full_channel(Matrix(96, 2, 230.0));
  c.power = full_channel(Matrix(95, 2, 100.0));
  const auto violations = validate_campaign(c);
  REQUIRE_FALSE(violations.empty());
  const bool found = std::any_of(violations.begin(), violations.end(), [](const std::string& v) {
    return v.find("T mismatch") != std::string::npos && v.find("power") != std::string::npos;
  });
  CHECK(found);
}

TEST_CASE("validate_campaign accepts simulator output") {
  const MeasurementCampaign c = generate_campaign(testsupport::quick_preset('C', 2), 7);
  CHECK(validate_campaign(c).empty());
}

TEST_CASE("validate_campaign flags non-uniform timestamps") {
  MeasurementCampaign c = skeleton(3, 1);
  c.timestamps = {0, 15 * 60, 45 * 60};
  const auto violations = validate_campaign(c);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0] == "non-uniform step at index 2");
}

TEST_CASE("validate_campaign flags truth labels for unknown customers") {
  MeasurementCampaign c = skeleton(4, 1);
  c.truth["ghost"] = Phase::b;
  const auto violations = validate_campaign(c);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("ghost") != std::string::npos);
}

TEST_CASE("window slices all matrices to the requested days") {
  // 30 days at 15-min resolution.
  MeasurementCampaign c = skeleton(2880, 3);
  c.voltage = full_channel(Matrix(2880, 3, 230.0));
  c.power = full_channel(Matrix(2880, 3, 100.0));
  c.transformer_power = Matrix(2880, 3, 300.0);

  const MeasurementCampaign w = window(c, 0, 2);
  CHECK(w.n_samples() == 192);  // 2 * 24 * 4
  CHECK(w.voltage->values.rows() == 192);
  CHECK(w.power->values.rows() == 192);
  CHECK(w.transformer_power->rows() == 192);
  CHECK(w.customer_ids == c.customer_ids);
  CHECK(validate_campaign(w).empty());
}

TEST_CASE("window spanning the full campaign is the identity") {
  MeasurementCampaign c = skeleton(96, 2);
  c.voltage = full_channel(Matrix(96, 2, 231.5));
  const MeasurementCampaign w = window(c, 0, 1);
  CHECK(w.timestamps == c.timestamps);
  CHECK(w.voltage->values == c.voltage->values);
}

TEST_CASE("window rejects out-of-range requests") {
  MeasurementCampaign c = skeleton(96, 1);
  CHECK_THROWS_AS(window(c, 96, 1), std::out_of_range);
  CHECK_THROWS_AS(window(c, 0, 2), std::out_of_range);
}

TEST_CASE("drop_voltage_columns keeps the fraction and is deterministic") {
  MeasurementCampaign c = skeleton(10, 20);
  Matrix u(10, 20);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t t = 0; t < 10; ++t) u(t, i) = 230.0 + static_cast<double>(i);
  c.voltage = full_channel(std::move(u));

  SECTION("keep_fraction 1.0 is the identity") {
    const auto kept = drop_voltage_columns(c, 1.0, 42);
    CHECK(kept.voltage->values == c.voltage->values);
    CHECK(kept.voltage->present == c.voltage->present);
  }
  SECTION("keep_fraction 0.0 removes everything") {
    const auto none = drop_voltage_columns(c, 0.0, 42);
    CHECK(none.voltage->present_count() == 0);
  }
  SECTION("half the customers retain voltage, same set for same seed") {
    const auto a = drop_voltage_columns(c, 0.5, 42);
    const auto b = drop_voltage_columns(c, 0.5, 42);
    CHECK(a.voltage->present_count() == 10);
    CHECK(a.voltage->present == b.voltage->present);
    const auto other = drop_voltage_columns(c, 0.5, 43);
    CHECK(other.voltage->present_count() == 10);
  }
  SECTION("retained sets are nested across fractions") {
    const auto half = drop_voltage_columns(c, 0.5, 42);
    const auto quarter = drop_voltage_columns(c, 0.25, 42);
    for (std::size_t i = 0; i < 20; ++i)
      if (quarter.voltage->present[i]) CHECK(half.voltage->present[i]);
  }
}

TEST_CASE("drop_voltage_columns requires voltage data") {
  MeasurementCampaign c = skeleton(10, 2);
  CHECK_THROWS_AS(drop_voltage_columns(c, 0.5, 1), std::invalid_argument);
}

TEST_CASE("windowing and column dropping commute with noise injection") {
  const MeasurementCampaign clean = generate_campaign(testsupport::quick_preset('C', 4), 11);
  const MeterClass mc = meter_class_from_name("0.5");
  NoiseContext ctx;
  ctx.seed = 5;
  ctx.run_index = 2;

  SECTION("window after noise equals noise after window") {
    const MeasurementCampaign a = window(inject_noise(clean, mc, ctx), 96, 2);
    const MeasurementCampaign b = inject_noise(window(clean, 96, 2), mc, ctx);
    CHECK(a.voltage->values == b.voltage->values);
    CHECK(a.power->values == b.power->values);
    CHECK(*a.transformer_voltage == *b.transformer_voltage);
    CHECK(*a.transformer_power == *b.transformer_power);
    CHECK(*a.reference_voltage == *b.reference_voltage);
  }
  SECTION("drop after noise equals noise after drop on retained columns") {
    const MeasurementCampaign a = drop_voltage_columns(inject_noise(clean, mc, ctx), 0.5, 9);
    const MeasurementCampaign b = inject_noise(drop_voltage_columns(clean, 0.5, 9), mc, ctx);
    REQUIRE(a.voltage->present == b.voltage->present);
    for (std::size_t i = 0; i < a.n_customers(); ++i) {
      if (!a.voltage->present[i]) continue;
      auto ca = a.voltage->values.col(i);
      auto cb = b.voltage->values.col(i);
      for (std::size_t t = 0; t < ca.size(); ++t) REQUIRE(ca[t] == cb[t]);
    }
    CHECK(a.power->values == b.power->values);
  }
}
