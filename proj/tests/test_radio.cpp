#include "thgcn/radio.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace thgcn;

namespace {

RadioConfig quiet_radio() {
  RadioConfig r;
  r.shadowing_sigma_db = 0.0;
  r.noise_dbm = -95.0;
  return r;
}

// Towers whose tx power is chosen so the received power at a colocated
// vehicle (distance clamped to 1 m, 47 dB reference loss) is exactly rx_dbm.
Tower tower_with_rx(int id, Vec2 pos, double rx_dbm, double range = 1e6) {
  Tower t;
  t.id = id;
  t.position = pos;
  t.tx_power_dbm = rx_dbm + 47.0;
  t.comm_range_m = range;
  return t;
}

VehicleState vehicle_at(int id, Vec2 pos) {
  VehicleState v;
  v.id = id;
  v.position = pos;
  return v;
}

TEST(Radio, PathLossExamples) {
  RadioConfig cfg = quiet_radio();
  EXPECT_DOUBLE_EQ(path_loss_db(1.0, cfg), 47.0);
  EXPECT_DOUBLE_EQ(path_loss_db(10.0, cfg), 82.0);
  EXPECT_DOUBLE_EQ(path_loss_db(0.5, cfg), 47.0);
}

TEST(Radio, DbLinearRoundTrip) {
  for (double db : {-120.0, -95.0, -3.0, 0.0, 7.5, 46.0}) {
    EXPECT_NEAR(linear_to_db(db_to_linear(db)), db, std::abs(db) * 1e-12 + 1e-12);
  }
  for (double lin : {1e-12, 1e-7, 1.0, 42.0}) {
    EXPECT_NEAR(db_to_linear(linear_to_db(lin)), lin, lin * 1e-12);
  }
}

TEST(Radio, SingleTowerNoInterference) {
  auto towers = std::vector<Tower>{tower_with_rx(0, {0, 0}, -70.0)};
  auto vehicles = std::vector<VehicleState>{vehicle_at(0, {0, 0})};
  SinrField f = measure_all(vehicles, towers, quiet_radio(), ShadowField(), 0);
  ASSERT_TRUE(f.sinr_db(0, 0).has_value());
  EXPECT_NEAR(*f.sinr_db(0, 0), 25.0, 1e-12);
}

TEST(Radio, InterferenceMatchesLinearDomainOracle) {
  auto towers = std::vector<Tower>{tower_with_rx(0, {0, 0}, -70.0),
                                   tower_with_rx(1, {0, 0.5}, -80.0)};
  auto vehicles = std::vector<VehicleState>{vehicle_at(0, {0, 0})};
  SinrField f = measure_all(vehicles, towers, quiet_radio(), ShadowField(), 0);
  double oracle =
      10.0 * std::log10(std::pow(10.0, -7.0) /
                        (std::pow(10.0, -8.0) + std::pow(10.0, -9.5)));
  ASSERT_TRUE(f.sinr_db(0, 0).has_value());
  EXPECT_NEAR(*f.sinr_db(0, 0), oracle, 1e-9);
  EXPECT_NEAR(oracle, 9.8648, 5e-4);  // hand-checked linear-domain arithmetic
}

TEST(Radio, OutOfRangeInterfererIsIgnored) {
  auto alone = std::vector<Tower>{tower_with_rx(0, {0, 0}, -70.0)};
  auto with_far = std::vector<Tower>{
      tower_with_rx(0, {0, 0}, -70.0),
      tower_with_rx(1, {3.0, 4.0}, -40.0, /*range=*/2.0)};  // 5 m away, range 2 m
  auto vehicles = std::vector<VehicleState>{vehicle_at(0, {0, 0})};
  SinrField a = measure_all(vehicles, alone, quiet_radio(), ShadowField(), 0);
  SinrField b = measure_all(vehicles, with_far, quiet_radio(), ShadowField(), 0);
  EXPECT_DOUBLE_EQ(*a.sinr_db(0, 0), *b.sinr_db(0, 0));
  EXPECT_FALSE(b.sinr_db(0, 1).has_value());
}

TEST(Radio, AddedInterfererLowersSinr) {
  auto base = std::vector<Tower>{tower_with_rx(0, {0, 0}, -70.0),
                                 tower_with_rx(1, {0, 1}, -85.0)};
  auto more = base;
  more.push_back(tower_with_rx(2, {1, 0}, -82.0));
  auto vehicles = std::vector<VehicleState>{vehicle_at(0, {0, 0})};
  SinrField a = measure_all(vehicles, base, quiet_radio(), ShadowField(), 0);
  SinrField b = measure_all(vehicles, more, quiet_radio(), ShadowField(), 0);
  EXPECT_LT(*b.sinr_db(0, 0), *a.sinr_db(0, 0));
}

TEST(Radio, RxStrictlyDecreasingInDistance) {
  RadioConfig cfg = quiet_radio();
  Tower t;
  t.tx_power_dbm = 46.0;
  t.comm_range_m = 5000.0;
  double prev = 1e9;
  for (double d = 1.0; d <= 3000.0; d *= 1.5) {
    double rx = t.tx_power_dbm - path_loss_db(d, cfg);
    EXPECT_LT(rx, prev);
    prev = rx;
  }
}

TEST(Radio, EquidistantTowersGiveEqualRx) {
  auto towers = std::vector<Tower>{tower_with_rx(0, {-100, 0}, 0.0, 1000),
                                   tower_with_rx(1, {100, 0}, 0.0, 1000)};
  towers[0].tx_power_dbm = towers[1].tx_power_dbm = 46.0;
  auto vehicles = std::vector<VehicleState>{vehicle_at(0, {0, 0})};
  SinrField f = measure_all(vehicles, towers, quiet_radio(), ShadowField(), 0);
  EXPECT_DOUBLE_EQ(f.rx_power_dbm(0, 0), f.rx_power_dbm(0, 1));
  EXPECT_DOUBLE_EQ(*f.sinr_db(0, 0), *f.sinr_db(0, 1));
}

TEST(Radio, FarVehicleHasEmptyCandidateSet) {
  Tower t;
  t.position = {0, 0};
  t.comm_range_m = 1000.0;
  auto vehicles = std::vector<VehicleState>{vehicle_at(0, {1500, 0})};
  SinrField f = measure_all(vehicles, {t}, quiet_radio(), ShadowField(), 0);
  EXPECT_TRUE(f.in_range_towers(0).empty());
  EXPECT_FALSE(f.sinr_db(0, 0).has_value());
}

TEST(Radio, MeasurementCardinalityBound) {
  ScenarioConfig cfg;
  cfg.n_vehicles = 100;
  auto towers = place_towers(cfg, rng_stream(1, "placement"));
  RoadNetwork net = generate_road_network(cfg, rng_stream(1, "mobility"));
  RngStream m = rng_stream(1, "mobility");
  auto fleet = spawn_vehicles(cfg, net, m);
  SinrField f = measure_all(fleet, towers, cfg.radio, ShadowField(), 0);
  EXPECT_LE(f.rows().size(), 1000u);
  for (const auto& r : f.rows()) {
    EXPECT_TRUE(r.in_range);
    EXPECT_TRUE(std::isfinite(r.sinr_db));
    EXPECT_LE(r.distance_m, cfg.comm_range_m);
  }
}

TEST(Radio, ShadowFrozenWithinIntervalRedrawnAcross) {
  ShadowField s(rng_stream(7, "shadowing"), 4.0, 10);
  double a1 = s.value_db(3, 2, 5);
  double a2 = s.value_db(3, 2, 5);
  EXPECT_DOUBLE_EQ(a1, a2);
  EXPECT_NE(s.value_db(4, 2, 5), a1);
  EXPECT_NE(s.value_db(3, 2, 6), a1);
  ShadowField same(rng_stream(7, "shadowing"), 4.0, 10);
  EXPECT_DOUBLE_EQ(same.value_db(3, 2, 5), a1);
  ShadowField zero(rng_stream(7, "shadowing"), 0.0, 10);
  EXPECT_DOUBLE_EQ(zero.value_db(3, 2, 5), 0.0);
}

}  // namespace
