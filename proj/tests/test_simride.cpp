#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "surf/dataset.hpp"
#include "surf/errors.hpp"
#include "surf/imu.hpp"
#include "surf/preprocess.hpp"
#include "surf/simride.hpp"

using namespace surf;

namespace {

SurfaceProfile quiet_profile(int label) {
  SurfaceProfile p;
  p.label = label;
  return p;  // all amplitudes zero
}

RideScript two_segment_script(std::uint64_t seed) {
  RideScript script;
  script.seed = seed;
  script.segments.push_back({4.0, road_profile(), 0.0, 0.0, 1.0});
  script.segments.push_back({3.0, sidewalk_profile(), 0.0, 0.0, 1.0});
  return script;
}

}  // namespace

TEST_CASE("a silent level ride measures exactly gravity") {
  RideScript script;
  script.seed = 9;
  script.segments.push_back({2.0, quiet_profile(0), 0.0, 0.0, 1.0});
  const Ride ride = generate_ride(script);
  REQUIRE(ride.series.samples.size() == 200);
  for (const ImuSample& s : ride.series.samples) {
    CHECK(s.accel[0] == 0.0);
    CHECK(s.accel[1] == 0.0);
    CHECK(s.accel[2] == kGravity);
    CHECK(s.gyro[0] == 0.0);
    CHECK(s.gyro[1] == 0.0);
    CHECK(s.gyro[2] == 0.0);
  }
}

TEST_CASE("a silent tilted ride measures the rotated gravity vector") {
  const double roll = 0.3, pitch = -0.2;
  RideScript script;
  script.seed = 1;
  script.segments.push_back({1.0, quiet_profile(0), roll, pitch, 1.0});
  const Ride ride = generate_ride(script);
  // device-frame specific force for attitude (roll, pitch):
  const double fx = -std::sin(pitch) * kGravity;
  const double fy = std::cos(pitch) * std::sin(roll) * kGravity;
  const double fz = std::cos(pitch) * std::cos(roll) * kGravity;
  for (const ImuSample& s : ride.series.samples) {
    CHECK(s.accel[0] == doctest::Approx(fx).epsilon(1e-12));
    CHECK(s.accel[1] == doctest::Approx(fy).epsilon(1e-12));
    CHECK(s.accel[2] == doctest::Approx(fz).epsilon(1e-12));
  }
  // and the preprocessing attitude estimate recovers the tilt
  const Attitude att = estimate_roll_pitch(ride.series.samples[10].accel);
  CHECK(att.roll == doctest::Approx(roll).epsilon(1e-9));
  CHECK(att.pitch == doctest::Approx(pitch).epsilon(1e-9));
}

TEST_CASE("sample count, timing, and label boundaries are exact") {
  const Ride ride = generate_ride(two_segment_script(5));
  REQUIRE(ride.series.samples.size() == 700);
  REQUIRE(ride.labels.size() == 700);
  CHECK(ride.series.rate_hz == 100.0);
  CHECK(ride.series.samples.front().t == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(ride.series.samples.back().t == doctest::Approx(7.0).epsilon(1e-15));
  // labels flip exactly at the segment boundary: samples 0..399 road, 400.. walk
  for (int i = 0; i < 400; ++i) CHECK(ride.labels[i] == 0);
  for (int i = 400; i < 700; ++i) CHECK(ride.labels[i] == 1);
}

TEST_CASE("rides are deterministic in the seed and differ across seeds") {
  const Ride a = generate_ride(two_segment_script(7));
  const Ride b = generate_ride(two_segment_script(7));
  const Ride c = generate_ride(two_segment_script(8));
  REQUIRE(a.series.samples.size() == b.series.samples.size());
  bool all_equal = true;
  for (std::size_t i = 0; i < a.series.samples.size(); ++i) {
    const ImuSample& x = a.series.samples[i];
    const ImuSample& y = b.series.samples[i];
    all_equal = all_equal && x.t == y.t && x.accel[0] == y.accel[0] &&
                x.accel[1] == y.accel[1] && x.accel[2] == y.accel[2] &&
                x.gyro[0] == y.gyro[0] && x.gyro[1] == y.gyro[1] && x.gyro[2] == y.gyro[2];
  }
  CHECK(all_equal);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.series.samples.size() && !any_diff; ++i)
    any_diff = a.series.samples[i].accel[2] != c.series.samples[i].accel[2];
  CHECK(any_diff);
}

TEST_CASE("generated rides pass the imu validator") {
  const Ride ride = generate_ride(two_segment_script(21));
  const std::vector<ValidationIssue> issues = validate_series(ride.series);
  CHECK(issues.empty());
}

TEST_CASE("sidewalk windows carry measurably more vertical energy than road") {
  // Monte Carlo: preprocess both surface types and compare per-window variance
  // of the leveled vertical axis. This is the separation the classifiers use.
  RideScript script;
  script.seed = 31;
  script.segments.push_back({60.0, road_profile(), 0.05, -0.03, 1.0});
  const Ride road = generate_ride(script);
  script.seed = 32;
  script.segments[0].profile = sidewalk_profile();
  const Ride walk = generate_ride(script);

  auto window_vars = [](const Ride& ride) {
    const LeveledSeries lvl = preprocess_pipeline(ride.series);
    std::vector<double> vars;
    const int win = 60;  // 3 s at 20 Hz
    // skip the first window: it carries the lowpass warm-up transient
    for (std::size_t s = win; s + win <= lvl.samples.size(); s += win) {
      double mean = 0.0;
      for (int i = 0; i < win; ++i) mean += lvl.samples[s + i].accel[2];
      mean /= win;
      double var = 0.0;
      for (int i = 0; i < win; ++i) {
        const double d = lvl.samples[s + i].accel[2] - mean;
        var += d * d;
      }
      vars.push_back(var / win);
    }
    return vars;
  };
  const std::vector<double> road_vars = window_vars(road);
  const std::vector<double> walk_vars = window_vars(walk);
  REQUIRE(road_vars.size() == 19);
  REQUIRE(walk_vars.size() == 19);
  double road_max = 0.0, walk_min = 1e18;
  for (double v : road_vars) road_max = std::max(road_max, v);
  for (double v : walk_vars) walk_min = std::min(walk_min, v);
  // clean margin: every sidewalk window is rougher than every road window
  CHECK(walk_min > road_max);
}

TEST_CASE("wind scales the broadband noise") {
  RideScript calm;
  calm.seed = 77;
  calm.segments.push_back({10.0, road_profile(), 0.0, 0.0, 1.0});
  RideScript windy = calm;
  windy.segments[0].wind = 3.0;
  const Ride a = generate_ride(calm);
  const Ride b = generate_ride(windy);
  auto var_z = [](const Ride& r) {
    double mean = 0.0;
    for (const ImuSample& s : r.series.samples) mean += s.accel[2];
    mean /= static_cast<double>(r.series.samples.size());
    double var = 0.0;
    for (const ImuSample& s : r.series.samples) {
      const double d = s.accel[2] - mean;
      var += d * d;
    }
    return var / static_cast<double>(r.series.samples.size());
  };
  // variance scales with wind^2 = 9 (same seed, same draws)
  CHECK(var_z(b) == doctest::Approx(9.0 * var_z(a)).epsilon(1e-9));
}

TEST_CASE("script validation") {
  RideScript bad;
  bad.seed = 1;
  CHECK_THROWS_AS(generate_ride(bad), ParameterError);  // no segments

  bad.segments.push_back({0.0, road_profile(), 0.0, 0.0, 1.0});
  CHECK_THROWS_AS(generate_ride(bad), ParameterError);  // zero duration

  bad.segments[0].duration_s = 1.003;  // not a whole number of samples
  CHECK_THROWS_AS(generate_ride(bad), ParameterError);

  bad.segments[0].duration_s = 1.0;
  bad.rate_hz = 0.0;
  CHECK_THROWS_AS(generate_ride(bad), ParameterError);
}

TEST_CASE("truth csv lists t,label rows") {
  RideScript script;
  script.seed = 3;
  script.segments.push_back({1.0, quiet_profile(0), 0.0, 0.0, 1.0});
  script.segments.push_back({1.0, quiet_profile(1), 0.0, 0.0, 1.0});
  const Ride ride = generate_ride(script);
  write_truth_csv(ride, "truth.tmp");
  std::ifstream in("truth.tmp");
  std::string header, first;
  REQUIRE(std::getline(in, header));
  CHECK(header == "t,label");
  REQUIRE(std::getline(in, first));
  CHECK(first == "0.01,0");
  int rows = 1;
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) {
      ++rows;
      last = line;
    }
  CHECK(rows == 200);
  CHECK(last == "2,1");
  std::remove("truth.tmp");
}
