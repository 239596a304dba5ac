#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surf/imu.hpp"

namespace surf {

// Statistical signature of one surface type, in the navigation frame.
// Roads are smooth broadband vibration; sidewalks add a periodic impulse
// train from slab joints.
struct SurfaceProfile {
  int label = 0;                       // 0 road, 1 sidewalk
  double vibration_std = 0.0;          // broadband accel noise, m/s^2
  double impact_rate_hz = 0.0;         // slab joint crossings per second
  double impact_amplitude = 0.0;       // m/s^2, added to the vertical axis
  double gyro_jitter_std = 0.0;        // rad/s
  double forward_accel_amplitude = 0.0;  // slow speed modulation, m/s^2
  double forward_accel_hz = 0.0;
};

SurfaceProfile road_profile();
SurfaceProfile sidewalk_profile();

struct RideSegment {
  double duration_s = 0.0;
  SurfaceProfile profile;
  double roll = 0.0;   // mounting attitude, rad
  double pitch = 0.0;  // rad
  double wind = 1.0;   // multiplier on broadband noise (accel and gyro)
};

struct RideScript {
  std::vector<RideSegment> segments;
  std::uint64_t seed = 0;
  double rate_hz = 100.0;
};

struct Ride {
  ImuSeries series;           // device frame, 100 Hz
  std::vector<int> labels;    // per-sample surface label
};

// Deterministic given the script. Samples are emitted at t = (i+1)/rate so an
// L-second script spans (0, L] with exactly L*rate samples.
// The emitted specific force is gravity-consistent under each segment's tilt.
Ride generate_ride(const RideScript& script);

// Writes `t,label` rows next to the raw CSV.
void write_truth_csv(const Ride& ride, const std::string& path);

}  // namespace surf
