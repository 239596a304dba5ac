#include "surf/simride.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "surf/errors.hpp"
#include "surf/preprocess.hpp"
#include "surf/rng.hpp"

namespace surf {

SurfaceProfile road_profile() {
  SurfaceProfile p;
  p.label = 0;
  p.vibration_std = 0.3;
  p.impact_rate_hz = 0.0;
  p.impact_amplitude = 0.0;
  p.gyro_jitter_std = 0.05;
  p.forward_accel_amplitude = 0.4;
  p.forward_accel_hz = 0.2;
  return p;
}

SurfaceProfile sidewalk_profile() {
  SurfaceProfile p;
  p.label = 1;
  p.vibration_std = 1.0;
  p.impact_rate_hz = 2.0;
  p.impact_amplitude = 4.0;
  p.gyro_jitter_std = 0.15;
  p.forward_accel_amplitude = 0.4;
  p.forward_accel_hz = 0.2;
  return p;
}

Ride generate_ride(const RideScript& script) {
  if (script.rate_hz <= 0.0) throw ParameterError("ride rate must be positive");
  if (script.segments.empty()) throw ParameterError("ride script has no segments");

  Ride ride;
  ride.series.rate_hz = script.rate_hz;
  Rng rng(script.seed);
  const double dt = 1.0 / script.rate_hz;

  std::size_t index = 0;  // global sample index, first sample lands at t = dt
  for (const RideSegment& seg : script.segments) {
    if (seg.duration_s <= 0.0) throw ParameterError("segment duration must be positive");
    const double count_f = seg.duration_s * script.rate_hz;
    const long long count = std::llround(count_f);
    if (count <= 0 || std::fabs(count_f - static_cast<double>(count)) > 1e-6)
      throw ParameterError("segment duration must be a whole number of samples");

    const SurfaceProfile& prof = seg.profile;
    const Mat3 rot = rotation_from_roll_pitch({seg.roll, seg.pitch});
    const double sigma_a = prof.vibration_std * seg.wind;
    const double sigma_g = prof.gyro_jitter_std * seg.wind;

    // Slab joints fire on a fixed grid relative to the segment start, so the
    // impulse train has the same phase in every ride.
    double impact_phase = 1.0;
    const double impact_step = prof.impact_rate_hz * dt;

    // The speed modulation starts at a random phase so that no classifier can
    // key on where a window sits inside the segment instead of on the surface
    // texture itself.
    const double forward_phase = rng.uniform(0.0, 2.0 * M_PI);

    for (long long j = 0; j < count; ++j, ++index) {
      const double t_seg = static_cast<double>(j) * dt;

      Vec3 accel_nav = {
          prof.forward_accel_amplitude *
                  std::sin(2.0 * M_PI * prof.forward_accel_hz * t_seg + forward_phase) +
              0.5 * sigma_a * rng.normal(),
          0.5 * sigma_a * rng.normal(),
          sigma_a * rng.normal(),
      };
      impact_phase += impact_step;
      if (impact_phase >= 1.0) {
        impact_phase -= 1.0;
        accel_nav[2] += prof.impact_amplitude;
      }
      Vec3 gyro_nav = {sigma_g * rng.normal(), sigma_g * rng.normal(),
                       sigma_g * rng.normal()};

      // The accelerometer reports specific force: nav-frame gravity reaction
      // plus motion, rotated into the tilted device frame.
      Vec3 f_nav = accel_nav;
      f_nav[2] += kGravity;
      Vec3 f_dev = {rot[0][0] * f_nav[0] + rot[1][0] * f_nav[1] + rot[2][0] * f_nav[2],
                    rot[0][1] * f_nav[0] + rot[1][1] * f_nav[1] + rot[2][1] * f_nav[2],
                    rot[0][2] * f_nav[0] + rot[1][2] * f_nav[1] + rot[2][2] * f_nav[2]};
      Vec3 g_dev = {rot[0][0] * gyro_nav[0] + rot[1][0] * gyro_nav[1] + rot[2][0] * gyro_nav[2],
                    rot[0][1] * gyro_nav[0] + rot[1][1] * gyro_nav[1] + rot[2][1] * gyro_nav[2],
                    rot[0][2] * gyro_nav[0] + rot[1][2] * gyro_nav[1] + rot[2][2] * gyro_nav[2]};

      ImuSample s;
      s.t = static_cast<double>(index + 1) * dt;
      s.accel = f_dev;
      s.gyro = g_dev;
      ride.series.samples.push_back(s);
      ride.labels.push_back(prof.label);
    }
  }
  return ride;
}

void write_truth_csv(const Ride& ride, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("cannot open " + path + " for writing");
  std::fprintf(f, "t,label\n");
  for (std::size_t i = 0; i < ride.series.samples.size(); ++i)
    std::fprintf(f, "%.17g,%d\n", ride.series.samples[i].t, ride.labels[i]);
  std::fclose(f);
}

}  // namespace surf
