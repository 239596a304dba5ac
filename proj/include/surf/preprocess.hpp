#pragma once

#include <array>
#include <vector>

#include "surf/imu.hpp"

namespace surf {

using Mat3 = std::array<Vec3, 3>;  // row-major

// Low-pass filter design request. Realized as a Butterworth cascade of
// order/2 biquads via the bilinear transform with frequency pre-warping.
struct FilterSpec {
  int order = 4;
  double cutoff_hz = 10.0;
  double input_rate_hz = 100.0;
};

// Second-order section, direct form II transposed. a0 normalized to 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

using BiquadCascade = std::vector<Biquad>;

// Single-channel streaming state for one cascade.
class CascadeState {
 public:
  explicit CascadeState(const BiquadCascade& cascade)
      : cascade_(cascade), state_(cascade.size(), {0.0, 0.0}) {}

  double step(double x) {
    for (std::size_t i = 0; i < cascade_.size(); ++i) {
      const Biquad& q = cascade_[i];
      auto& [s1, s2] = state_[i];
      double y = q.b0 * x + s1;
      s1 = q.b1 * x - q.a1 * y + s2;
      s2 = q.b2 * x - q.a2 * y;
      x = y;
    }
    return x;
  }

  void reset() {
    for (auto& s : state_) s = {0.0, 0.0};
  }

 private:
  BiquadCascade cascade_;
  std::vector<std::array<double, 2>> state_;
};

// Roll/pitch attitude of the device relative to the local level frame.
struct Attitude {
  double roll = 0.0;   // rad, (-pi, pi]
  double pitch = 0.0;  // rad, [-pi/2, pi/2]
};

// Output of the full pre-processing pipeline: 20 Hz, navigation frame
// (x forward, z up), gravity removed from the third accel component.
struct LeveledSeries {
  double rate_hz = 0.0;
  std::vector<ImuSample> samples;

  std::size_t size() const { return samples.size(); }
};

// Throws ParameterError unless 0 < cutoff < rate/2 and order is even, >= 2.
// The cascade has unit DC gain by construction.
BiquadCascade butterworth_coeffs(const FilterSpec& spec);

// |H(e^{j 2 pi f / fs})| of the cascade.
double cascade_magnitude(const BiquadCascade& cascade, double freq_hz, double rate_hz);

// Causal forward pass over all 6 channels, zero initial state, length preserved.
ImuSeries lowpass_filter(const ImuSeries& x, const FilterSpec& spec);

// Keeps every (rate/target)-th sample starting at index 0.
// Throws ParameterError when the ratio is not an integer.
ImuSeries decimate(const ImuSeries& x, double target_hz);

// Accelerometer leveling from the mean specific force in the device frame.
// Throws ParameterError when |accel_mean| <= 1 m/s^2 (gravity unobservable).
Attitude estimate_roll_pitch(const Vec3& accel_mean);

// R = R_y(pitch) * R_x(roll); maps device-frame vectors to the navigation
// frame, sending the static mean specific force to (0, 0, +|f|).
Mat3 rotation_from_roll_pitch(const Attitude& a);

Vec3 mat3_apply(const Mat3& m, const Vec3& v);

// Rotates every accel and gyro vector by rotation_from_roll_pitch(a).
ImuSeries apply_leveling(const ImuSeries& x, const Attitude& a);

// Removes g0 from the third accel component. Input must already be leveled.
ImuSeries subtract_gravity(const ImuSeries& x);

Vec3 mean_accel(const ImuSeries& x);

// Full offline pipeline: lowpass(10 Hz) -> decimate(20 Hz) -> level with one
// attitude from the whole recording's mean filtered accel -> subtract gravity.
LeveledSeries preprocess_pipeline(const ImuSeries& x);

// Pipeline stages with explicit knobs (window-level attitude is the streaming
// module's concern; it reuses these pieces).
ImuSeries filtered_decimated(const ImuSeries& x, double cutoff_hz = 10.0,
                             double target_hz = 20.0);
LeveledSeries level_and_strip_gravity(const ImuSeries& filtered20, const Attitude& a);

}  // namespace surf
