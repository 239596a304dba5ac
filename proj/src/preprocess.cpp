#include "surf/preprocess.hpp"

#include <cmath>
#include <complex>

#include "surf/errors.hpp"

namespace surf {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

BiquadCascade butterworth_coeffs(const FilterSpec& spec) {
  if (spec.order < 2 || spec.order % 2 != 0) {
    throw ParameterError("filter order must be even and >= 2, got " +
                         std::to_string(spec.order));
  }
  if (!(spec.input_rate_hz > 0.0)) {
    throw ParameterError("input rate must be positive");
  }
  if (!(spec.cutoff_hz > 0.0) || spec.cutoff_hz >= spec.input_rate_hz / 2.0) {
    throw ParameterError("cutoff must lie in (0, rate/2), got " +
                         std::to_string(spec.cutoff_hz) + " at rate " +
                         std::to_string(spec.input_rate_hz));
  }
  // Analog prototype pole pairs s^2 + a_k s + 1, a_k = 2 sin((2k-1)pi/2n),
  // mapped by the bilinear transform with the cutoff pre-warped.
  const int n = spec.order;
  const double w = std::tan(kPi * spec.cutoff_hz / spec.input_rate_hz);
  const double w2 = w * w;
  BiquadCascade cascade;
  cascade.reserve(n / 2);
  for (int k = 1; k <= n / 2; ++k) {
    double a = 2.0 * std::sin((2.0 * k - 1.0) * kPi / (2.0 * n));
    double d = 1.0 + a * w + w2;
    Biquad q;
    q.b0 = w2 / d;
    q.b1 = 2.0 * w2 / d;
    q.b2 = w2 / d;
    q.a1 = 2.0 * (w2 - 1.0) / d;
    q.a2 = (1.0 - a * w + w2) / d;
    cascade.push_back(q);
  }
  return cascade;
}

double cascade_magnitude(const BiquadCascade& cascade, double freq_hz, double rate_hz) {
  const std::complex<double> z = std::polar(1.0, -2.0 * kPi * freq_hz / rate_hz);
  std::complex<double> h{1.0, 0.0};
  for (const Biquad& q : cascade) {
    h *= (q.b0 + q.b1 * z + q.b2 * z * z) / (1.0 + q.a1 * z + q.a2 * z * z);
  }
  return std::abs(h);
}

ImuSeries lowpass_filter(const ImuSeries& x, const FilterSpec& spec) {
  if (std::abs(x.rate_hz - spec.input_rate_hz) > 0.01 * spec.input_rate_hz) {
    throw ParameterError("series rate " + std::to_string(x.rate_hz) +
                         " does not match filter design rate " +
                         std::to_string(spec.input_rate_hz));
  }
  BiquadCascade cascade = butterworth_coeffs(spec);
  ImuSeries out = x;
  for (int ch = 0; ch < 6; ++ch) {
    CascadeState state(cascade);
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
      double v = ch < 3 ? x.samples[i].accel[ch] : x.samples[i].gyro[ch - 3];
      double y = state.step(v);
      if (ch < 3) {
        out.samples[i].accel[ch] = y;
      } else {
        out.samples[i].gyro[ch - 3] = y;
      }
    }
  }
  return out;
}

ImuSeries decimate(const ImuSeries& x, double target_hz) {
  if (!(target_hz > 0.0)) throw ParameterError("target rate must be positive");
  double ratio = x.rate_hz / target_hz;
  auto factor = static_cast<long>(std::lround(ratio));
  if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-6) {
    throw ParameterError("decimation factor " + std::to_string(ratio) +
                         " is not an integer");
  }
  ImuSeries out;
  out.rate_hz = target_hz;
  out.samples.reserve((x.samples.size() + factor - 1) / factor);
  for (std::size_t i = 0; i < x.samples.size(); i += factor) {
    out.samples.push_back(x.samples[i]);
  }
  return out;
}

Attitude estimate_roll_pitch(const Vec3& accel_mean) {
  const double norm = std::sqrt(accel_mean[0] * accel_mean[0] +
                                accel_mean[1] * accel_mean[1] +
                                accel_mean[2] * accel_mean[2]);
  if (!(norm > 1.0)) {
    throw ParameterError("mean specific force too small to observe gravity: |f|=" +
                         std::to_string(norm));
  }
  Attitude a;
  a.roll = std::atan2(accel_mean[1], accel_mean[2]);
  a.pitch = std::atan2(-accel_mean[0],
                       std::sqrt(accel_mean[1] * accel_mean[1] +
                                 accel_mean[2] * accel_mean[2]));
  return a;
}

Mat3 rotation_from_roll_pitch(const Attitude& a) {
  const double cr = std::cos(a.roll), sr = std::sin(a.roll);
  const double cp = std::cos(a.pitch), sp = std::sin(a.pitch);
  // R_y(pitch) * R_x(roll)
  return Mat3{Vec3{cp, sp * sr, sp * cr},
              Vec3{0.0, cr, -sr},
              Vec3{-sp, cp * sr, cp * cr}};
}

Vec3 mat3_apply(const Mat3& m, const Vec3& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
          m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
          m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

ImuSeries apply_leveling(const ImuSeries& x, const Attitude& a) {
  const Mat3 r = rotation_from_roll_pitch(a);
  ImuSeries out = x;
  for (ImuSample& s : out.samples) {
    s.accel = mat3_apply(r, s.accel);
    s.gyro = mat3_apply(r, s.gyro);
  }
  return out;
}

ImuSeries subtract_gravity(const ImuSeries& x) {
  ImuSeries out = x;
  for (ImuSample& s : out.samples) s.accel[2] -= kGravity;
  return out;
}

Vec3 mean_accel(const ImuSeries& x) {
  Vec3 m{0.0, 0.0, 0.0};
  if (x.samples.empty()) return m;
  for (const ImuSample& s : x.samples) {
    for (int c = 0; c < 3; ++c) m[c] += s.accel[c];
  }
  for (int c = 0; c < 3; ++c) m[c] /= static_cast<double>(x.samples.size());
  return m;
}

ImuSeries filtered_decimated(const ImuSeries& x, double cutoff_hz, double target_hz) {
  FilterSpec spec;
  spec.cutoff_hz = cutoff_hz;
  spec.input_rate_hz = x.rate_hz;
  return decimate(lowpass_filter(x, spec), target_hz);
}

LeveledSeries level_and_strip_gravity(const ImuSeries& filtered20, const Attitude& a) {
  ImuSeries leveled = subtract_gravity(apply_leveling(filtered20, a));
  LeveledSeries out;
  out.rate_hz = leveled.rate_hz;
  out.samples = std::move(leveled.samples);
  return out;
}

LeveledSeries preprocess_pipeline(const ImuSeries& x) {
  ImuSeries f20 = filtered_decimated(x);
  Attitude a = estimate_roll_pitch(mean_accel(f20));
  return level_and_strip_gravity(f20, a);
}

}  // namespace surf
