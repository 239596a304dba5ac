#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace surf {

using Vec3 = std::array<double, 3>;

constexpr double kGravity = 9.80665;  // m/s^2

// One inertial sample in the internal device frame (x forward, y left, z up).
// accel in m/s^2 (specific force), gyro in rad/s, t in seconds from stream start.
struct ImuSample {
  double t = 0.0;
  Vec3 accel{0.0, 0.0, 0.0};
  Vec3 gyro{0.0, 0.0, 0.0};
};

// Uniformly sampled 6-channel stream. Timestamps must be strictly increasing
// and spaced 1/rate_hz within a 20% jitter tolerance.
struct ImuSeries {
  double rate_hz = 0.0;
  std::vector<ImuSample> samples;

  std::size_t size() const { return samples.size(); }
};

// Signed permutation mapping log columns onto the internal device frame.
struct FrameConvention {
  std::array<int, 3> source_axis{0, 1, 2};   // internal axis i reads log axis source_axis[i]
  std::array<double, 3> sign{1.0, 1.0, 1.0};

  static FrameConvention identity() { return {}; }

  // Accepts specs like "x,y,z", "-y,x,z", "y,-x,z". Throws ParameterError.
  static FrameConvention parse(const std::string& spec);

  bool is_signed_permutation() const;

  Vec3 apply(const Vec3& v) const {
    return {sign[0] * v[source_axis[0]], sign[1] * v[source_axis[1]],
            sign[2] * v[source_axis[2]]};
  }
};

struct ValidationIssue {
  enum class Kind { NonFinite, NonMonotone, Gap, NegativeTime, BadRate };
  Kind kind;
  std::size_t index;
  std::string detail;
};

// Reads a raw log CSV with header `t,ax,ay,az,gx,gy,gz` and remaps axes into
// the internal frame. rate_hz is estimated as (n-1)/(t_last-t_first).
// Lines starting with '#' are skipped. Throws ParseError / DataError.
ImuSeries parse_imu_csv(const std::string& path,
                        const FrameConvention& convention = FrameConvention::identity());

// Writes the same CSV schema, preceded by a `# rate=<hz>` comment line.
// Numbers are printed round-trip exact.
void write_imu_csv(const ImuSeries& series, const std::string& path);

// Reports every invariant violation; an empty report means the series is valid.
std::vector<ValidationIssue> validate_series(const ImuSeries& series);

}  // namespace surf
