#include "surf/imu.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "surf/errors.hpp"

namespace surf {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok, std::size_t line_no) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  }
  if (!std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line_no) + ": non-finite value '" + tok + "'");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(trim(tok));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

void format_double(char* buf, std::size_t n, double v) { std::snprintf(buf, n, "%.17g", v); }

}  // namespace

FrameConvention FrameConvention::parse(const std::string& spec) {
  FrameConvention c;
  auto toks = split_csv(spec);
  if (toks.size() != 3) {
    throw ParameterError("axis spec must have 3 comma-separated entries: '" + spec + "'");
  }
  for (int i = 0; i < 3; ++i) {
    std::string t = toks[i];
    double s = 1.0;
    if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
      s = (t[0] == '-') ? -1.0 : 1.0;
      t = t.substr(1);
    }
    if (t != "x" && t != "y" && t != "z") {
      throw ParameterError("axis entry must be one of x,y,z: '" + toks[i] + "'");
    }
    c.source_axis[i] = t == "x" ? 0 : (t == "y" ? 1 : 2);
    c.sign[i] = s;
  }
  if (!c.is_signed_permutation()) {
    throw ParameterError("axis spec is not a permutation: '" + spec + "'");
  }
  return c;
}

bool FrameConvention::is_signed_permutation() const {
  std::array<bool, 3> seen{false, false, false};
  for (int i = 0; i < 3; ++i) {
    if (source_axis[i] < 0 || source_axis[i] > 2) return false;
    if (seen[source_axis[i]]) return false;
    seen[source_axis[i]] = true;
    if (sign[i] != 1.0 && sign[i] != -1.0) return false;
  }
  return true;
}

ImuSeries parse_imu_csv(const std::string& path, const FrameConvention& convention) {
  if (!convention.is_signed_permutation()) {
    throw ParameterError("frame convention is not a signed permutation");
  }
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  ImuSeries series;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header_seen) {
      if (t != "t,ax,ay,az,gx,gy,gz") {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected header 't,ax,ay,az,gx,gy,gz', got '" + t + "'");
      }
      header_seen = true;
      continue;
    }
    auto toks = split_csv(t);
    if (toks.size() != 7) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 7 fields, got " +
                       std::to_string(toks.size()));
    }
    ImuSample s;
    s.t = parse_double(toks[0], line_no);
    Vec3 a{parse_double(toks[1], line_no), parse_double(toks[2], line_no),
           parse_double(toks[3], line_no)};
    Vec3 g{parse_double(toks[4], line_no), parse_double(toks[5], line_no),
           parse_double(toks[6], line_no)};
    s.accel = convention.apply(a);
    s.gyro = convention.apply(g);
    if (!series.samples.empty() && s.t <= series.samples.back().t) {
      throw DataError("line " + std::to_string(line_no) + ": non-monotone timestamp " +
                      std::to_string(s.t));
    }
    series.samples.push_back(s);
  }
  if (!header_seen) throw ParseError("'" + path + "': missing header");
  if (series.samples.size() < 2) {
    throw DataError("'" + path + "': need at least 2 samples, got " +
                    std::to_string(series.samples.size()));
  }
  double span = series.samples.back().t - series.samples.front().t;
  series.rate_hz = static_cast<double>(series.samples.size() - 1) / span;
  return series;
}

void write_imu_csv(const ImuSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot open '" + path + "' for writing");
  char buf[32];
  format_double(buf, sizeof buf, series.rate_hz);
  out << "# rate=" << buf << "\n";
  out << "t,ax,ay,az,gx,gy,gz\n";
  for (const ImuSample& s : series.samples) {
    const double vals[7] = {s.t,       s.accel[0], s.accel[1], s.accel[2],
                            s.gyro[0], s.gyro[1],  s.gyro[2]};
    for (int i = 0; i < 7; ++i) {
      format_double(buf, sizeof buf, vals[i]);
      out << buf << (i == 6 ? '\n' : ',');
    }
  }
  if (!out) throw ParameterError("write failed for '" + path + "'");
}

std::vector<ValidationIssue> validate_series(const ImuSeries& series) {
  std::vector<ValidationIssue> issues;
  using Kind = ValidationIssue::Kind;
  if (!(series.rate_hz > 0.0)) {
    issues.push_back({Kind::BadRate, 0, "rate_hz must be positive"});
    return issues;
  }
  const double period = 1.0 / series.rate_hz;
  const double tol = 0.2 * period;
  for (std::size_t i = 0; i < series.samples.size(); ++i) {
    const ImuSample& s = series.samples[i];
    if (s.t < 0.0) issues.push_back({Kind::NegativeTime, i, "t < 0"});
    for (int c = 0; c < 3; ++c) {
      if (!std::isfinite(s.accel[c]) || !std::isfinite(s.gyro[c])) {
        issues.push_back({Kind::NonFinite, i, "non-finite channel value"});
        break;
      }
    }
    if (i > 0) {
      double dt = s.t - series.samples[i - 1].t;
      if (dt <= 0.0) {
        issues.push_back({Kind::NonMonotone, i, "timestamp not increasing"});
      } else if (std::abs(dt - period) > tol) {
        issues.push_back({Kind::Gap, i, "dt=" + std::to_string(dt) + " vs period " +
                                            std::to_string(period)});
      }
    }
  }
  return issues;
}

}  // namespace surf
