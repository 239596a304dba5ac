#include "surf/stream.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <utility>

#include "surf/errors.hpp"

namespace surf {

namespace {

constexpr double kTargetRate = 20.0;
constexpr double kCutoffHz = 10.0;

LabeledWindow window_from_leveled(const std::vector<ImuSample>& samples) {
  LabeledWindow w;
  w.rows = static_cast<int>(samples.size());
  w.x.resize(samples.size() * kChannels);
  for (std::size_t t = 0; t < samples.size(); ++t) {
    double* row = w.x.data() + t * kChannels;
    const ImuSample& smp = samples[t];
    row[0] = smp.accel[0];
    row[1] = smp.accel[1];
    row[2] = smp.accel[2];
    row[3] = smp.gyro[0];
    row[4] = smp.gyro[1];
    row[5] = smp.gyro[2];
  }
  return w;
}

// Shared by the online and offline paths: level one buffered window with its
// own mean specific force, strip gravity, and classify.
Prediction classify_device_window(const ModelAny& model, std::vector<ImuSample> window) {
  ImuSeries win;
  win.rate_hz = kTargetRate;
  win.samples = std::move(window);
  const Attitude att = estimate_roll_pitch(mean_accel(win));
  const LeveledSeries leveled = level_and_strip_gravity(win, att);
  return predict_any(model, window_from_leveled(leveled.samples));
}

}  // namespace

void StreamConfig::validate() const {
  if (window_seconds < 1) throw ParameterError("stream window must be at least 1 s");
  if (!(activation_seconds > 0.0))
    throw ParameterError("activation interval must be positive");
}

OnlineClassifier::OnlineClassifier(ModelAny model, const StreamConfig& cfg,
                                   double input_rate_hz)
    : model_(std::move(model)),
      cfg_(cfg),
      last_t_(-std::numeric_limits<double>::infinity()),
      next_boundary_(cfg.activation_seconds) {
  cfg_.validate();
  if (model_window_seconds(model_) != cfg_.window_seconds) {
    throw ParameterError("model window is " + std::to_string(model_window_seconds(model_)) +
                         " s but the stream window is " + std::to_string(cfg_.window_seconds) +
                         " s");
  }
  const double ratio = input_rate_hz / kTargetRate;
  factor_ = static_cast<int>(std::lround(ratio));
  if (factor_ < 1 || std::abs(ratio - factor_) > 1e-6) {
    throw ParameterError("input rate " + std::to_string(input_rate_hz) +
                         " Hz is not an integer multiple of 20 Hz");
  }
  const BiquadCascade cascade =
      butterworth_coeffs({4, kCutoffHz, input_rate_hz});
  filters_.assign(static_cast<std::size_t>(kChannels), CascadeState(cascade));
  ring_.resize(static_cast<std::size_t>(cfg_.window_seconds) *
               static_cast<std::size_t>(kTargetRate));
}

std::optional<StreamDecision> OnlineClassifier::push_sample(const ImuSample& s) {
  if (!std::isfinite(s.t) || s.t <= last_t_) {
    throw StreamError("timestamp " + std::to_string(s.t) + " is not after " +
                      std::to_string(last_t_));
  }
  last_t_ = s.t;

  ImuSample filtered;
  filtered.t = s.t;
  for (int c = 0; c < 3; ++c) filtered.accel[c] = filters_[c].step(s.accel[c]);
  for (int c = 0; c < 3; ++c) filtered.gyro[c] = filters_[3 + c].step(s.gyro[c]);

  if (raw_index_ % factor_ == 0) {
    ring_[ring_head_] = filtered;
    ring_head_ = (ring_head_ + 1) % ring_.size();
    if (ring_count_ < ring_.size()) ++ring_count_;
  }
  ++raw_index_;

  if (s.t >= next_boundary_ && ring_count_ == ring_.size()) {
    StreamDecision d = classify_window(s.t);
    next_boundary_ =
        (std::floor(s.t / cfg_.activation_seconds) + 1.0) * cfg_.activation_seconds;
    return d;
  }
  return std::nullopt;
}

StreamDecision OnlineClassifier::classify_window(double t) const {
  // ring_head_ points at the oldest sample once the buffer is full.
  std::vector<ImuSample> ordered(ring_.size());
  for (std::size_t i = 0; i < ring_.size(); ++i)
    ordered[i] = ring_[(ring_head_ + i) % ring_.size()];
  StreamDecision d;
  d.t = t;
  d.prediction = classify_device_window(model_, std::move(ordered));
  return d;
}

std::vector<StreamDecision> replay_stream(const ModelAny& model, const StreamConfig& cfg,
                                          const ImuSeries& series) {
  std::vector<StreamDecision> out;
  if (series.samples.empty()) return out;
  OnlineClassifier clf(model, cfg, series.rate_hz);
  for (const ImuSample& s : series.samples) {
    if (auto d = clf.push_sample(s)) out.push_back(*d);
  }
  return out;
}

void write_decisions_csv(const std::string& path, const std::vector<StreamDecision>& decisions) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "t,p,label\n";
  char buf[96];
  for (const StreamDecision& d : decisions) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", d.t, d.prediction.p,
                  d.prediction.label);
    out << buf;
  }
  if (!out.flush()) throw DataError("write failed for " + path);
}

EquivalenceReport stream_vs_batch_equivalence(const ModelAny& model, const StreamConfig& cfg,
                                              const ImuSeries& series) {
  EquivalenceReport report;
  if (series.samples.empty()) return report;

  const std::vector<StreamDecision> decisions = replay_stream(model, cfg, series);
  if (decisions.empty()) return report;

  // Offline recomputation: filter + decimate the whole recording once, then
  // for each decision slice the trailing window of kept samples the stream
  // had buffered at that moment.
  const ImuSeries kept = filtered_decimated(series, kCutoffHz, kTargetRate);
  const std::size_t win =
      static_cast<std::size_t>(cfg.window_seconds) * static_cast<std::size_t>(kTargetRate);

  std::size_t m = 0;  // kept samples with t <= decision time
  for (const StreamDecision& d : decisions) {
    while (m < kept.samples.size() && kept.samples[m].t <= d.t) ++m;
    if (m < win) throw StreamError("offline window undercuts the warm-up rule");
    std::vector<ImuSample> window(kept.samples.begin() + (m - win),
                                  kept.samples.begin() + m);
    const Prediction batch = classify_device_window(model, std::move(window));
    report.max_abs_diff =
        std::max(report.max_abs_diff, std::abs(batch.p - d.prediction.p));
    ++report.pairs;
  }
  return report;
}

}  // namespace surf
