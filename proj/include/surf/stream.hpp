#pragma once

#include <optional>
#include <string>
#include <vector>

#include "surf/model_io.hpp"
#include "surf/preprocess.hpp"

namespace surf {

struct StreamConfig {
  int window_seconds = 3;        // S: classified window length
  double activation_seconds = 5.0;  // T: decision interval

  void validate() const;
};

struct StreamDecision {
  double t = 0.0;  // timestamp of the sample that triggered the decision
  Prediction prediction;
};

// Online surface classifier: raw IMU samples in, one decision per activation
// interval. Internally mirrors the offline pipeline with causal pieces only:
// a streaming low-pass filter at the input rate, decimation to 20 Hz, and a
// ring buffer holding the most recent S seconds of filtered device-frame
// samples. At each decision the buffered window is leveled with its own mean
// specific force and fed to the model. Memory use is independent of stream
// length.
class OnlineClassifier {
 public:
  // The model's window length must match cfg.window_seconds, and
  // input_rate_hz must be an integer multiple of 20 Hz.
  OnlineClassifier(ModelAny model, const StreamConfig& cfg, double input_rate_hz);

  // Feeds one raw sample; timestamps must be strictly increasing (throws
  // StreamError otherwise). Returns a decision when the sample's timestamp
  // reaches the next activation boundary and the buffer holds a full window.
  std::optional<StreamDecision> push_sample(const ImuSample& s);

  const StreamConfig& config() const { return cfg_; }
  int window_samples() const { return static_cast<int>(ring_.size()); }

 private:
  ModelAny model_;
  StreamConfig cfg_;
  int factor_;  // input samples per kept 20 Hz sample
  std::vector<CascadeState> filters_;
  std::vector<ImuSample> ring_;
  std::size_t ring_head_ = 0;
  std::size_t ring_count_ = 0;
  long raw_index_ = 0;
  double last_t_;
  double next_boundary_;

  StreamDecision classify_window(double t) const;
};

// Pushes every sample of `series` through a fresh classifier, collecting the
// decision sequence.
std::vector<StreamDecision> replay_stream(const ModelAny& model, const StreamConfig& cfg,
                                          const ImuSeries& series);

// decisions.csv: header `t,p,label`, one row per decision.
void write_decisions_csv(const std::string& path, const std::vector<StreamDecision>& decisions);

struct EquivalenceReport {
  std::size_t pairs = 0;       // matched decision/window pairs
  double max_abs_diff = 0.0;   // max |p_stream - p_batch| over pairs
};

// Runs the streaming path sample-by-sample and independently recomputes each
// decision offline (filter + decimate the whole recording, slice the same
// trailing window, per-window attitude, predict). Reports the worst
// probability disagreement; an empty recording gives an empty report.
EquivalenceReport stream_vs_batch_equivalence(const ModelAny& model, const StreamConfig& cfg,
                                              const ImuSeries& series);

}  // namespace surf
