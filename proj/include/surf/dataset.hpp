#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "surf/preprocess.hpp"

namespace surf {

inline constexpr int kChannels = 6;
inline constexpr double kWindowRateHz = 20.0;

struct WindowConfig {
  int window_seconds = 3;
  double rate_hz = kWindowRateHz;
  double stride_seconds = 0.0;  // 0 means "= window_seconds" (non-overlapping)

  int window_samples() const { return window_seconds * 20; }
  int stride_samples() const;
  void validate() const;  // throws ParameterError
};

// One classifier input: x is 20*S rows by 6 columns (ax ay az gx gy gz),
// stored row-major, i.e. flat index = t*6 + channel. y: 0 road, 1 sidewalk.
struct LabeledWindow {
  std::vector<double> x;
  int rows = 0;
  int y = 0;

  double at(int t, int ch) const { return x[static_cast<std::size_t>(t) * kChannels + ch]; }
};

struct Dataset {
  WindowConfig config;
  std::vector<LabeledWindow> examples;
  std::vector<std::string> provenance;  // source drive id per example

  std::size_t size() const { return examples.size(); }
  // (#label 0, #label 1)
  std::pair<std::size_t, std::size_t> class_balance() const;
};

// One continuous single-surface recording, already preprocessed to 20 Hz.
struct Drive {
  std::string id;
  int label = 0;
  LeveledSeries series;
};

// Non-overlapping by default; trailing partial window dropped. Series shorter
// than one window yields an empty result (caller decides whether to warn).
std::vector<LabeledWindow> partition_windows(const LeveledSeries& s, int label,
                                             const WindowConfig& cfg);

// Splits by whole drive. Throws ParameterError on unknown ids or when either
// side would end up empty.
std::pair<Dataset, Dataset> split_train_val(const std::vector<Drive>& drives,
                                            const std::vector<std::string>& val_ids,
                                            const WindowConfig& cfg);

// Text format: header `SURFDS v1, S=<n>, rate=20`, then `# drive <id>` marker
// lines and CSV rows `label,v1,...,v(120*S)` (time-major). Lossless.
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace surf
