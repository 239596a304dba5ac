#pragma once

#include <string>
#include <vector>

#include "surf/dataset.hpp"
#include "surf/model_io.hpp"

namespace surf {

// Confusion counts with label 1 (sidewalk) as the positive class.
struct Confusion {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const { return tp + fp + tn + fn; }
};

// Counts agreement between predicted and true labels. Both vectors must be
// the same nonzero length.
Confusion confusion(const std::vector<int>& preds, const std::vector<int>& truth);

struct MetricsReport {
  Confusion counts;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
  // A metric whose denominator is zero is reported as 0 and flagged here.
  bool accuracy_degenerate = false;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
  bool fpr_degenerate = false;
  std::string model;
  int window_seconds = 0;
};

// Derives all metrics from the counts; model tag and window are left empty.
MetricsReport metrics(const Confusion& counts);

// Predicts every window in `val` and aggregates. Fills the model tag and
// window length from the model itself.
MetricsReport evaluate(const ModelAny& model, const Dataset& val);

// Aligned plain-text table with columns Model, Window, Accuracy, F1, FPR.
std::string format_table(const std::vector<MetricsReport>& rows);

// Machine-readable twin of the table, one row per report, plus raw counts.
void write_metrics_csv(const std::string& path, const std::vector<MetricsReport>& rows);

}  // namespace surf
