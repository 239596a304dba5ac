#include "surf/eval.hpp"

#include <cstdio>
#include <fstream>

#include "surf/errors.hpp"

namespace surf {

Confusion confusion(const std::vector<int>& preds, const std::vector<int>& truth) {
  if (preds.empty()) throw ParameterError("confusion: no predictions");
  if (preds.size() != truth.size())
    throw ParameterError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                         std::to_string(truth.size()) + " labels");
  Confusion c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] != 0;
    const bool y = truth[i] != 0;
    if (p && y)
      ++c.tp;
    else if (p && !y)
      ++c.fp;
    else if (!p && !y)
      ++c.tn;
    else
      ++c.fn;
  }
  return c;
}

namespace {

double ratio(long num, long den, bool* degenerate) {
  if (den == 0) {
    *degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricsReport metrics(const Confusion& counts) {
  MetricsReport r;
  r.counts = counts;
  r.accuracy = ratio(counts.tp + counts.tn, counts.total(), &r.accuracy_degenerate);
  r.precision = ratio(counts.tp, counts.tp + counts.fp, &r.precision_degenerate);
  r.recall = ratio(counts.tp, counts.tp + counts.fn, &r.recall_degenerate);
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  } else {
    r.f1 = 0.0;
    r.f1_degenerate = true;
  }
  r.fpr = ratio(counts.fp, counts.fp + counts.tn, &r.fpr_degenerate);
  return r;
}

MetricsReport evaluate(const ModelAny& model, const Dataset& val) {
  if (val.examples.empty()) throw ParameterError("evaluate: empty validation set");
  std::vector<int> preds(val.examples.size());
  std::vector<int> truth(val.examples.size());
  for (std::size_t i = 0; i < val.examples.size(); ++i) {
    preds[i] = predict_any(model, val.examples[i]).label;
    truth[i] = val.examples[i].y;
  }
  MetricsReport r = metrics(confusion(preds, truth));
  r.model = model_arch_name(model);
  r.window_seconds = model_window_seconds(model);
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string format_table(const std::vector<MetricsReport>& rows) {
  std::size_t model_w = 5;  // "Model"
  for (const MetricsReport& r : rows) model_w = std::max(model_w, r.model.size());

  std::string out;
  auto cell = [&out](const std::string& s, std::size_t width) {
    out += s;
    out.append(width > s.size() ? width - s.size() : 0, ' ');
    out += "  ";
  };
  cell("Model", model_w);
  cell("Window", 6);
  cell("Accuracy", 8);
  cell("F1", 6);
  out += "FPR\n";
  for (const MetricsReport& r : rows) {
    cell(r.model, model_w);
    cell(std::to_string(r.window_seconds) + " s", 6);
    cell(fmt(r.accuracy), 8);
    cell(fmt(r.f1), 6);
    out += fmt(r.fpr);
    out += '\n';
  }
  return out;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsReport>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "model,window_seconds,accuracy,precision,recall,f1,fpr,tp,fp,tn,fn\n";
  char buf[256];
  for (const MetricsReport& r : rows) {
    std::snprintf(buf, sizeof(buf), ",%d,%.17g,%.17g,%.17g,%.17g,%.17g,%ld,%ld,%ld,%ld\n",
                  r.window_seconds, r.accuracy, r.precision, r.recall, r.f1, r.fpr, r.counts.tp,
                  r.counts.fp, r.counts.tn, r.counts.fn);
    out << r.model << buf;
  }
  if (!out.flush()) throw DataError("write failed for " + path);
}

}  // namespace surf
