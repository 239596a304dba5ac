#pragma once

namespace surf {

// Binary decision with its probability. Threshold is inclusive: p == 0.5
// maps to label 1 (documented tie rule, applied uniformly by every model).
struct Prediction {
  double p = 0.0;
  int label = 0;
};

inline Prediction make_prediction(double p, double threshold = 0.5) {
  return {p, p >= threshold ? 1 : 0};
}

}  // namespace surf
