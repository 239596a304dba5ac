#pragma once

#include <cstdint>
#include <vector>

#include "surf/dataset.hpp"
#include "surf/prediction.hpp"

namespace surf {

// A window flattened time-major: feature index = t*6 + channel, length 120*S.
struct FlatExample {
  std::vector<double> x;
  int y = 0;
};

FlatExample flatten(const LabeledWindow& w);

// Per-feature train statistics. std == 0 marks a zero-variance feature whose
// standardized value is defined as 0.
struct Standardizer {
  std::vector<double> mean, std;
};

Standardizer standardize_fit(const Dataset& train);
std::vector<double> standardize_apply(const Standardizer& s,
                                      const std::vector<double>& x);

// ---- linear SVM (Pegasos-style primal subgradient descent) --------------

struct SvmConfig {
  double lambda = 1e-4;
  int epochs = 20;
  std::uint64_t seed = 0;
};

struct SvmModel {
  int window_seconds = 0;
  std::uint64_t seed = 0;
  double lambda = 1e-4;  // regularization used at training time
  Standardizer scaler;
  std::vector<double> w;
  double b = 0.0;
};

struct SvmTrainInfo {
  std::vector<double> epoch_objective;  // (lambda/2)|w|^2 + mean hinge, per epoch
};

// Throws DataError when only one class is present.
SvmModel train_linear_svm(const Dataset& data, const SvmConfig& cfg,
                          SvmTrainInfo* info = nullptr);

// Objective of the stated primal problem on `data` (standardized internally).
double svm_objective(const SvmModel& m, const Dataset& data);

// score s = w . standardize(x) + b; label 1 iff s >= 0; p = logistic(s).
Prediction predict_svm(const SvmModel& m, const std::vector<double>& x);

// ---- random forest (CART, Gini) ------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  int count0 = 0, count1 = 0;  // training class counts reaching this node
};

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 100;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct ForestModel {
  int window_seconds = 0;
  std::uint64_t seed = 0;
  int max_depth = 100;
  int dim = 0;
  std::vector<std::vector<TreeNode>> trees;
};

// Per tree: bootstrap resample, greedy Gini splits over ceil(sqrt(d)) random
// feature candidates (falling back to a full scan when none of them splits),
// stopping at purity, max_depth, or fewer than 2 samples.
// Throws DataError when only one class is present.
ForestModel train_random_forest(const Dataset& data, const ForestConfig& cfg);

// p = fraction of trees voting 1 (leaf majority, ties vote 1).
Prediction predict_forest(const ForestModel& m, const std::vector<double>& x);

int tree_depth(const std::vector<TreeNode>& tree);

}  // namespace surf
