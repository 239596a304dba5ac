#include "surf/classical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "surf/errors.hpp"
#include "surf/parallel.hpp"
#include "surf/rng.hpp"

namespace surf {

FlatExample flatten(const LabeledWindow& w) { return {w.x, w.y}; }

Standardizer standardize_fit(const Dataset& train) {
  if (train.examples.empty()) throw ParameterError("cannot fit standardizer on empty data");
  const std::size_t d = train.examples.front().x.size();
  const double n = static_cast<double>(train.examples.size());
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  for (const LabeledWindow& w : train.examples) {
    if (w.x.size() != d) throw ShapeError("inconsistent feature lengths");
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += w.x[j];
  }
  for (std::size_t j = 0; j < d; ++j) s.mean[j] /= n;
  for (const LabeledWindow& w : train.examples)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = w.x[j] - s.mean[j];
      s.std[j] += c * c;
    }
  for (std::size_t j = 0; j < d; ++j) s.std[j] = std::sqrt(s.std[j] / n);
  return s;
}

std::vector<double> standardize_apply(const Standardizer& s,
                                      const std::vector<double>& x) {
  if (x.size() != s.mean.size()) throw ShapeError("feature length mismatch");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    out[j] = s.std[j] > 0.0 ? (x[j] - s.mean[j]) / s.std[j] : 0.0;
  return out;
}

namespace {

void require_both_classes(const Dataset& data) {
  const auto [zeros, ones] = data.class_balance();
  if (zeros == 0 || ones == 0)
    throw DataError("training data must contain both classes");
}

double hinge_mean(const std::vector<std::vector<double>>& X,
                  const std::vector<int>& yhat, const std::vector<double>& w,
                  double b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double s = b;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * X[i][j];
    sum += std::max(0.0, 1.0 - yhat[i] * s);
  }
  return sum / static_cast<double>(X.size());
}

}  // namespace

SvmModel train_linear_svm(const Dataset& data, const SvmConfig& cfg,
                          SvmTrainInfo* info) {
  if (cfg.lambda <= 0.0) throw ParameterError("lambda must be positive");
  if (cfg.epochs < 1) throw ParameterError("epochs must be >= 1");
  require_both_classes(data);

  SvmModel m;
  m.window_seconds = data.config.window_seconds;
  m.seed = cfg.seed;
  m.lambda = cfg.lambda;
  m.scaler = standardize_fit(data);

  const std::size_t n = data.examples.size();
  const std::size_t d = m.scaler.mean.size();
  std::vector<std::vector<double>> X(n);
  std::vector<int> yhat(n);
  for (std::size_t i = 0; i < n; ++i) {
    X[i] = standardize_apply(m.scaler, data.examples[i].x);
    yhat[i] = data.examples[i].y == 1 ? 1 : -1;
  }

  m.w.assign(d, 0.0);
  m.b = 0.0;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  long t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      ++t;
      const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
      const std::vector<double>& x = X[idx];
      double s = m.b;
      for (std::size_t j = 0; j < d; ++j) s += m.w[j] * x[j];
      const double shrink = 1.0 - eta * cfg.lambda;  // = 1 - 1/t
      for (std::size_t j = 0; j < d; ++j) m.w[j] *= shrink;
      if (yhat[idx] * s < 1.0) {
        const double step = eta * yhat[idx];
        for (std::size_t j = 0; j < d; ++j) m.w[j] += step * x[j];
        m.b += step;  // bias is not regularized
      }
    }
    if (info) {
      double norm2 = 0.0;
      for (double v : m.w) norm2 += v * v;
      info->epoch_objective.push_back(0.5 * cfg.lambda * norm2 +
                                      hinge_mean(X, yhat, m.w, m.b));
    }
  }
  return m;
}

double svm_objective(const SvmModel& m, const Dataset& data) {
  std::vector<std::vector<double>> X(data.examples.size());
  std::vector<int> yhat(data.examples.size());
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    X[i] = standardize_apply(m.scaler, data.examples[i].x);
    yhat[i] = data.examples[i].y == 1 ? 1 : -1;
  }
  double norm2 = 0.0;
  for (double v : m.w) norm2 += v * v;
  return 0.5 * m.lambda * norm2 + hinge_mean(X, yhat, m.w, m.b);
}

Prediction predict_svm(const SvmModel& m, const std::vector<double>& x) {
  const std::vector<double> z = standardize_apply(m.scaler, x);
  double s = m.b;
  for (std::size_t j = 0; j < z.size(); ++j) s += m.w[j] * z[j];
  const double p = 1.0 / (1.0 + std::exp(-s));
  return {p, s >= 0.0 ? 1 : 0};
}

namespace {

struct TreeBuilder {
  const std::vector<const std::vector<double>*>& X;
  const std::vector<int>& y;
  int dim;
  int max_depth;
  Rng& rng;
  std::vector<TreeNode>& nodes;
  std::vector<int> feature_pool;

  TreeBuilder(const std::vector<const std::vector<double>*>& X_,
              const std::vector<int>& y_, int dim_, int max_depth_, Rng& rng_,
              std::vector<TreeNode>& nodes_)
      : X(X_), y(y_), dim(dim_), max_depth(max_depth_), rng(rng_), nodes(nodes_) {
    feature_pool.resize(dim);
    for (int j = 0; j < dim; ++j) feature_pool[j] = j;
  }

  struct Split {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child Gini
  };

  // Best boundary between distinct sorted values of one feature.
  void scan_feature(int f, const std::vector<int>& idx, Split& best) {
    thread_local std::vector<std::pair<double, int>> vals;
    vals.clear();
    for (int i : idx) vals.emplace_back((*X[i])[f], y[i]);
    std::sort(vals.begin(), vals.end());
    const double n = static_cast<double>(vals.size());
    int left1 = 0;
    int total1 = 0;
    for (auto& [v, label] : vals) total1 += label;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      left1 += vals[i].second;
      if (vals[i].first == vals[i + 1].first) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = n - nl;
      const double pl = left1 / nl, pr = (total1 - left1) / nr;
      const double gini = nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr);
      if (!best.found || gini < best.impurity) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        best.impurity = gini;
      }
    }
  }

  int grow(std::vector<int>& idx, int depth) {
    int c1 = 0;
    for (int i : idx) c1 += y[i];
    const int c0 = static_cast<int>(idx.size()) - c1;
    const int me = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{-1, 0.0, -1, -1, c0, c1});
    if (c0 == 0 || c1 == 0 || depth >= max_depth || idx.size() < 2) return me;

    // ceil(sqrt(d)) candidates drawn without replacement
    const int want = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dim))));
    Split best;
    for (int j = 0; j < want; ++j) {
      const int pick = j + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(dim - j)));
      std::swap(feature_pool[j], feature_pool[pick]);
      scan_feature(feature_pool[j], idx, best);
    }
    if (!best.found)
      for (int f = 0; f < dim; ++f) scan_feature(f, idx, best);
    if (!best.found) return me;  // identical candidate rows; give up as leaf

    std::vector<int> left, right;
    for (int i : idx)
      ((*X[i])[best.feature] < best.threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    nodes[me].feature = best.feature;
    nodes[me].threshold = best.threshold;
    const int l = grow(left, depth + 1);
    nodes[me].left = l;
    const int r = grow(right, depth + 1);
    nodes[me].right = r;
    return me;
  }
};

}  // namespace

ForestModel train_random_forest(const Dataset& data, const ForestConfig& cfg) {
  if (cfg.n_trees < 1) throw ParameterError("forest needs at least one tree");
  if (cfg.max_depth < 1) throw ParameterError("max_depth must be >= 1");
  if (data.examples.size() < 2) throw ParameterError("forest needs at least 2 examples");
  require_both_classes(data);

  ForestModel m;
  m.window_seconds = data.config.window_seconds;
  m.seed = cfg.seed;
  m.max_depth = cfg.max_depth;
  m.dim = static_cast<int>(data.examples.front().x.size());
  m.trees.resize(cfg.n_trees);

  const std::size_t n = data.examples.size();
  std::vector<const std::vector<double>*> X(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X[i] = &data.examples[i].x;
    y[i] = data.examples[i].y;
  }

  parallel_for(cfg.n_trees, [&](std::int64_t ti) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(ti)));
    std::vector<int> idx(n);
    if (cfg.bootstrap) {
      for (std::size_t i = 0; i < n; ++i)
        idx[i] = static_cast<int>(rng.uniform_int(n));
    } else {
      for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
    }
    std::vector<TreeNode>& nodes = m.trees[ti];
    TreeBuilder builder(X, y, m.dim, cfg.max_depth, rng, nodes);
    builder.grow(idx, 0);
  });
  return m;
}

Prediction predict_forest(const ForestModel& m, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != m.dim)
    throw ShapeError("feature length mismatch");
  int votes = 0;
  for (const std::vector<TreeNode>& tree : m.trees) {
    int at = 0;
    while (tree[at].feature >= 0)
      at = x[tree[at].feature] < tree[at].threshold ? tree[at].left : tree[at].right;
    votes += tree[at].count1 >= tree[at].count0 ? 1 : 0;  // leaf ties vote 1
  }
  const double p = static_cast<double>(votes) / static_cast<double>(m.trees.size());
  return make_prediction(p);
}

int tree_depth(const std::vector<TreeNode>& tree) {
  std::function<int(int)> depth = [&](int at) -> int {
    if (tree[at].feature < 0) return 0;
    return 1 + std::max(depth(tree[at].left), depth(tree[at].right));
  };
  return tree.empty() ? 0 : depth(0);
}

}  // namespace surf
