#include "surf/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "surf/errors.hpp"

namespace surf {
namespace {

void write_array(std::FILE* f, const char* name, const std::vector<double>& v) {
  std::fprintf(f, "%s %zu\n", name, v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    std::fprintf(f, "%.17g%c", v[i], (i % 8 == 7 || i + 1 == v.size()) ? '\n' : ' ');
}

void write_nn(std::FILE* f, const NnModel& m) {
  std::fprintf(f, "layers %zu\n", m.layers.size());
  for (const Layer& layer : m.layers) {
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Conv1dLayer>) {
            std::fprintf(f, "layer conv1d in %d out %d kernel %d\n", l.in_ch,
                         l.out_ch, l.kernel);
            write_array(f, "w", l.w);
            write_array(f, "b", l.b);
          } else if constexpr (std::is_same_v<L, DenseLayer>) {
            std::fprintf(f, "layer dense in %d out %d\n", l.in, l.out);
            write_array(f, "w", l.w);
            write_array(f, "b", l.b);
          } else if constexpr (std::is_same_v<L, LstmLayer>) {
            std::fprintf(f, "layer lstm in %d hidden %d\n", l.in, l.hidden);
            write_array(f, "wu", l.wu);
            write_array(f, "b", l.b);
          } else if constexpr (std::is_same_v<L, DropoutLayer>) {
            std::fprintf(f, "layer dropout rate %.17g\n", l.rate);
          } else if constexpr (std::is_same_v<L, AvgPoolLayer>) {
            std::fprintf(f, "layer avgpool\n");
          } else if constexpr (std::is_same_v<L, MaxPoolLayer>) {
            std::fprintf(f, "layer maxpool\n");
          } else if constexpr (std::is_same_v<L, ReluLayer>) {
            std::fprintf(f, "layer relu\n");
          } else if constexpr (std::is_same_v<L, TakeLastLayer>) {
            std::fprintf(f, "layer take-last\n");
          } else if constexpr (std::is_same_v<L, FlattenLayer>) {
            std::fprintf(f, "layer flatten\n");
          } else if constexpr (std::is_same_v<L, SigmoidLayer>) {
            std::fprintf(f, "layer sigmoid\n");
          }
        },
        layer);
  }
}

void write_svm(std::FILE* f, const SvmModel& m) {
  std::fprintf(f, "lambda %.17g\n", m.lambda);
  std::fprintf(f, "dim %zu\n", m.w.size());
  write_array(f, "mean", m.scaler.mean);
  write_array(f, "std", m.scaler.std);
  write_array(f, "w", m.w);
  std::fprintf(f, "b 1\n%.17g\n", m.b);
}

void write_forest(std::FILE* f, const ForestModel& m) {
  std::fprintf(f, "max_depth %d\n", m.max_depth);
  std::fprintf(f, "dim %d\n", m.dim);
  std::fprintf(f, "trees %zu\n", m.trees.size());
  for (const std::vector<TreeNode>& tree : m.trees) {
    std::fprintf(f, "tree %zu\n", tree.size());
    for (const TreeNode& n : tree)
      std::fprintf(f, "node %d %.17g %d %d %d %d\n", n.feature, n.threshold,
                   n.left, n.right, n.count0, n.count1);
  }
}

// ---- reading ------------------------------------------------------------

struct TokenReader {
  std::ifstream in;
  std::string path;

  explicit TokenReader(const std::string& p) : in(p), path(p) {
    if (!in) throw FormatError("cannot open " + p);
  }

  [[noreturn]] void fail(const std::string& what) {
    throw FormatError(path + ": " + what);
  }

  std::string word() {
    std::string w;
    if (!(in >> w)) fail("unexpected end of file");
    return w;
  }

  void expect(const std::string& key) {
    const std::string w = word();
    if (w != key) fail("expected '" + key + "', found '" + w + "'");
  }

  long integer(const std::string& key) {
    expect(key);
    long v = 0;
    if (!(in >> v)) fail("bad integer after '" + key + "'");
    return v;
  }

  double real(const std::string& key) {
    expect(key);
    double v = 0.0;
    if (!(in >> v)) fail("bad number after '" + key + "'");
    return v;
  }

  std::vector<double> array(const std::string& key, std::size_t expected) {
    expect(key);
    std::size_t n = 0;
    if (!(in >> n)) fail("bad array length after '" + key + "'");
    if (n != expected)
      fail("array '" + key + "' has " + std::to_string(n) + " values, expected " +
           std::to_string(expected));
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
      if (!(in >> v[i])) fail("truncated array '" + key + "'");
    return v;
  }
};

NnModel read_nn(TokenReader& r, Arch arch, int window_seconds, std::uint64_t seed) {
  NnModel m;
  m.arch = arch;
  m.window_seconds = window_seconds;
  m.seed = seed;
  const long layers = r.integer("layers");
  if (layers < 1) r.fail("model needs at least one layer");
  for (long i = 0; i < layers; ++i) {
    r.expect("layer");
    const std::string kind = r.word();
    if (kind == "conv1d") {
      Conv1dLayer l;
      l.in_ch = static_cast<int>(r.integer("in"));
      l.out_ch = static_cast<int>(r.integer("out"));
      l.kernel = static_cast<int>(r.integer("kernel"));
      if (l.in_ch < 1 || l.out_ch < 1 || l.kernel < 1 || l.kernel % 2 == 0)
        r.fail("invalid conv1d shape");
      l.w = r.array("w", static_cast<std::size_t>(l.out_ch) * l.in_ch * l.kernel);
      l.b = r.array("b", static_cast<std::size_t>(l.out_ch));
      m.layers.emplace_back(std::move(l));
    } else if (kind == "dense") {
      DenseLayer l;
      l.in = static_cast<int>(r.integer("in"));
      l.out = static_cast<int>(r.integer("out"));
      if (l.in < 1 || l.out < 1) r.fail("invalid dense shape");
      l.w = r.array("w", static_cast<std::size_t>(l.out) * l.in);
      l.b = r.array("b", static_cast<std::size_t>(l.out));
      m.layers.emplace_back(std::move(l));
    } else if (kind == "lstm") {
      LstmLayer l;
      l.in = static_cast<int>(r.integer("in"));
      l.hidden = static_cast<int>(r.integer("hidden"));
      if (l.in < 1 || l.hidden < 1) r.fail("invalid lstm shape");
      l.wu = r.array("wu", static_cast<std::size_t>(4) * l.hidden * (l.in + l.hidden));
      l.b = r.array("b", static_cast<std::size_t>(4) * l.hidden);
      m.layers.emplace_back(std::move(l));
    } else if (kind == "dropout") {
      const double rate = r.real("rate");
      if (rate < 0.0 || rate >= 1.0) r.fail("dropout rate out of range");
      m.layers.emplace_back(DropoutLayer{rate});
    } else if (kind == "avgpool") {
      m.layers.emplace_back(AvgPoolLayer{});
    } else if (kind == "maxpool") {
      m.layers.emplace_back(MaxPoolLayer{});
    } else if (kind == "relu") {
      m.layers.emplace_back(ReluLayer{});
    } else if (kind == "take-last") {
      m.layers.emplace_back(TakeLastLayer{});
    } else if (kind == "flatten") {
      m.layers.emplace_back(FlattenLayer{});
    } else if (kind == "sigmoid") {
      m.layers.emplace_back(SigmoidLayer{});
    } else {
      r.fail("unknown layer kind '" + kind + "'");
    }
  }
  // Shape-check the whole chain with a dry forward pass on zeros.
  const int rows = 20 * window_seconds;
  std::vector<double> probe(static_cast<std::size_t>(rows) * kChannels, 0.0);
  try {
    nn_forward_prob(m, probe.data(), rows);
  } catch (const ShapeError& e) {
    r.fail(std::string("layer chain is not shape-compatible: ") + e.what());
  }
  return m;
}

SvmModel read_svm(TokenReader& r, int window_seconds, std::uint64_t seed) {
  SvmModel m;
  m.window_seconds = window_seconds;
  m.seed = seed;
  m.lambda = r.real("lambda");
  const long dim = r.integer("dim");
  if (dim < 1) r.fail("invalid svm dim");
  m.scaler.mean = r.array("mean", static_cast<std::size_t>(dim));
  m.scaler.std = r.array("std", static_cast<std::size_t>(dim));
  m.w = r.array("w", static_cast<std::size_t>(dim));
  m.b = r.array("b", 1)[0];
  return m;
}

ForestModel read_forest(TokenReader& r, int window_seconds, std::uint64_t seed) {
  ForestModel m;
  m.window_seconds = window_seconds;
  m.seed = seed;
  m.max_depth = static_cast<int>(r.integer("max_depth"));
  m.dim = static_cast<int>(r.integer("dim"));
  if (m.max_depth < 1 || m.dim < 1) r.fail("invalid forest header");
  const long trees = r.integer("trees");
  if (trees < 1) r.fail("forest needs at least one tree");
  m.trees.resize(trees);
  for (long ti = 0; ti < trees; ++ti) {
    const long nodes = r.integer("tree");
    if (nodes < 1) r.fail("empty tree");
    std::vector<TreeNode>& tree = m.trees[ti];
    tree.resize(nodes);
    for (long ni = 0; ni < nodes; ++ni) {
      r.expect("node");
      TreeNode& n = tree[ni];
      if (!(r.in >> n.feature >> n.threshold >> n.left >> n.right >> n.count0 >> n.count1))
        r.fail("truncated tree node");
      if (n.feature >= m.dim) r.fail("node feature out of range");
      if (n.feature >= 0 &&
          (n.left < 0 || n.left >= nodes || n.right < 0 || n.right >= nodes))
        r.fail("node child index out of range");
      if (n.count0 < 0 || n.count1 < 0 || n.count0 + n.count1 == 0)
        r.fail("node class counts must be non-empty");
    }
  }
  return m;
}

}  // namespace

std::string model_arch_name(const ModelAny& m) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NnModel>) return arch_name(v.arch);
        if constexpr (std::is_same_v<T, SvmModel>) return "svm";
        if constexpr (std::is_same_v<T, ForestModel>) return "forest";
      },
      m);
}

int model_window_seconds(const ModelAny& m) {
  return std::visit([](const auto& v) { return v.window_seconds; }, m);
}

Prediction predict_any(const ModelAny& m, const LabeledWindow& w) {
  return std::visit(
      [&](const auto& v) -> Prediction {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NnModel>) return nn_predict(v, w);
        if constexpr (std::is_same_v<T, SvmModel>) return predict_svm(v, w.x);
        if constexpr (std::is_same_v<T, ForestModel>) return predict_forest(v, w.x);
      },
      m);
}

void save_model(const ModelAny& m, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("cannot open " + path + " for writing");
  std::fprintf(f, "SURFMODEL v1\n");
  std::fprintf(f, "arch %s\n", model_arch_name(m).c_str());
  std::fprintf(f, "window_seconds %d\n", model_window_seconds(m));
  std::visit([&](const auto& v) { std::fprintf(f, "seed %llu\n",
                                               static_cast<unsigned long long>(v.seed)); },
             m);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NnModel>) write_nn(f, v);
        if constexpr (std::is_same_v<T, SvmModel>) write_svm(f, v);
        if constexpr (std::is_same_v<T, ForestModel>) write_forest(f, v);
      },
      m);
  std::fclose(f);
}

ModelAny load_model(const std::string& path) {
  TokenReader r(path);
  std::string line;
  if (!std::getline(r.in, line)) r.fail("empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "SURFMODEL v1") r.fail("bad magic/version line '" + line + "'");

  r.expect("arch");
  const std::string tag = r.word();
  const int window_seconds = static_cast<int>(r.integer("window_seconds"));
  if (window_seconds < 1) r.fail("invalid window_seconds");
  r.expect("seed");
  unsigned long long seed = 0;
  if (!(r.in >> seed)) r.fail("bad seed");

  if (tag == "svm") return read_svm(r, window_seconds, seed);
  if (tag == "forest") return read_forest(r, window_seconds, seed);
  Arch arch = Arch::Cnn;
  try {
    arch = parse_arch(tag);
  } catch (const ParameterError&) {
    r.fail("unknown arch '" + tag + "'");
  }
  return read_nn(r, arch, window_seconds, seed);
}

NnModel load_nn_model(const std::string& path, Arch expected) {
  ModelAny m = load_model(path);
  const NnModel* nn = std::get_if<NnModel>(&m);
  if (!nn || nn->arch != expected)
    throw FormatError(path + ": expected a " + arch_name(expected) +
                      " model, found " + model_arch_name(m));
  return std::move(*std::get_if<NnModel>(&m));
}

}  // namespace surf
