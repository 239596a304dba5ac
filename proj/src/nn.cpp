#include "surf/nn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>

#include "surf/errors.hpp"
#include "surf/kernels.hpp"

namespace surf {
namespace {

constexpr double kProbClamp = 1e-7;

// Batched activation, lane-interleaved: v[(c*T + t)*B + b].
struct Act {
  int C = 0, T = 0, B = 0;
  std::vector<double> v;

  void resize(int c, int t, int b) {
    C = c;
    T = t;
    B = b;
    v.assign(static_cast<std::size_t>(c) * t * b, 0.0);
  }
};

struct TapeEntry {
  Act out;
  std::vector<unsigned char> argmax;  // maxpool winners
  std::vector<double> mask;           // dropout multipliers (train mode)
  // lstm caches, all indexed per time step
  std::vector<double> xh;       // T x (K x B), K = in + hidden
  std::vector<double> xh_lane;  // T x (B x K), lane-major for dW accumulation
  std::vector<double> gates;    // T x (4H x B), post-activation
  std::vector<double> cs;       // (T+1) x (H x B)
  std::vector<double> tanhc;    // T x (H x B)
};

void forward_conv(const Conv1dLayer& l, const Act& in, TapeEntry& te) {
  if (in.C != l.in_ch)
    throw ShapeError("conv1d expects " + std::to_string(l.in_ch) +
                     " input channels, got " + std::to_string(in.C));
  te.out.resize(l.out_ch, in.T, in.B);
  kernels::conv1d_forward(in.v.data(), l.w.data(), l.b.data(), te.out.v.data(),
                          l.in_ch, l.out_ch, in.T, l.kernel, in.B);
}

void forward_dense(const DenseLayer& l, const Act& in, TapeEntry& te) {
  if (in.T != 1 || in.C != l.in)
    throw ShapeError("dense expects a flat (" + std::to_string(l.in) +
                     ") input, got (" + std::to_string(in.C) + "," +
                     std::to_string(in.T) + ")");
  te.out.resize(l.out, 1, in.B);
  kernels::gemm_nb(l.w.data(), in.v.data(), l.b.data(), te.out.v.data(), l.out,
                   l.in, in.B);
}

void forward_lstm(const LstmLayer& l, const Act& in, TapeEntry& te) {
  if (in.C != l.in)
    throw ShapeError("lstm expects " + std::to_string(l.in) +
                     " input channels, got " + std::to_string(in.C));
  const int T = in.T, B = in.B, H = l.hidden;
  const int K = l.in + H, G4 = 4 * H;
  const std::size_t hb = static_cast<std::size_t>(H) * B;
  te.xh.assign(static_cast<std::size_t>(T) * K * B, 0.0);
  te.xh_lane.assign(static_cast<std::size_t>(T) * B * K, 0.0);
  te.gates.assign(static_cast<std::size_t>(T) * G4 * B, 0.0);
  te.cs.assign(static_cast<std::size_t>(T + 1) * hb, 0.0);
  te.tanhc.assign(static_cast<std::size_t>(T) * hb, 0.0);
  te.out.resize(H, T, B);

  std::vector<double> h(hb, 0.0);
  for (int t = 0; t < T; ++t) {
    double* xh = te.xh.data() + static_cast<std::size_t>(t) * K * B;
    for (int c = 0; c < l.in; ++c)
      std::memcpy(xh + static_cast<std::size_t>(c) * B,
                  in.v.data() + (static_cast<std::size_t>(c) * T + t) * B,
                  sizeof(double) * B);
    std::memcpy(xh + static_cast<std::size_t>(l.in) * B, h.data(),
                sizeof(double) * hb);

    double* g = te.gates.data() + static_cast<std::size_t>(t) * G4 * B;
    kernels::gemm_nb(l.wu.data(), xh, l.b.data(), g, G4, K, B);
    kernels::vec_sigmoid(g, g, 2 * hb);                    // i and f blocks
    kernels::vec_tanh(g + 2 * hb, g + 2 * hb, hb);         // candidate block
    kernels::vec_sigmoid(g + 3 * hb, g + 3 * hb, hb);      // o block

    const double* cp = te.cs.data() + static_cast<std::size_t>(t) * hb;
    double* cn = te.cs.data() + static_cast<std::size_t>(t + 1) * hb;
    double* tc = te.tanhc.data() + static_cast<std::size_t>(t) * hb;
    for (std::size_t j = 0; j < hb; ++j)
      cn[j] = g[hb + j] * cp[j] + g[j] * g[2 * hb + j];
    kernels::vec_tanh(cn, tc, hb);
    for (std::size_t j = 0; j < hb; ++j) h[j] = g[3 * hb + j] * tc[j];
    for (int hh = 0; hh < H; ++hh)
      std::memcpy(te.out.v.data() + (static_cast<std::size_t>(hh) * T + t) * B,
                  h.data() + static_cast<std::size_t>(hh) * B,
                  sizeof(double) * B);

    double* xl = te.xh_lane.data() + static_cast<std::size_t>(t) * B * K;
    for (int k = 0; k < K; ++k)
      for (int b = 0; b < B; ++b)
        xl[static_cast<std::size_t>(b) * K + k] = xh[static_cast<std::size_t>(k) * B + b];
  }
}

void forward_layer(const Layer& layer, const Act& in, TapeEntry& te,
                   bool train_mode, Rng& mask_rng) {
  std::visit(
      [&](const auto& l) {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, Conv1dLayer>) {
          forward_conv(l, in, te);
        } else if constexpr (std::is_same_v<L, DenseLayer>) {
          forward_dense(l, in, te);
        } else if constexpr (std::is_same_v<L, LstmLayer>) {
          forward_lstm(l, in, te);
        } else if constexpr (std::is_same_v<L, DropoutLayer>) {
          te.out.resize(in.C, in.T, in.B);
          if (train_mode) {
            const double scale = 1.0 / (1.0 - l.rate);
            te.mask.resize(in.v.size());
            for (std::size_t i = 0; i < in.v.size(); ++i) {
              te.mask[i] = mask_rng.uniform01() < l.rate ? 0.0 : scale;
              te.out.v[i] = in.v[i] * te.mask[i];
            }
          } else {
            te.out.v = in.v;
          }
        } else if constexpr (std::is_same_v<L, AvgPoolLayer>) {
          if (in.T < 2) throw ShapeError("avgpool needs time length >= 2");
          te.out.resize(in.C, in.T / 2, in.B);
          kernels::avgpool_forward(in.v.data(), te.out.v.data(), in.C, in.T, in.B);
        } else if constexpr (std::is_same_v<L, MaxPoolLayer>) {
          if (in.T < 2) throw ShapeError("maxpool needs time length >= 2");
          te.out.resize(in.C, in.T / 2, in.B);
          te.argmax.resize(te.out.v.size());
          kernels::maxpool_forward(in.v.data(), te.out.v.data(), te.argmax.data(),
                                   in.C, in.T, in.B);
        } else if constexpr (std::is_same_v<L, ReluLayer>) {
          te.out.resize(in.C, in.T, in.B);
          kernels::relu_forward(in.v.data(), te.out.v.data(), in.v.size());
        } else if constexpr (std::is_same_v<L, TakeLastLayer>) {
          te.out.resize(in.C, 1, in.B);
          for (int c = 0; c < in.C; ++c)
            std::memcpy(te.out.v.data() + static_cast<std::size_t>(c) * in.B,
                        in.v.data() + (static_cast<std::size_t>(c) * in.T + in.T - 1) * in.B,
                        sizeof(double) * in.B);
        } else if constexpr (std::is_same_v<L, FlattenLayer>) {
          te.out.resize(in.C * in.T, 1, in.B);
          te.out.v = in.v;  // identical memory layout, just a shape change
        } else if constexpr (std::is_same_v<L, SigmoidLayer>) {
          te.out.resize(in.C, in.T, in.B);
          kernels::vec_sigmoid(in.v.data(), te.out.v.data(), in.v.size());
        }
      },
      layer);
}

void backward_lstm(const LstmLayer& l, const Act& in, const TapeEntry& te,
                   const Act& dout, Act* din, std::vector<double>& gw,
                   std::vector<double>& gb) {
  const int T = in.T, B = in.B, H = l.hidden;
  const int K = l.in + H, G4 = 4 * H;
  const std::size_t hb = static_cast<std::size_t>(H) * B;

  std::vector<double> wut(static_cast<std::size_t>(K) * G4);
  kernels::transpose(l.wu.data(), wut.data(), G4, K);
  std::vector<double> dh(hb, 0.0), dc(hb, 0.0);
  std::vector<double> dG(static_cast<std::size_t>(G4) * B), dxh(static_cast<std::size_t>(K) * B);

  for (int t = T - 1; t >= 0; --t) {
    const double* g = te.gates.data() + static_cast<std::size_t>(t) * G4 * B;
    const double* cp = te.cs.data() + static_cast<std::size_t>(t) * hb;
    const double* tc = te.tanhc.data() + static_cast<std::size_t>(t) * hb;
    for (int hh = 0; hh < H; ++hh)
      for (int b = 0; b < B; ++b)
        dh[static_cast<std::size_t>(hh) * B + b] +=
            dout.v[(static_cast<std::size_t>(hh) * T + t) * B + b];

    for (std::size_t j = 0; j < hb; ++j) {
      const double i_ = g[j], f_ = g[hb + j], g_ = g[2 * hb + j], o_ = g[3 * hb + j];
      const double th = tc[j];
      const double dho = dh[j];
      const double dcj = dc[j] + dho * o_ * (1.0 - th * th);
      dG[j] = dcj * g_ * i_ * (1.0 - i_);
      dG[hb + j] = dcj * cp[j] * f_ * (1.0 - f_);
      dG[2 * hb + j] = dcj * i_ * (1.0 - g_ * g_);
      dG[3 * hb + j] = dho * th * o_ * (1.0 - o_);
      dc[j] = dcj * f_;
    }
    for (int r = 0; r < G4; ++r) {
      double s = 0.0;
      for (int b = 0; b < B; ++b) s += dG[static_cast<std::size_t>(r) * B + b];
      gb[r] += s;
    }
    kernels::accum_outer_bl(dG.data(),
                            te.xh_lane.data() + static_cast<std::size_t>(t) * B * K,
                            gw.data(), G4, K, B);
    kernels::gemm_nb(wut.data(), dG.data(), nullptr, dxh.data(), K, G4, B);
    std::memcpy(dh.data(), dxh.data() + static_cast<std::size_t>(l.in) * B,
                sizeof(double) * hb);
    if (din)
      for (int c = 0; c < l.in; ++c)
        std::memcpy(din->v.data() + (static_cast<std::size_t>(c) * T + t) * B,
                    dxh.data() + static_cast<std::size_t>(c) * B, sizeof(double) * B);
  }
}

void backward_layer(const Layer& layer, const Act& in, const TapeEntry& te,
                    const Act& dout, Act* din, std::vector<double>& gw,
                    std::vector<double>& gb) {
  std::visit(
      [&](const auto& l) {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, Conv1dLayer>) {
          kernels::conv1d_backward_params(dout.v.data(), in.v.data(), gw.data(),
                                          gb.data(), l.in_ch, l.out_ch, in.T,
                                          l.kernel, in.B);
          if (din)
            kernels::conv1d_backward_data(dout.v.data(), l.w.data(), din->v.data(),
                                          l.in_ch, l.out_ch, in.T, l.kernel, in.B);
        } else if constexpr (std::is_same_v<L, DenseLayer>) {
          std::vector<double> x_lane(static_cast<std::size_t>(in.B) * l.in);
          kernels::transpose(in.v.data(), x_lane.data(), l.in, in.B);
          kernels::accum_outer_bl(dout.v.data(), x_lane.data(), gw.data(), l.out,
                                  l.in, in.B);
          for (int r = 0; r < l.out; ++r)
            for (int b = 0; b < in.B; ++b)
              gb[r] += dout.v[static_cast<std::size_t>(r) * in.B + b];
          if (din) {
            std::vector<double> wt(static_cast<std::size_t>(l.in) * l.out);
            kernels::transpose(l.w.data(), wt.data(), l.out, l.in);
            kernels::gemm_nb(wt.data(), dout.v.data(), nullptr, din->v.data(),
                             l.in, l.out, in.B);
          }
        } else if constexpr (std::is_same_v<L, LstmLayer>) {
          backward_lstm(l, in, te, dout, din, gw, gb);
        } else if constexpr (std::is_same_v<L, DropoutLayer>) {
          if (din) {
            if (te.mask.empty()) {
              din->v = dout.v;
            } else {
              for (std::size_t i = 0; i < dout.v.size(); ++i)
                din->v[i] = dout.v[i] * te.mask[i];
            }
          }
        } else if constexpr (std::is_same_v<L, AvgPoolLayer>) {
          if (din) kernels::avgpool_backward(dout.v.data(), din->v.data(), in.C, in.T, in.B);
        } else if constexpr (std::is_same_v<L, MaxPoolLayer>) {
          if (din)
            kernels::maxpool_backward(dout.v.data(), te.argmax.data(),
                                      din->v.data(), in.C, in.T, in.B);
        } else if constexpr (std::is_same_v<L, ReluLayer>) {
          if (din)
            kernels::relu_backward(dout.v.data(), te.out.v.data(), din->v.data(),
                                   dout.v.size());
        } else if constexpr (std::is_same_v<L, TakeLastLayer>) {
          if (din) {
            std::fill(din->v.begin(), din->v.end(), 0.0);
            for (int c = 0; c < in.C; ++c)
              std::memcpy(din->v.data() + (static_cast<std::size_t>(c) * in.T + in.T - 1) * in.B,
                          dout.v.data() + static_cast<std::size_t>(c) * in.B,
                          sizeof(double) * in.B);
          }
        } else if constexpr (std::is_same_v<L, FlattenLayer>) {
          if (din) din->v = dout.v;
        } else if constexpr (std::is_same_v<L, SigmoidLayer>) {
          throw ShapeError("sigmoid head is fused with the loss; no standalone backward");
        }
      },
      layer);
}

Act window_batch_to_act(const std::vector<const LabeledWindow*>& batch) {
  if (batch.empty()) throw ParameterError("empty batch");
  const int rows = batch.front()->rows;
  const int B = static_cast<int>(batch.size());
  Act in;
  in.resize(kChannels, rows, B);
  for (int b = 0; b < B; ++b) {
    const LabeledWindow& w = *batch[b];
    if (w.rows != rows || w.x.size() != static_cast<std::size_t>(rows) * kChannels)
      throw ShapeError("batch windows must share one shape");
    for (int t = 0; t < rows; ++t)
      for (int c = 0; c < kChannels; ++c)
        in.v[(static_cast<std::size_t>(c) * rows + t) * B + b] =
            w.x[static_cast<std::size_t>(t) * kChannels + c];
  }
  return in;
}

void run_forward(const NnModel& model, const Act& input, bool train_mode,
                 std::uint64_t mask_seed, std::vector<TapeEntry>& tape,
                 std::vector<double>& probs) {
  if (model.layers.empty() ||
      !std::holds_alternative<SigmoidLayer>(model.layers.back()))
    throw ShapeError("model must end with a sigmoid head");
  Rng mask_rng(mask_seed);
  tape.resize(model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const Act& in = i == 0 ? input : tape[i - 1].out;
    forward_layer(model.layers[i], in, tape[i], train_mode, mask_rng);
  }
  const Act& head = tape.back().out;
  if (head.C != 1 || head.T != 1)
    throw ShapeError("model head must produce a scalar per example");
  probs.assign(head.v.begin(), head.v.end());
}

}  // namespace

Arch parse_arch(const std::string& tag) {
  std::string t;
  for (char c : tag) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "cnn") return Arch::Cnn;
  if (t == "lstm") return Arch::Lstm;
  if (t == "lstm-cnn" || t == "lstmcnn") return Arch::LstmCnn;
  throw ParameterError("unknown architecture tag: " + tag);
}

std::string arch_name(Arch arch) {
  switch (arch) {
    case Arch::Cnn: return "cnn";
    case Arch::Lstm: return "lstm";
    case Arch::LstmCnn: return "lstm-cnn";
  }
  throw ParameterError("invalid architecture value");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ParameterError("epochs must be >= 1");
  if (learning_rate < 0.0) throw ParameterError("learning rate must be >= 0");
  if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0)
    throw ParameterError("Adam betas must lie in (0,1)");
  if (epsilon <= 0.0) throw ParameterError("Adam epsilon must be positive");
  if (batch_size < 1) throw ParameterError("batch size must be >= 1");
}

Gradients make_gradients(const NnModel& model) {
  Gradients g;
  g.w.resize(model.layers.size());
  g.b.resize(model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Conv1dLayer> ||
                        std::is_same_v<L, DenseLayer>) {
            g.w[i].assign(l.w.size(), 0.0);
            g.b[i].assign(l.b.size(), 0.0);
          } else if constexpr (std::is_same_v<L, LstmLayer>) {
            g.w[i].assign(l.wu.size(), 0.0);
            g.b[i].assign(l.b.size(), 0.0);
          }
        },
        model.layers[i]);
  }
  return g;
}

NnModel build_model(Arch arch, int window_seconds, std::uint64_t seed) {
  if (window_seconds < 1) throw ParameterError("window_seconds must be >= 1");
  NnModel m;
  m.arch = arch;
  m.window_seconds = window_seconds;
  m.seed = seed;
  Rng rng(seed);

  auto glorot = [&rng](std::vector<double>& w, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& x : w) x = rng.uniform(-limit, limit);
  };
  auto conv = [&](int in, int out, int k) {
    Conv1dLayer l{in, out, k, std::vector<double>(static_cast<std::size_t>(out) * in * k),
                  std::vector<double>(out, 0.0)};
    glorot(l.w, in * k, out * k);
    return l;
  };
  auto dense = [&](int in, int out) {
    DenseLayer l{in, out, std::vector<double>(static_cast<std::size_t>(out) * in),
                 std::vector<double>(out, 0.0)};
    glorot(l.w, in, out);
    return l;
  };
  auto lstm = [&](int in, int hidden) {
    LstmLayer l{in, hidden,
                std::vector<double>(static_cast<std::size_t>(4) * hidden * (in + hidden)),
                std::vector<double>(static_cast<std::size_t>(4) * hidden, 0.0)};
    glorot(l.wu, in + hidden, hidden);  // per-gate fan: (in+H) -> H
    // Forget-gate bias starts at 1 so early cell state survives long windows;
    // with it at 0 the pinned recipe (fixed lr, no clipping) is unstable.
    std::fill(l.b.begin() + hidden, l.b.begin() + 2 * hidden, 1.0);
    return l;
  };

  const int t0 = 20 * window_seconds;
  switch (arch) {
    case Arch::Cnn: {
      const int t3 = t0 / 2 / 2 / 2;
      m.layers = {conv(6, 8, 3),  DropoutLayer{}, AvgPoolLayer{}, ReluLayer{},
                  conv(8, 8, 3),  DropoutLayer{}, AvgPoolLayer{}, ReluLayer{},
                  conv(8, 8, 3),  DropoutLayer{}, MaxPoolLayer{}, ReluLayer{},
                  FlattenLayer{}, dense(8 * t3, 20), ReluLayer{}, dense(20, 1),
                  SigmoidLayer{}};
      break;
    }
    case Arch::Lstm: {
      m.layers = {lstm(6, 100), TakeLastLayer{}, dense(100, 1), SigmoidLayer{}};
      break;
    }
    case Arch::LstmCnn: {
      const int t2 = t0 / 2 / 2;
      m.layers = {lstm(6, 100),   conv(100, 8, 3), DropoutLayer{}, AvgPoolLayer{},
                  ReluLayer{},    conv(8, 8, 3),   DropoutLayer{}, AvgPoolLayer{},
                  ReluLayer{},    FlattenLayer{},  dense(8 * t2, 1),
                  SigmoidLayer{}};
      break;
    }
  }
  return m;
}

Tensor conv1d_forward(const Tensor& x, const Conv1dLayer& layer) {
  Act in{x.channels, x.time, 1, x.v};
  TapeEntry te;
  forward_conv(layer, in, te);
  return {te.out.C, te.out.T, std::move(te.out.v)};
}

std::pair<Tensor, std::vector<double>> lstm_forward(const Tensor& x,
                                                    const LstmLayer& layer) {
  Act in{x.channels, x.time, 1, x.v};
  TapeEntry te;
  forward_lstm(layer, in, te);
  Tensor seq{te.out.C, te.out.T, std::move(te.out.v)};
  std::vector<double> h_final(layer.hidden);
  for (int hh = 0; hh < layer.hidden; ++hh) h_final[hh] = seq.at(hh, seq.time - 1);
  return {std::move(seq), std::move(h_final)};
}

Tensor dense_forward(const Tensor& x, const DenseLayer& layer) {
  Act in{x.channels, x.time, 1, x.v};
  TapeEntry te;
  forward_dense(layer, in, te);
  return {te.out.C, 1, std::move(te.out.v)};
}

namespace {
Tensor simple_layer(const Tensor& x, const Layer& layer, bool train, Rng* rng) {
  Act in{x.channels, x.time, 1, x.v};
  TapeEntry te;
  Rng fallback(0);
  forward_layer(layer, in, te, train, rng ? *rng : fallback);
  return {te.out.C, te.out.T, std::move(te.out.v)};
}
}  // namespace

Tensor relu(const Tensor& x) { return simple_layer(x, ReluLayer{}, false, nullptr); }
Tensor sigmoid(const Tensor& x) { return simple_layer(x, SigmoidLayer{}, false, nullptr); }
Tensor avgpool(const Tensor& x) { return simple_layer(x, AvgPoolLayer{}, false, nullptr); }
Tensor maxpool(const Tensor& x) { return simple_layer(x, MaxPoolLayer{}, false, nullptr); }
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool train) {
  if (rate < 0.0 || rate >= 1.0) throw ParameterError("dropout rate must be in [0,1)");
  return simple_layer(x, DropoutLayer{rate}, train, &rng);
}

double bce_loss(double p, int y) {
  if (y != 0 && y != 1) throw ParameterError("label must be 0 or 1");
  const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return -(y * std::log(pc) + (1 - y) * std::log(1.0 - pc));
}

void adam_step(double* params, const double* grads, AdamState& state,
               std::size_t n, const TrainConfig& cfg, long t) {
  if (t < 1) throw ParameterError("Adam step index starts at 1");
  if (state.m.size() != n) state.m.assign(n, 0.0);
  if (state.v.size() != n) state.v.assign(n, 0.0);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

double nn_loss_and_gradients(const NnModel& model,
                             const std::vector<const LabeledWindow*>& batch,
                             bool train_mode, std::uint64_t mask_seed,
                             Gradients* out) {
  const Act input = window_batch_to_act(batch);
  std::vector<TapeEntry> tape;
  std::vector<double> probs;
  run_forward(model, input, train_mode, mask_seed, tape, probs);

  const int B = static_cast<int>(batch.size());
  double loss = 0.0;
  for (int b = 0; b < B; ++b) loss += bce_loss(probs[b], batch[b]->y);
  loss /= B;

  if (out) {
    *out = make_gradients(model);
    const std::size_t L = model.layers.size();
    // Sigmoid + BCE fused: d(loss)/d(logit_b) = (p_b - y_b) / B.
    Act dcur;
    dcur.resize(1, 1, B);
    for (int b = 0; b < B; ++b) dcur.v[b] = (probs[b] - batch[b]->y) / B;

    for (std::size_t i = L - 1; i-- > 0;) {
      const std::size_t li = i;  // backprop through layer li
      const Act& in = li == 0 ? input : tape[li - 1].out;
      Act dprev;
      if (li > 0) dprev.resize(in.C, in.T, in.B);
      backward_layer(model.layers[li], in, tape[li], dcur,
                     li > 0 ? &dprev : nullptr, out->w[li], out->b[li]);
      dcur = std::move(dprev);
    }
  }
  return loss;
}

TrainLog train_model(NnModel& model, const Dataset& train, const TrainConfig& cfg) {
  cfg.validate();
  if (train.examples.empty()) throw ParameterError("training dataset is empty");
  const int rows = 20 * model.window_seconds;
  for (const LabeledWindow& w : train.examples)
    if (w.rows != rows)
      throw ShapeError("dataset window length " + std::to_string(w.rows) +
                       " does not match model window " + std::to_string(rows));

  std::vector<AdamState> st_w(model.layers.size()), st_b(model.layers.size());
  std::vector<std::size_t> order(train.examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(mix_seed(cfg.seed, 0x73687566ull));  // "shuf"

  TrainLog log;
  Gradients grads;
  long step = 0;
  std::uint64_t batch_counter = 0;
  const std::uint64_t mask_master = mix_seed(cfg.seed, 0x6d61736bull);  // "mask"

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::vector<const LabeledWindow*> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i)
        batch.push_back(&train.examples[order[i]]);

      const double loss = nn_loss_and_gradients(
          model, batch, true, mix_seed(mask_master, batch_counter++), &grads);
      loss_sum += loss * static_cast<double>(batch.size());
      ++step;
      for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (grads.w[i].empty()) continue;
        std::visit(
            [&](auto& l) {
              using L = std::decay_t<decltype(l)>;
              if constexpr (std::is_same_v<L, Conv1dLayer> || std::is_same_v<L, DenseLayer>) {
                adam_step(l.w.data(), grads.w[i].data(), st_w[i], l.w.size(), cfg, step);
                adam_step(l.b.data(), grads.b[i].data(), st_b[i], l.b.size(), cfg, step);
              } else if constexpr (std::is_same_v<L, LstmLayer>) {
                adam_step(l.wu.data(), grads.w[i].data(), st_w[i], l.wu.size(), cfg, step);
                adam_step(l.b.data(), grads.b[i].data(), st_b[i], l.b.size(), cfg, step);
              }
            },
            model.layers[i]);
      }
    }
    log.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
  }
  return log;
}

double nn_forward_prob(const NnModel& model, const double* window_time_major,
                       int rows) {
  Act in;
  in.resize(kChannels, rows, 1);
  for (int t = 0; t < rows; ++t)
    for (int c = 0; c < kChannels; ++c)
      in.v[static_cast<std::size_t>(c) * rows + t] =
          window_time_major[static_cast<std::size_t>(t) * kChannels + c];
  std::vector<TapeEntry> tape;
  std::vector<double> probs;
  run_forward(model, in, false, 0, tape, probs);
  return probs[0];
}

Prediction nn_predict(const NnModel& model, const LabeledWindow& w) {
  return make_prediction(nn_forward_prob(model, w.x.data(), w.rows));
}

}  // namespace surf
