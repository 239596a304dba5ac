#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "surf/dataset.hpp"
#include "surf/prediction.hpp"
#include "surf/rng.hpp"

namespace surf {

// Dense row-major (channels, time) buffer; a plain vector (features,) is the
// degenerate case time == 1.
struct Tensor {
  int channels = 0;
  int time = 1;
  std::vector<double> v;

  static Tensor zeros(int c, int t = 1) {
    return {c, t, std::vector<double>(static_cast<std::size_t>(c) * t, 0.0)};
  }
  double& at(int c, int t) { return v[static_cast<std::size_t>(c) * time + t]; }
  double at(int c, int t) const { return v[static_cast<std::size_t>(c) * time + t]; }
};

enum class Arch { Cnn, Lstm, LstmCnn };

// Accepts "cnn", "lstm", "lstm-cnn" (case-insensitive). Throws ParameterError.
Arch parse_arch(const std::string& tag);
std::string arch_name(Arch arch);

// ---- layers -----------------------------------------------------------
// Weight layouts are row-major and documented next to each struct; the model
// file writes them flat in this exact order.

struct Conv1dLayer {  // w[(out*in + ci)*kernel + k], zero "same" padding
  int in_ch = 0, out_ch = 0, kernel = 3;
  std::vector<double> w, b;
};
struct DenseLayer {  // w[out*in + i]
  int in = 0, out = 0;
  std::vector<double> w, b;
};
struct LstmLayer {  // fused wu[4*hidden x (in+hidden)] over [x;h], gates i,f,g,o
  int in = 0, hidden = 0;
  std::vector<double> wu, b;
};
struct DropoutLayer { double rate = 0.2; };
struct AvgPoolLayer {};   // kernel 2, stride 2
struct MaxPoolLayer {};   // kernel 2, stride 2
struct ReluLayer {};
struct TakeLastLayer {};  // (H, T) -> (H, 1), the h_T column
struct FlattenLayer {};   // (C, T) -> (C*T, 1), channel-major
struct SigmoidLayer {};   // scalar head

using Layer = std::variant<Conv1dLayer, DenseLayer, LstmLayer, DropoutLayer,
                           AvgPoolLayer, MaxPoolLayer, ReluLayer,
                           TakeLastLayer, FlattenLayer, SigmoidLayer>;

struct NnModel {
  Arch arch = Arch::Cnn;
  int window_seconds = 3;
  std::uint64_t seed = 0;  // initialization seed
  std::vector<Layer> layers;
};

struct TrainConfig {
  int epochs = 30;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 6;
  std::uint64_t seed = 0;

  void validate() const;  // throws ParameterError
};

struct TrainLog {
  std::vector<double> epoch_loss;  // mean per-example BCE, one entry per epoch
};

// Per-layer parameter gradients, parallel to NnModel::layers (empty vectors
// for parameterless layers).
struct Gradients {
  std::vector<std::vector<double>> w, b;
};
Gradients make_gradients(const NnModel& model);

// The three § architectures. Glorot-uniform weights from `seed`, zero biases.
NnModel build_model(Arch arch, int window_seconds, std::uint64_t seed);

// ---- single-example ops (the plain, test-facing surface) ---------------
Tensor conv1d_forward(const Tensor& x, const Conv1dLayer& layer);
// Returns the full hidden sequence (hidden, T) and the final hidden state.
std::pair<Tensor, std::vector<double>> lstm_forward(const Tensor& x,
                                                    const LstmLayer& layer);
Tensor dense_forward(const Tensor& x, const DenseLayer& layer);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor avgpool(const Tensor& x);  // halves time (floor); time >= 2 required
Tensor maxpool(const Tensor& x);
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool train);

// BCE with probability clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p, int y);

struct AdamState {
  std::vector<double> m, v;
};
// t is the 1-based global step index.
void adam_step(double* params, const double* grads, AdamState& state,
               std::size_t n, const TrainConfig& cfg, long t);

// Mean batch loss + exact gradients. Dropout masks are drawn from a fresh
// Rng(mask_seed) in layer order when train_mode, so a repeated call with the
// same seed replays the identical masks (this is what makes the
// finite-difference checks of the dropout path meaningful). Pass out=nullptr
// to get the loss only.
double nn_loss_and_gradients(const NnModel& model,
                             const std::vector<const LabeledWindow*>& batch,
                             bool train_mode, std::uint64_t mask_seed,
                             Gradients* out);

// Shuffled mini-batches, ADAM per batch, deterministic given cfg.seed.
TrainLog train_model(NnModel& model, const Dataset& train, const TrainConfig& cfg);

// Eval-mode forward (dropout off) on one 20*S x 6 time-major window.
double nn_forward_prob(const NnModel& model, const double* window_time_major,
                       int rows);
Prediction nn_predict(const NnModel& model, const LabeledWindow& w);

}  // namespace surf
