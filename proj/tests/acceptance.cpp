// Acceptance suite: one binding criterion per line, `criterion N: PASS/FAIL`.
// Criteria 1-7 gate the exit code; criterion 8 is a reported robustness probe.
// Every tolerance is pinned here as a named constant.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "surf/classical.hpp"
#include "surf/dataset.hpp"
#include "surf/errors.hpp"
#include "surf/eval.hpp"
#include "surf/model_io.hpp"
#include "surf/nn.hpp"
#include "surf/preprocess.hpp"
#include "surf/rng.hpp"
#include "surf/simride.hpp"
#include "surf/stream.hpp"

using namespace surf;

namespace {

// ---- pinned tolerances and budgets --------------------------------------
constexpr double kStopbandCeiling = 0.032;   // 25 Hz residual amplitude
constexpr double kPassbandFloor = 0.99;      // 5 Hz surviving amplitude
constexpr double kGainOracleRel = 0.05;      // +-5% of the analytic gain
constexpr double kLevelingNorm = 1e-3;       // m/s^2, post-pipeline mean
constexpr double kGradRelTol = 1e-4;         // FD vs analytic, relative
constexpr int kGradTrials = 20;              // per operation family
constexpr double kStarAccuracy = 0.95;       // lstm-cnn S=3 held-out accuracy
constexpr double kStarFpr = 0.10;
constexpr double kEveryModelAccuracy = 0.80;  // strict lower bound, all 15
constexpr double kStreamTol = 1e-6;          // |p_stream - p_batch|
constexpr double kSegmentAccuracy = 0.90;    // mixed-ride decision accuracy
constexpr double kWindDegradation = 0.10;    // criterion 8 allowance
constexpr double kBudgetFilterS = 1.0;       // runtime budgets, seconds
constexpr double kBudgetLevelS = 1.0;
constexpr double kBudgetGradS = 30.0;
constexpr double kBudgetTrainS = 600.0;
constexpr double kBudgetStreamS = 30.0;

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

bool g_gate_ok = true;  // criteria 1-7 only

void report(int n, bool ok, const std::string& detail, bool gating = true) {
  std::printf("criterion %d: %s — %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (gating && !ok) g_gate_ok = false;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- criterion 1: filter frequency response ------------------------------

// Independent digital oracle for an order-4 Butterworth designed by bilinear
// transform with pre-warping: |H(f)| = 1/sqrt(1 + (tan(pi f/fs)/tan(pi fc/fs))^8).
double digital_butterworth_gain(double f, double fc, double fs) {
  const double r = std::tan(M_PI * f / fs) / std::tan(M_PI * fc / fs);
  return 1.0 / std::sqrt(1.0 + std::pow(r, 8.0));
}

// Steady-state amplitude by quadrature demodulation over the last 5 s (an
// integer number of periods for both test tones). Unlike max |y|, this is
// unbiased even at 25 Hz where only 4 samples hit each period.
double steady_state_amplitude(double freq_hz) {
  const double rate = 100.0;
  const int n = 1000;  // 10 s: transient dead long before the scored half
  ImuSeries x;
  x.rate_hz = rate;
  for (int i = 0; i < n; ++i) {
    ImuSample s;
    s.t = (i + 1) / rate;
    s.accel = {std::sin(2.0 * M_PI * freq_hz * s.t), 0.0, 0.0};
    s.gyro = {0.0, 0.0, 0.0};
    x.samples.push_back(s);
  }
  const ImuSeries y = lowpass_filter(x, FilterSpec{});
  double si = 0.0, co = 0.0;
  for (int i = n / 2; i < n; ++i) {
    const double w = 2.0 * M_PI * freq_hz * y.samples[i].t;
    si += y.samples[i].accel[0] * std::sin(w);
    co += y.samples[i].accel[0] * std::cos(w);
  }
  return 2.0 * std::hypot(si, co) / (n / 2);
}

void criterion1() {
  const double t0 = now_s();
  const double pass_gain = steady_state_amplitude(5.0);
  const double stop_gain = steady_state_amplitude(25.0);
  const double pass_oracle = digital_butterworth_gain(5.0, 10.0, 100.0);
  const double stop_oracle = digital_butterworth_gain(25.0, 10.0, 100.0);
  const double dt = now_s() - t0;
  const bool ok = stop_gain <= kStopbandCeiling && pass_gain >= kPassbandFloor &&
                  std::fabs(pass_gain - pass_oracle) <= kGainOracleRel * pass_oracle &&
                  std::fabs(stop_gain - stop_oracle) <= kGainOracleRel * stop_oracle &&
                  dt < kBudgetFilterS;
  report(1, ok,
         fmt("5 Hz gain %.6f (oracle %.6f), 25 Hz gain %.6f (oracle %.6f), %.2f s",
             pass_gain, pass_oracle, stop_gain, stop_oracle, dt));
}

// ---- criterion 2: leveling fixed point -----------------------------------

void criterion2() {
  const double t0 = now_s();
  const double deg = M_PI / 180.0;
  const double tilts[][2] = {{0, 0}, {10, -5}, {20, 10}, {30, 0}, {0, 30}, {30, 30}};
  double worst = 0.0;
  for (const auto& rp : tilts) {
    SurfaceProfile quiet;  // all amplitudes zero: a perfectly static device
    RideScript script;
    script.seed = 1;
    script.segments.push_back({600.0, quiet, rp[0] * deg, rp[1] * deg, 1.0});
    const Ride ride = generate_ride(script);
    const LeveledSeries lvl = preprocess_pipeline(ride.series);
    Vec3 mean = {0.0, 0.0, 0.0};
    for (const ImuSample& s : lvl.samples)
      for (int k = 0; k < 3; ++k) mean[k] += s.accel[k];
    double norm = 0.0;
    for (int k = 0; k < 3; ++k) {
      mean[k] /= static_cast<double>(lvl.samples.size());
      norm += mean[k] * mean[k];
    }
    worst = std::max(worst, std::sqrt(norm));
  }
  const double dt = now_s() - t0;
  const bool ok = worst <= kLevelingNorm && dt < kBudgetLevelS;
  report(2, ok, fmt("worst ||mean accel|| %.2e m/s^2 over tilts to 30 deg, %.2f s", worst, dt));
}

// ---- criterion 3: gradient oracle ----------------------------------------

LabeledWindow rand_window(Rng& rng, int rows, int y) {
  LabeledWindow w;
  w.rows = rows;
  w.y = y;
  w.x.resize(static_cast<std::size_t>(rows) * kChannels);
  for (double& v : w.x) v = rng.uniform(-1.0, 1.0);
  return w;
}

Conv1dLayer rand_conv(Rng& rng, int in, int out) {
  Conv1dLayer c{in, out, 3, std::vector<double>(static_cast<std::size_t>(out) * in * 3),
                std::vector<double>(out)};
  for (double& v : c.w) v = rng.uniform(-0.5, 0.5);
  for (double& v : c.b) v = rng.uniform(-0.1, 0.1);
  return c;
}

DenseLayer rand_dense(Rng& rng, int in, int out) {
  DenseLayer d{in, out, std::vector<double>(static_cast<std::size_t>(out) * in),
               std::vector<double>(out)};
  for (double& v : d.w) v = rng.uniform(-0.5, 0.5);
  for (double& v : d.b) v = rng.uniform(-0.1, 0.1);
  return d;
}

LstmLayer rand_lstm(Rng& rng, int in, int hidden) {
  LstmLayer l{in, hidden,
              std::vector<double>(static_cast<std::size_t>(4) * hidden * (in + hidden)),
              std::vector<double>(static_cast<std::size_t>(4) * hidden)};
  for (double& v : l.wu) v = rng.uniform(-0.4, 0.4);
  for (double& v : l.b) v = rng.uniform(-0.1, 0.1);
  return l;
}

// Worst relative FD error across every parameter of `model` on a random batch.
double fd_check(NnModel& model, Rng& rng, int rows) {
  std::vector<LabeledWindow> ws = {rand_window(rng, rows, 1), rand_window(rng, rows, 0)};
  std::vector<const LabeledWindow*> batch = {&ws[0], &ws[1]};
  Gradients g = make_gradients(model);
  nn_loss_and_gradients(model, batch, false, 0, &g);
  const double eps = 1e-5;
  double worst = 0.0;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    std::vector<double>* params[2] = {nullptr, nullptr};
    std::vector<double>* grads[2] = {nullptr, nullptr};
    if (auto* c = std::get_if<Conv1dLayer>(&model.layers[li])) {
      params[0] = &c->w;
      params[1] = &c->b;
    } else if (auto* d = std::get_if<DenseLayer>(&model.layers[li])) {
      params[0] = &d->w;
      params[1] = &d->b;
    } else if (auto* m = std::get_if<LstmLayer>(&model.layers[li])) {
      params[0] = &m->wu;
      params[1] = &m->b;
    } else {
      continue;
    }
    grads[0] = &g.w[li];
    grads[1] = &g.b[li];
    for (int side = 0; side < 2; ++side) {
      for (std::size_t j = 0; j < params[side]->size(); ++j) {
        const double keep = (*params[side])[j];
        (*params[side])[j] = keep + eps;
        const double up = nn_loss_and_gradients(model, batch, false, 0, nullptr);
        (*params[side])[j] = keep - eps;
        const double dn = nn_loss_and_gradients(model, batch, false, 0, nullptr);
        (*params[side])[j] = keep;
        const double fd = (up - dn) / (2.0 * eps);
        const double an = (*grads[side])[j];
        worst = std::max(worst,
                         std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)}));
      }
    }
  }
  return worst;
}

void criterion3() {
  const double t0 = now_s();
  Rng rng(2024);
  double worst_conv = 0.0, worst_lstm = 0.0, worst_dense = 0.0, worst_pool = 0.0,
         worst_loss = 0.0;
  for (int trial = 0; trial < kGradTrials; ++trial) {
    const int rows = 6 + static_cast<int>(rng.uniform_int(7));  // 6..12
    {
      NnModel m;  // conv1d
      m.layers.push_back(rand_conv(rng, 6, 4));
      m.layers.push_back(ReluLayer{});
      m.layers.push_back(rand_conv(rng, 4, 2));
      m.layers.push_back(FlattenLayer{});
      m.layers.push_back(rand_dense(rng, 2 * rows, 1));
      m.layers.push_back(SigmoidLayer{});
      worst_conv = std::max(worst_conv, fd_check(m, rng, rows));
    }
    {
      NnModel m;  // lstm
      m.layers.push_back(rand_lstm(rng, 6, 4));
      m.layers.push_back(TakeLastLayer{});
      m.layers.push_back(rand_dense(rng, 4, 1));
      m.layers.push_back(SigmoidLayer{});
      worst_lstm = std::max(worst_lstm, fd_check(m, rng, rows));
    }
    {
      NnModel m;  // dense
      m.layers.push_back(FlattenLayer{});
      m.layers.push_back(rand_dense(rng, rows * kChannels, 5));
      m.layers.push_back(ReluLayer{});
      m.layers.push_back(rand_dense(rng, 5, 1));
      m.layers.push_back(SigmoidLayer{});
      worst_dense = std::max(worst_dense, fd_check(m, rng, rows));
    }
    {
      NnModel m;  // both pooling kinds in one chain, odd rows drop a tail
      m.layers.push_back(rand_conv(rng, 6, 3));
      m.layers.push_back(AvgPoolLayer{});
      m.layers.push_back(ReluLayer{});
      m.layers.push_back(rand_conv(rng, 3, 3));
      m.layers.push_back(MaxPoolLayer{});
      m.layers.push_back(FlattenLayer{});
      m.layers.push_back(rand_dense(rng, 3 * (rows / 2 / 2), 1));
      m.layers.push_back(SigmoidLayer{});
      worst_pool = std::max(worst_pool, fd_check(m, rng, rows));
    }
    {
      NnModel m;  // bias gradient == mean d(BCE o sigmoid)/dz: the fused loss head
      m.layers.push_back(FlattenLayer{});
      m.layers.push_back(rand_dense(rng, rows * kChannels, 1));
      m.layers.push_back(SigmoidLayer{});
      worst_loss = std::max(worst_loss, fd_check(m, rng, rows));
    }
  }
  const double dt = now_s() - t0;
  const double worst =
      std::max({worst_conv, worst_lstm, worst_dense, worst_pool, worst_loss});
  const bool ok = worst <= kGradRelTol && dt < kBudgetGradS;
  report(3, ok,
         fmt("%d trials/op, worst rel err: conv %.1e, lstm %.1e, dense %.1e, pool %.1e, "
             "loss %.1e, %.1f s",
             kGradTrials, worst_conv, worst_lstm, worst_dense, worst_pool, worst_loss, dt));
}

// ---- criterion 4: end-to-end learning ------------------------------------

// 12 drives, 100 minutes: two 600 s held-out drives (one per class) plus ten
// 480 s training drives. Distinct seeds and mounting attitudes per drive; the
// training drives sweep the wind multiplier 1.0..2.0 so the learned boundary
// keys on the impact signature rather than a broadband-energy threshold that
// stronger wind would cross. Held-out drives stay calm.
std::vector<Drive> build_corpus() {
  const double deg = M_PI / 180.0;
  std::vector<Drive> drives;
  for (int i = 0; i < 12; ++i) {
    const bool sidewalk = i >= 6;
    const bool heldout = i == 0 || i == 6;
    RideScript script;
    script.seed = 101 + static_cast<std::uint64_t>(i);
    RideSegment seg;
    seg.duration_s = heldout ? 600.0 : 480.0;
    seg.profile = sidewalk ? sidewalk_profile() : road_profile();
    seg.roll = (2.0 + 0.7 * i) * deg;
    seg.pitch = (-1.5 + 0.5 * i) * deg;
    seg.wind = heldout ? 1.0 : 1.0 + 0.25 * (sidewalk ? i - 7 : i - 1);
    script.segments.push_back(seg);
    const Ride ride = generate_ride(script);
    Drive d;
    d.id = "d" + std::to_string(i);
    d.label = sidewalk ? 1 : 0;
    d.series = preprocess_pipeline(ride.series);
    drives.push_back(std::move(d));
  }
  return drives;
}

struct GridResult {
  // keyed "arch/S"; reports carry accuracy and fpr, paths carry saved bytes
  std::map<std::string, MetricsReport> reports;
  std::map<std::string, std::string> model_paths;
  ModelAny star;  // lstm-cnn S=3, reused by criteria 5, 7, 8
};

GridResult train_grid(const std::vector<Drive>& drives, const std::string& tag) {
  const std::uint64_t seed = 5;
  GridResult out;
  for (int S = 1; S <= 3; ++S) {
    WindowConfig wcfg;
    wcfg.window_seconds = S;
    const auto [train, val] = split_train_val(drives, {"d0", "d6"}, wcfg);
    for (const std::string arch : {"cnn", "lstm", "lstm-cnn", "svm", "forest"}) {
      ModelAny model;
      if (arch == "svm") {
        SvmConfig cfg;
        cfg.seed = seed;
        model = train_linear_svm(train, cfg);
      } else if (arch == "forest") {
        ForestConfig cfg;
        cfg.seed = seed;
        model = train_random_forest(train, cfg);
      } else {
        NnModel m = build_model(parse_arch(arch), S, seed);
        TrainConfig cfg;  // the pinned recipe: 30 epochs, lr 0.001, batch 6
        cfg.seed = seed;
        train_model(m, train, cfg);
        model = std::move(m);
      }
      const std::string key = arch + "/" + std::to_string(S);
      const std::string path = "acc_" + tag + "_" + arch + "_" + std::to_string(S) + ".model";
      save_model(model, path);
      out.reports[key] = evaluate(model, val);
      out.model_paths[key] = path;
      if (arch == "lstm-cnn" && S == 3) out.star = model;
    }
  }
  return out;
}

void criterion4(GridResult* grid_out, bool* completed) {
  const double t0 = now_s();
  const std::vector<Drive> drives = build_corpus();
  *grid_out = train_grid(drives, "run1");
  *completed = true;  // artifacts exist; the thresholds below are the verdict
  const double dt = now_s() - t0;

  const MetricsReport& star = grid_out->reports.at("lstm-cnn/3");
  bool all_above = true;
  double weakest = 1.0;
  std::string weakest_key;
  for (const auto& [key, rep] : grid_out->reports) {
    if (rep.accuracy < weakest) {
      weakest = rep.accuracy;
      weakest_key = key;
    }
    all_above = all_above && rep.accuracy > kEveryModelAccuracy;
  }
  const bool ok = star.accuracy >= kStarAccuracy && star.fpr <= kStarFpr && all_above &&
                  dt <= kBudgetTrainS;
  report(4, ok,
         fmt("lstm-cnn S=3 acc %.4f fpr %.4f; weakest of 15 = %s at %.4f; %.0f s",
             star.accuracy, star.fpr, weakest_key.c_str(), weakest, dt));
}

// ---- criterion 5: streaming equivalence ----------------------------------

Ride mixed_ride(double wind) {
  const double deg = M_PI / 180.0;
  RideScript script;
  script.seed = 777;
  script.segments.push_back({90.0, road_profile(), 3.0 * deg, -1.0 * deg, wind});
  script.segments.push_back({90.0, sidewalk_profile(), 3.0 * deg, -1.0 * deg, wind});
  return generate_ride(script);
}

double segment_accuracy(const std::vector<StreamDecision>& decisions) {
  int ok = 0;
  for (const StreamDecision& d : decisions) {
    const int truth = d.t > 90.0 ? 1 : 0;  // switch at t = 90, windows trail
    ok += d.prediction.label == truth;
  }
  return decisions.empty() ? 0.0 : static_cast<double>(ok) / decisions.size();
}

void criterion5(const ModelAny& star, double* calm_accuracy, bool* completed) {
  const double t0 = now_s();
  const Ride ride = mixed_ride(1.0);
  StreamConfig cfg;  // S = 3, T = 5 s
  const EquivalenceReport eq = stream_vs_batch_equivalence(star, cfg, ride.series);
  const std::vector<StreamDecision> decisions = replay_stream(star, cfg, ride.series);
  write_decisions_csv("acc_run1_decisions.csv", decisions);
  *completed = true;
  const double acc = segment_accuracy(decisions);
  const double dt = now_s() - t0;
  const bool ok = eq.pairs == 36 && eq.max_abs_diff <= kStreamTol &&
                  acc >= kSegmentAccuracy && dt < kBudgetStreamS;
  report(5, ok,
         fmt("36 decisions over 180 s, max |p_stream - p_batch| %.2e, segment acc %.4f, "
             "%.1f s",
             eq.max_abs_diff, acc, dt));
  *calm_accuracy = acc;
}

// ---- criterion 6: metric correctness -------------------------------------

void criterion6() {
  const MetricsReport r = metrics({4, 2, 3, 1});
  const bool ok = std::fabs(r.accuracy - 0.7) <= 1e-15 &&
                  std::fabs(r.f1 - 8.0 / 11.0) <= 1e-12 && std::fabs(r.fpr - 0.4) <= 1e-15;
  report(6, ok,
         fmt("tp=4 fp=2 tn=3 fn=1 -> accuracy %.4f, F1 %.6f, FPR %.4f", r.accuracy, r.f1,
             r.fpr));
}

// ---- criterion 7: determinism --------------------------------------------

void criterion7(const GridResult& first, bool deps_ok) {
  if (!deps_ok) {
    report(7, false, "skipped: criteria 4/5 did not complete");
    return;
  }
  const double t0 = now_s();
  // full rerun from the seeds: regenerate the corpus, retrain, restream
  const std::vector<Drive> drives = build_corpus();
  const GridResult second = train_grid(drives, "run2");
  int identical = 0;
  for (const auto& [key, path1] : first.model_paths)
    identical += slurp(path1) == slurp(second.model_paths.at(key));
  const Ride ride = mixed_ride(1.0);
  StreamConfig cfg;
  const std::vector<StreamDecision> decisions = replay_stream(second.star, cfg, ride.series);
  write_decisions_csv("acc_run2_decisions.csv", decisions);
  const bool logs_equal = slurp("acc_run1_decisions.csv") == slurp("acc_run2_decisions.csv");
  const double dt = now_s() - t0;
  const bool ok = identical == 15 && logs_equal;
  report(7, ok,
         fmt("%d/15 model files byte-identical, decision logs %s, %.0f s", identical,
             logs_equal ? "byte-identical" : "differ", dt));
}

// ---- criterion 8: wind robustness probe (reported, not build-blocking) ----

void criterion8(const ModelAny& star, double calm_accuracy, bool deps_ok) {
  if (!deps_ok) {
    report(8, false, "skipped: criteria 4/5 did not complete", false);
    return;
  }
  const Ride windy = mixed_ride(2.0);
  StreamConfig cfg;
  const std::vector<StreamDecision> decisions = replay_stream(star, cfg, windy.series);
  const double acc = segment_accuracy(decisions);
  const bool ok = calm_accuracy - acc <= kWindDegradation;
  report(8, ok,
         fmt("wind x2 segment acc %.4f vs calm %.4f (degradation %.4f, allowed %.2f) "
             "[non-blocking]",
             acc, calm_accuracy, calm_accuracy - acc, kWindDegradation),
         false);
}

}  // namespace

int main() {
  std::printf("surf acceptance suite\n");
  try {
    criterion1();
  } catch (const std::exception& e) {
    report(1, false, fmt("exception: %s", e.what()));
  }
  try {
    criterion2();
  } catch (const std::exception& e) {
    report(2, false, fmt("exception: %s", e.what()));
  }
  try {
    criterion3();
  } catch (const std::exception& e) {
    report(3, false, fmt("exception: %s", e.what()));
  }

  GridResult grid;
  bool c4_done = false;
  try {
    criterion4(&grid, &c4_done);
  } catch (const std::exception& e) {
    report(4, false, fmt("exception: %s", e.what()));
  }

  double calm_accuracy = 0.0;
  bool c5_done = false;
  if (c4_done) {
    try {
      criterion5(grid.star, &calm_accuracy, &c5_done);
    } catch (const std::exception& e) {
      report(5, false, fmt("exception: %s", e.what()));
    }
  } else {
    report(5, false, "skipped: criterion 4 did not complete");
  }

  try {
    criterion6();
  } catch (const std::exception& e) {
    report(6, false, fmt("exception: %s", e.what()));
  }
  try {
    criterion7(grid, c4_done && c5_done);
  } catch (const std::exception& e) {
    report(7, false, fmt("exception: %s", e.what()));
  }
  try {
    criterion8(grid.star, calm_accuracy, c4_done && c5_done);
  } catch (const std::exception& e) {
    report(8, false, fmt("exception: %s", e.what()), false);
  }

  std::printf("%s\n", g_gate_ok ? "acceptance: all binding criteria passed"
                                : "acceptance: binding criteria FAILED");
  return g_gate_ok ? 0 : 1;
}
