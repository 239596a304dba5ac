#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "surf/dataset.hpp"
#include "surf/errors.hpp"
#include "surf/eval.hpp"
#include "surf/imu.hpp"
#include "surf/model_io.hpp"
#include "surf/nn.hpp"
#include "surf/preprocess.hpp"
#include "surf/simride.hpp"
#include "surf/stream.hpp"

namespace {

using namespace surf;

double deg2rad(double d) { return d * M_PI / 180.0; }

// Ride script CSV: `duration_s,label,roll_deg,pitch_deg[,wind]` per segment.
// Blank lines and lines starting with '#' are skipped.
std::vector<RideSegment> read_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<RideSegment> segments;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const std::string tok = line.substr(pos, comma - pos);
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
      fields.push_back(v);
      pos = comma + 1;
    }
    if (fields.size() != 4 && fields.size() != 5)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected duration,label,roll_deg,pitch_deg[,wind]");
    RideSegment seg;
    seg.duration_s = fields[0];
    if (fields[1] != 0.0 && fields[1] != 1.0)
      throw ParseError(path + ":" + std::to_string(lineno) + ": label must be 0 or 1");
    seg.profile = fields[1] == 0.0 ? road_profile() : sidewalk_profile();
    seg.roll = deg2rad(fields[2]);
    seg.pitch = deg2rad(fields[3]);
    seg.wind = fields.size() == 5 ? fields[4] : 1.0;
    segments.push_back(seg);
  }
  if (segments.empty()) throw DataError(path + ": no ride segments");
  return segments;
}

struct SimulateOpts {
  std::string script, out, truth;
  std::uint64_t seed = 0;
  double rate = 100.0;
};

void run_simulate(const SimulateOpts& o) {
  std::printf("surf simulate: script=%s seed=%llu rate=%g out=%s truth=%s\n", o.script.c_str(),
              static_cast<unsigned long long>(o.seed), o.rate, o.out.c_str(),
              o.truth.empty() ? "-" : o.truth.c_str());
  RideScript script;
  script.segments = read_script(o.script);
  script.seed = o.seed;
  script.rate_hz = o.rate;
  const Ride ride = generate_ride(script);
  write_imu_csv(ride.series, o.out);
  if (!o.truth.empty()) write_truth_csv(ride, o.truth);
  std::printf("wrote %zu samples to %s\n", ride.series.size(), o.out.c_str());
}

struct PreprocessOpts {
  std::string input, out;
  std::string axes = "x,y,z";
};

void run_preprocess(const PreprocessOpts& o) {
  std::printf("surf preprocess: input=%s axes=%s out=%s\n", o.input.c_str(), o.axes.c_str(),
              o.out.c_str());
  const ImuSeries raw = parse_imu_csv(o.input, FrameConvention::parse(o.axes));
  const LeveledSeries leveled = preprocess_pipeline(raw);
  ImuSeries out;
  out.rate_hz = leveled.rate_hz;
  out.samples = leveled.samples;
  write_imu_csv(out, o.out);
  std::printf("wrote %zu leveled samples at %g Hz to %s\n", out.size(), out.rate_hz,
              o.out.c_str());
}

struct MakeDatasetOpts {
  std::vector<std::string> inputs;  // path=label[=id]
  int window = 3;
  double stride = 0.0;
  std::string out, val_out;
  std::vector<std::string> val_ids;
};

std::string path_stem(const std::string& path) {
  std::size_t slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  std::size_t dot = base.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

Drive read_drive(const std::string& spec) {
  const std::size_t eq1 = spec.find('=');
  if (eq1 == std::string::npos)
    throw ParameterError("--input needs path=label[=id], got '" + spec + "'");
  const std::size_t eq2 = spec.find('=', eq1 + 1);
  Drive d;
  const std::string path = spec.substr(0, eq1);
  const std::string label =
      eq2 == std::string::npos ? spec.substr(eq1 + 1) : spec.substr(eq1 + 1, eq2 - eq1 - 1);
  if (label != "0" && label != "1")
    throw ParameterError("drive label must be 0 or 1, got '" + label + "'");
  d.label = label == "1";
  d.id = eq2 == std::string::npos ? path_stem(path) : spec.substr(eq2 + 1);
  const ImuSeries s = parse_imu_csv(path);
  d.series.rate_hz = s.rate_hz;
  d.series.samples = s.samples;
  return d;
}

void run_make_dataset(const MakeDatasetOpts& o) {
  std::printf("surf make-dataset: window=%d stride=%g inputs=%zu out=%s\n", o.window, o.stride,
              o.inputs.size(), o.out.c_str());
  WindowConfig cfg;
  cfg.window_seconds = o.window;
  cfg.stride_seconds = o.stride;
  cfg.validate();
  std::vector<Drive> drives;
  for (const std::string& spec : o.inputs) drives.push_back(read_drive(spec));

  if (!o.val_ids.empty()) {
    if (o.val_out.empty()) throw ParameterError("--val requires --val-out");
    auto [train, val] = split_train_val(drives, o.val_ids, cfg);
    save_dataset(train, o.out);
    save_dataset(val, o.val_out);
    std::printf("wrote %zu train windows to %s, %zu val windows to %s\n", train.size(),
                o.out.c_str(), val.size(), o.val_out.c_str());
    return;
  }
  Dataset ds;
  ds.config = cfg;
  for (const Drive& d : drives) {
    std::vector<LabeledWindow> wins = partition_windows(d.series, d.label, cfg);
    for (LabeledWindow& w : wins) {
      ds.examples.push_back(std::move(w));
      ds.provenance.push_back(d.id);
    }
  }
  save_dataset(ds, o.out);
  std::printf("wrote %zu windows to %s\n", ds.size(), o.out.c_str());
}

struct TrainOpts {
  std::string arch, data, out;
  int window = 0;  // 0: take from the dataset
  std::uint64_t seed = 0;
  int epochs = 0;  // 0: architecture default
  double lr = 0.001;
  int batch = 6;
  double lambda = 1e-4;
  int trees = 100;
  int max_depth = 100;
};

void run_train(const TrainOpts& o) {
  std::printf("surf train: arch=%s data=%s window=%d seed=%llu out=%s\n", o.arch.c_str(),
              o.data.c_str(), o.window, static_cast<unsigned long long>(o.seed), o.out.c_str());
  const Dataset ds = load_dataset(o.data);
  const int s = ds.config.window_seconds;
  if (o.window != 0 && o.window != s)
    throw ParameterError("--window " + std::to_string(o.window) + " but " + o.data + " holds " +
                         std::to_string(s) + " s windows");
  const auto [n0, n1] = ds.class_balance();
  std::printf("dataset: %zu windows of %d s (%zu road, %zu sidewalk)\n", ds.size(), s, n0, n1);

  ModelAny model;
  if (o.arch == "svm") {
    SvmConfig cfg;
    cfg.lambda = o.lambda;
    cfg.epochs = o.epochs == 0 ? 20 : o.epochs;
    cfg.seed = o.seed;
    std::printf("svm: lambda=%g epochs=%d\n", cfg.lambda, cfg.epochs);
    SvmTrainInfo info;
    model = train_linear_svm(ds, cfg, &info);
    std::printf("final objective=%.6f\n", info.epoch_objective.back());
  } else if (o.arch == "forest") {
    ForestConfig cfg;
    cfg.n_trees = o.trees;
    cfg.max_depth = o.max_depth;
    cfg.seed = o.seed;
    std::printf("forest: trees=%d max_depth=%d\n", cfg.n_trees, cfg.max_depth);
    model = train_random_forest(ds, cfg);
  } else {
    TrainConfig cfg;
    cfg.epochs = o.epochs == 0 ? cfg.epochs : o.epochs;
    cfg.learning_rate = o.lr;
    cfg.batch_size = o.batch;
    cfg.seed = o.seed;
    std::printf("nn: epochs=%d lr=%g batch=%d\n", cfg.epochs, cfg.learning_rate, cfg.batch_size);
    NnModel nn = build_model(parse_arch(o.arch), s, o.seed);
    const TrainLog log = train_model(nn, ds, cfg);
    for (std::size_t e = 0; e < log.epoch_loss.size(); ++e)
      std::printf("epoch %zu loss=%.6f\n", e + 1, log.epoch_loss[e]);
    model = std::move(nn);
  }
  save_model(model, o.out);
  std::printf("wrote %s model to %s\n", model_arch_name(model).c_str(), o.out.c_str());
}

struct EvalOpts {
  std::vector<std::string> models;
  std::string data;
  std::string csv = "metrics.csv";
};

void run_eval(const EvalOpts& o) {
  std::printf("surf eval: data=%s models=%zu csv=%s\n", o.data.c_str(), o.models.size(),
              o.csv.c_str());
  const Dataset ds = load_dataset(o.data);
  std::vector<MetricsReport> rows;
  for (const std::string& path : o.models) rows.push_back(evaluate(load_model(path), ds));
  std::fputs(format_table(rows).c_str(), stdout);
  write_metrics_csv(o.csv, rows);
}

struct StreamOpts {
  std::string model, input, out;
  double activation = 5.0;
};

void run_stream(const StreamOpts& o) {
  std::printf("surf stream: model=%s input=%s activation=%g out=%s\n", o.model.c_str(),
              o.input.c_str(), o.activation, o.out.c_str());
  const ModelAny model = load_model(o.model);
  const ImuSeries raw = parse_imu_csv(o.input);
  StreamConfig cfg;
  cfg.window_seconds = model_window_seconds(model);
  cfg.activation_seconds = o.activation;
  const std::vector<StreamDecision> decisions = replay_stream(model, cfg, raw);
  write_decisions_csv(o.out, decisions);
  std::printf("wrote %zu decisions to %s\n", decisions.size(), o.out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surf: road vs sidewalk surface recognition from IMU recordings"};
  app.require_subcommand(1);
  // --config lives on the root app (CLI11 only reads the root's config file);
  // fallthrough lets it be written after the subcommand name. Files use one
  // [section] per subcommand.
  app.fallthrough();
  app.set_config("--config", "",
                 "Read options from a key=value file, one [section] per subcommand");

  SimulateOpts sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "Generate a synthetic labeled ride");
  c_sim->add_option("--script", sim.script, "Segment CSV: duration,label,roll_deg,pitch_deg[,wind]")
      ->required();
  c_sim->add_option("--seed", sim.seed, "RNG seed");
  c_sim->add_option("--rate", sim.rate, "Sample rate in Hz")->capture_default_str();
  c_sim->add_option("--out", sim.out, "Raw IMU CSV to write")->required();
  c_sim->add_option("--truth", sim.truth, "Optional per-sample truth CSV");

  PreprocessOpts pre;
  CLI::App* c_pre = app.add_subcommand("preprocess", "Filter, decimate, and level a raw recording");
  c_pre->add_option("--input", pre.input, "Raw IMU CSV")->required();
  c_pre->add_option("--axes", pre.axes, "Axis remap, e.g. -y,x,z")->capture_default_str();
  c_pre->add_option("--out", pre.out, "Leveled 20 Hz CSV to write")->required();

  MakeDatasetOpts mk;
  CLI::App* c_mk = app.add_subcommand("make-dataset", "Window leveled drives into a dataset");
  c_mk->add_option("--input", mk.inputs, "Leveled CSV as path=label[=id]; repeatable")
      ->required();
  c_mk->add_option("--window", mk.window, "Window length S in seconds")->capture_default_str();
  c_mk->add_option("--stride", mk.stride, "Stride in seconds (default: window)");
  c_mk->add_option("--out", mk.out, "Dataset file to write")->required();
  c_mk->add_option("--val", mk.val_ids, "Drive ids held out for validation");
  c_mk->add_option("--val-out", mk.val_out, "Validation dataset file");

  TrainOpts tr;
  CLI::App* c_tr = app.add_subcommand("train", "Train one model on a dataset");
  c_tr->add_option("--arch", tr.arch, "cnn | lstm | lstm-cnn | svm | forest")->required();
  c_tr->add_option("--data", tr.data, "Training dataset")->required();
  c_tr->add_option("--window", tr.window, "Expected window length (checked against the data)");
  c_tr->add_option("--seed", tr.seed, "RNG seed");
  c_tr->add_option("--epochs", tr.epochs, "Epoch count (0 = architecture default)");
  c_tr->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  c_tr->add_option("--batch", tr.batch, "Mini-batch size")->capture_default_str();
  c_tr->add_option("--lambda", tr.lambda, "SVM regularization")->capture_default_str();
  c_tr->add_option("--trees", tr.trees, "Forest size")->capture_default_str();
  c_tr->add_option("--max-depth", tr.max_depth, "Forest depth cap")->capture_default_str();
  c_tr->add_option("--out", tr.out, "Model file to write")->required();

  EvalOpts ev;
  CLI::App* c_ev = app.add_subcommand("eval", "Evaluate models on a dataset");
  c_ev->add_option("--model", ev.models, "Model file; repeatable")->required();
  c_ev->add_option("--data", ev.data, "Evaluation dataset")->required();
  c_ev->add_option("--csv", ev.csv, "Metrics CSV to write")->capture_default_str();

  StreamOpts st;
  CLI::App* c_st = app.add_subcommand("stream", "Replay a raw recording through the online classifier");
  c_st->add_option("--model", st.model, "Model file")->required();
  c_st->add_option("--input", st.input, "Raw IMU CSV")->required();
  c_st->add_option("--activation", st.activation, "Decision interval in seconds")
      ->capture_default_str();
  c_st->add_option("--out", st.out, "Decision CSV to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_sim->parsed()) run_simulate(sim);
    if (c_pre->parsed()) run_preprocess(pre);
    if (c_mk->parsed()) run_make_dataset(mk);
    if (c_tr->parsed()) run_train(tr);
    if (c_ev->parsed()) run_eval(ev);
    if (c_st->parsed()) run_stream(st);
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "surf: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "surf: %s\n", e.what());
    return 2;
  }
  return 0;
}
