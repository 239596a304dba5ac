#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

// End-to-end checks of the installed binary: every call goes through the real
// argv parsing, exit-code mapping, and file I/O. SURF_CLI_PATH is injected by
// the build.

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SURF_CLI_PATH) + " " + args + " >cli_out.tmp 2>cli_err.tmp";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

}  // namespace

TEST_CASE("full pipeline: simulate, preprocess, window, train, eval, stream") {
  write_file("cli_road.script", "# duration,label,roll_deg,pitch_deg\n30,0,2,-1\n");
  write_file("cli_walk.script", "30,1,2,-1\n");
  write_file("cli_mix.script", "15,0,2,-1\n15,1,2,-1\n");

  CHECK(run("simulate --script cli_road.script --seed 1 --out cli_road.csv") == 0);
  CHECK(run("simulate --script cli_walk.script --seed 2 --out cli_walk.csv") == 0);
  CHECK(run("simulate --script cli_mix.script --seed 3 --out cli_mix.csv --truth cli_mix_truth.csv") == 0);

  CHECK(run("preprocess --input cli_road.csv --out cli_road_lvl.csv") == 0);
  CHECK(run("preprocess --input cli_walk.csv --out cli_walk_lvl.csv") == 0);

  CHECK(run("make-dataset --input cli_road_lvl.csv=0=r0 --input cli_walk_lvl.csv=1=w0 "
            "--window 1 --out cli_train.ds") == 0);

  CHECK(run("train --arch svm --data cli_train.ds --seed 4 --lambda 0.01 --epochs 10 "
            "--out cli_svm.model") == 0);
  CHECK(run("eval --model cli_svm.model --data cli_train.ds --csv cli_metrics.csv") == 0);
  const std::string table = slurp("cli_out.tmp");
  CHECK(table.find("svm") != std::string::npos);
  CHECK(table.find("Accuracy") != std::string::npos);
  const std::string csv = slurp("cli_metrics.csv");
  CHECK(csv.find("model,window_seconds,") == 0);

  CHECK(run("stream --model cli_svm.model --input cli_mix.csv --out cli_dec.csv") == 0);
  std::ifstream dec("cli_dec.csv");
  std::string line;
  REQUIRE(std::getline(dec, line));
  CHECK(line == "t,p,label");
  int rows = 0;
  while (std::getline(dec, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 6);  // 30 s ride, decisions at t = 5,10,...,30
}

TEST_CASE("reruns with the same seed are byte-identical") {
  write_file("cli_rr.script", "20,0,0,0\n20,1,0,0\n");
  CHECK(run("simulate --script cli_rr.script --seed 9 --out cli_rr_a.csv") == 0);
  CHECK(run("simulate --script cli_rr.script --seed 9 --out cli_rr_b.csv") == 0);
  CHECK(slurp("cli_rr_a.csv") == slurp("cli_rr_b.csv"));

  CHECK(run("preprocess --input cli_rr_a.csv --out cli_rr_lvl.csv") == 0);
  CHECK(run("make-dataset --input cli_rr_lvl.csv=0 --window 1 --out cli_rr_a.ds") == 0);
  CHECK(run("make-dataset --input cli_rr_lvl.csv=0 --window 1 --out cli_rr_b.ds") == 0);
  CHECK(slurp("cli_rr_a.ds") == slurp("cli_rr_b.ds"));
}

TEST_CASE("validation split flows through make-dataset") {
  write_file("cli_v.script", "20,0,0,0\n");
  write_file("cli_w.script", "20,1,0,0\n");
  CHECK(run("simulate --script cli_v.script --seed 5 --out cli_v.csv") == 0);
  CHECK(run("simulate --script cli_w.script --seed 6 --out cli_w.csv") == 0);
  CHECK(run("preprocess --input cli_v.csv --out cli_v_lvl.csv") == 0);
  CHECK(run("preprocess --input cli_w.csv --out cli_w_lvl.csv") == 0);
  CHECK(run("make-dataset --input cli_v_lvl.csv=0=a --input cli_w_lvl.csv=1=b "
            "--window 1 --val b --val-out cli_val.ds --out cli_tr.ds") == 0);
  // --val without --val-out is a usage error
  CHECK(run("make-dataset --input cli_v_lvl.csv=0=a --input cli_w_lvl.csv=1=b "
            "--window 1 --val b --out cli_tr2.ds") == 1);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run("") == 1);                      // no subcommand
  CHECK(run("frobnicate") == 1);            // unknown subcommand
  CHECK(run("simulate --out x.csv") == 1);  // missing required --script
  CHECK(run("train --arch nope --data cli_train.ds --out m.tmp") == 1);
  CHECK(run("make-dataset --input cli_road_lvl.csv=7 --window 1 --out bad.ds") == 1);
  CHECK(run("make-dataset --input cli_road_lvl.csv=0 --window 0 --out bad.ds") == 1);
  const std::string err = slurp("cli_err.tmp");
  CHECK(!err.empty());
}

TEST_CASE("data errors exit 2") {
  CHECK(run("preprocess --input does_not_exist.csv --out x.csv") == 2);
  write_file("cli_garbage.csv", "t,ax,ay\n1,2,3\n");
  CHECK(run("preprocess --input cli_garbage.csv --out x.csv") == 2);
  CHECK(run("eval --model no_such.model --data cli_train.ds") == 2);
  write_file("cli_bad.script", "10,5,0,0\n");  // label 5
  CHECK(run("simulate --script cli_bad.script --seed 1 --out x.csv") == 2);
}

TEST_CASE("help exits 0 and options load from a config file") {
  CHECK(run("--help") == 0);
  CHECK(run("simulate --help") == 0);
  write_file("cli_sim.cfg", "[simulate]\nscript=cli_rr.script\nseed=9\nout=cli_cfg.csv\n");
  CHECK(run("simulate --config cli_sim.cfg") == 0);
  CHECK(slurp("cli_cfg.csv") == slurp("cli_rr_a.csv"));
}
