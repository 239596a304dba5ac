// Micro-benchmark pitting the optimized kernels against the serial reference
// implementations on training-shaped problems. Build Release; run with
// OMP_NUM_THREADS set to taste.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ref/reference.hpp"
#include "surf/kernels.hpp"
#include "surf/parallel.hpp"
#include "surf/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double checksum = 0.0;  // defeats dead-code elimination

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  std::vector<double> ms(reps);
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    ms[r] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  }
  std::sort(ms.begin(), ms.end());
  return ms[reps / 2];
}

void row(const std::string& name, const std::string& shape,
         const std::function<void()>& ref_fn, const std::function<void()>& fast_fn, int reps) {
  const double ref_ms = time_ms(ref_fn, reps);
  const double fast_ms = time_ms(fast_fn, reps);
  std::printf("%-18s %-22s %10.3f %10.3f %9.2fx\n", name.c_str(), shape.c_str(), ref_ms,
              fast_ms, ref_ms / fast_ms);
}

std::vector<double> randu(surf::Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

int main() {
  surf::Rng rng(42);
  std::printf("surf_bench: %d thread(s); median of repeated runs\n", surf::max_threads());
  std::printf("%-18s %-22s %10s %10s %10s\n", "kernel", "shape", "ref ms", "fast ms", "speedup");

  {
    const std::size_t n = 1 << 20;
    const std::vector<double> x = randu(rng, n, -30.0, 30.0);
    std::vector<double> y(n);
    row("vec_exp", "n=1M", [&] { surf::ref::vec_exp(x.data(), y.data(), n); },
        [&] { surf::kernels::vec_exp(x.data(), y.data(), n); }, 9);
    checksum += y[n / 2];
    row("vec_tanh", "n=1M", [&] { surf::ref::vec_tanh(x.data(), y.data(), n); },
        [&] { surf::kernels::vec_tanh(x.data(), y.data(), n); }, 9);
    checksum += y[n / 2];
  }

  {
    // The LSTM training hot spot: 4H x (C+H) times (C+H) x B.
    const int m = 400, k = 106, b = 6;
    const std::vector<double> a = randu(rng, m * k, -1.0, 1.0);
    const std::vector<double> x = randu(rng, k * b, -1.0, 1.0);
    const std::vector<double> bias = randu(rng, m, -1.0, 1.0);
    std::vector<double> c(m * b);
    row("gemm_nb", "400x106 * 106x6",
        [&] {
          for (int i = 0; i < 64; ++i)
            surf::ref::gemm_nb(a.data(), x.data(), bias.data(), c.data(), m, k, b);
        },
        [&] {
          for (int i = 0; i < 64; ++i)
            surf::kernels::gemm_nb(a.data(), x.data(), bias.data(), c.data(), m, k, b);
        },
        9);
    checksum += c[0];
  }

  {
    const int cin = 8, cout = 8, t = 60, k = 3, b = 6;
    const std::vector<double> x = randu(rng, cin * t * b, -1.0, 1.0);
    const std::vector<double> w = randu(rng, cout * cin * k, -1.0, 1.0);
    const std::vector<double> bias = randu(rng, cout, -1.0, 1.0);
    std::vector<double> y(cout * t * b);
    row("conv1d_forward", "8->8 k3 T60 B6",
        [&] {
          for (int i = 0; i < 256; ++i)
            surf::ref::conv1d_forward(x.data(), w.data(), bias.data(), y.data(), cin, cout, t,
                                      k, b);
        },
        [&] {
          for (int i = 0; i < 256; ++i)
            surf::kernels::conv1d_forward(x.data(), w.data(), bias.data(), y.data(), cin, cout,
                                          t, k, b);
        },
        9);
    checksum += y[1];
  }

  {
    // Whole-gate LSTM arithmetic vs the per-example reference step.
    const int cin = 6, hidden = 100, b = 6, steps = 60;
    const int m = 4 * hidden, k = cin + hidden;
    const std::vector<double> wu = randu(rng, m * k, -0.3, 0.3);
    const std::vector<double> bias = randu(rng, m, -0.1, 0.1);
    const std::vector<double> xs = randu(rng, steps * cin, -1.0, 1.0);
    row("lstm_steps", "H100 T60 x6 lanes",
        [&] {
          std::vector<double> h(hidden, 0.0), c(hidden, 0.0);
          for (int lane = 0; lane < b; ++lane) {
            std::fill(h.begin(), h.end(), 0.0);
            std::fill(c.begin(), c.end(), 0.0);
            for (int t = 0; t < steps; ++t)
              surf::ref::lstm_step(xs.data() + t * cin, h.data(), c.data(), wu.data(),
                                   bias.data(), cin, hidden);
            checksum += h[0];
          }
        },
        [&] {
          // Same math batched: assemble [x;h] lanes, one gemm per step, then
          // the elementwise gate block.
          std::vector<double> xh(k * b), gates(m * b), h(hidden * b, 0.0), c(hidden * b, 0.0);
          for (int t = 0; t < steps; ++t) {
            for (int j = 0; j < cin; ++j)
              for (int lane = 0; lane < b; ++lane) xh[j * b + lane] = xs[t * cin + j];
            std::copy(h.begin(), h.end(), xh.begin() + cin * b);
            surf::kernels::gemm_nb(wu.data(), xh.data(), bias.data(), gates.data(), m, k, b);
            const std::size_t hb = static_cast<std::size_t>(hidden) * b;
            double* gi = gates.data();
            double* gf = gates.data() + hb;
            double* gg = gates.data() + 2 * hb;
            double* go = gates.data() + 3 * hb;
            surf::kernels::vec_sigmoid(gi, gi, 2 * hb);  // i and f are adjacent
            surf::kernels::vec_tanh(gg, gg, hb);
            surf::kernels::vec_sigmoid(go, go, hb);
            for (std::size_t i = 0; i < hb; ++i) c[i] = gf[i] * c[i] + gi[i] * gg[i];
            std::vector<double> th(hb);
            surf::kernels::vec_tanh(c.data(), th.data(), hb);
            for (std::size_t i = 0; i < hb; ++i) h[i] = go[i] * th[i];
          }
          checksum += h[0];
        },
        5);
  }

  std::printf("checksum %.6g\n", checksum);
  return 0;
}
