#include "ref/reference.hpp"

#include <cmath>
#include <vector>

namespace surf::ref {

void vec_exp(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

void vec_sigmoid(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void vec_tanh(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void gemm_nb(const double* A, const double* X, const double* bias, double* C,
             int M, int K, int B) {
  for (int m = 0; m < M; ++m)
    for (int b = 0; b < B; ++b) {
      double acc = bias ? bias[m] : 0.0;
      for (int k = 0; k < K; ++k)
        acc += A[static_cast<std::size_t>(m) * K + k] *
               X[static_cast<std::size_t>(k) * B + b];
      C[static_cast<std::size_t>(m) * B + b] = acc;
    }
}

void accum_outer_bl(const double* G, const double* Xl, double* dW, int M,
                    int K, int B) {
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k) {
      double acc = 0.0;
      for (int b = 0; b < B; ++b)
        acc += G[static_cast<std::size_t>(m) * B + b] *
               Xl[static_cast<std::size_t>(b) * K + k];
      dW[static_cast<std::size_t>(m) * K + k] += acc;
    }
}

void conv1d_forward(const double* x, const double* w, const double* bias,
                    double* y, int cin, int cout, int T, int k, int B) {
  const int pad = (k - 1) / 2;
  for (int co = 0; co < cout; ++co)
    for (int t = 0; t < T; ++t)
      for (int b = 0; b < B; ++b) {
        double acc = bias ? bias[co] : 0.0;
        for (int ci = 0; ci < cin; ++ci)
          for (int kk = 0; kk < k; ++kk) {
            const int src = t + kk - pad;
            if (src < 0 || src >= T) continue;
            acc += w[(static_cast<std::size_t>(co) * cin + ci) * k + kk] *
                   x[(static_cast<std::size_t>(ci) * T + src) * B + b];
          }
        y[(static_cast<std::size_t>(co) * T + t) * B + b] = acc;
      }
}

void conv1d_backward_data(const double* dy, const double* w, double* dx,
                          int cin, int cout, int T, int k, int B) {
  const int pad = (k - 1) / 2;
  for (int ci = 0; ci < cin; ++ci)
    for (int t = 0; t < T; ++t)
      for (int b = 0; b < B; ++b) {
        double acc = 0.0;
        for (int co = 0; co < cout; ++co)
          for (int kk = 0; kk < k; ++kk) {
            const int dst = t - kk + pad;
            if (dst < 0 || dst >= T) continue;
            acc += w[(static_cast<std::size_t>(co) * cin + ci) * k + kk] *
                   dy[(static_cast<std::size_t>(co) * T + dst) * B + b];
          }
        dx[(static_cast<std::size_t>(ci) * T + t) * B + b] = acc;
      }
}

void conv1d_backward_params(const double* dy, const double* x, double* dw,
                            double* db, int cin, int cout, int T, int k, int B) {
  const int pad = (k - 1) / 2;
  for (int co = 0; co < cout; ++co) {
    for (int t = 0; t < T; ++t)
      for (int b = 0; b < B; ++b)
        db[co] += dy[(static_cast<std::size_t>(co) * T + t) * B + b];
    for (int ci = 0; ci < cin; ++ci)
      for (int kk = 0; kk < k; ++kk) {
        double acc = 0.0;
        for (int t = 0; t < T; ++t) {
          const int src = t + kk - pad;
          if (src < 0 || src >= T) continue;
          for (int b = 0; b < B; ++b)
            acc += dy[(static_cast<std::size_t>(co) * T + t) * B + b] *
                   x[(static_cast<std::size_t>(ci) * T + src) * B + b];
        }
        dw[(static_cast<std::size_t>(co) * cin + ci) * k + kk] += acc;
      }
  }
}

void avgpool_forward(const double* x, double* y, int C, int T, int B) {
  const int To = T / 2;
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < To; ++t)
      for (int b = 0; b < B; ++b)
        y[(static_cast<std::size_t>(c) * To + t) * B + b] =
            0.5 * (x[(static_cast<std::size_t>(c) * T + 2 * t) * B + b] +
                   x[(static_cast<std::size_t>(c) * T + 2 * t + 1) * B + b]);
}

void maxpool_forward(const double* x, double* y, unsigned char* argmax, int C,
                     int T, int B) {
  const int To = T / 2;
  for (int c = 0; c < C; ++c)
    for (int t = 0; t < To; ++t)
      for (int b = 0; b < B; ++b) {
        const double a = x[(static_cast<std::size_t>(c) * T + 2 * t) * B + b];
        const double v = x[(static_cast<std::size_t>(c) * T + 2 * t + 1) * B + b];
        y[(static_cast<std::size_t>(c) * To + t) * B + b] = v > a ? v : a;
        argmax[(static_cast<std::size_t>(c) * To + t) * B + b] = v > a ? 1 : 0;
      }
}

void relu_forward(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void lstm_step(const double* x, double* h, double* c, const double* wu,
               const double* b, int cin, int hidden) {
  const int K = cin + hidden;
  std::vector<double> xh(static_cast<std::size_t>(K));
  for (int i = 0; i < cin; ++i) xh[i] = x[i];
  for (int i = 0; i < hidden; ++i) xh[cin + i] = h[i];
  std::vector<double> g(static_cast<std::size_t>(4) * hidden);
  for (int r = 0; r < 4 * hidden; ++r) {
    double acc = b[r];
    for (int k = 0; k < K; ++k)
      acc += wu[static_cast<std::size_t>(r) * K + k] * xh[k];
    g[r] = acc;
  }
  for (int j = 0; j < hidden; ++j) {
    const double i_ = 1.0 / (1.0 + std::exp(-g[j]));
    const double f_ = 1.0 / (1.0 + std::exp(-g[hidden + j]));
    const double g_ = std::tanh(g[2 * hidden + j]);
    const double o_ = 1.0 / (1.0 + std::exp(-g[3 * hidden + j]));
    c[j] = f_ * c[j] + i_ * g_;
    h[j] = o_ * std::tanh(c[j]);
  }
}

}  // namespace surf::ref
