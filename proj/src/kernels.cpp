#include "surf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "surf/parallel.hpp"

namespace surf::kernels {

// In-place safe (x may alias y): each lane reads x[i] once before writing y[i].
void vec_exp(const double* x, double* y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    // Cody-Waite range reduction, degree-11 polynomial, exponent bit insert.
    double v = x[i];
    v = std::fmin(std::fmax(v, -700.0), 700.0);
    const double k = __builtin_nearbyint(v * 1.4426950408889634074);
    double r = v - k * 0.693147180369123816490;
    r -= k * 1.90821492927058770002e-10;
    double p = 2.08767569878680989792e-09;
    p = p * r + 2.50521083854417187751e-08;
    p = p * r + 2.75573192239198747630e-07;
    p = p * r + 2.75573192239198747630e-06;
    p = p * r + 2.48015873015873015873e-05;
    p = p * r + 1.98412698412698412698e-04;
    p = p * r + 1.38888888888888888889e-03;
    p = p * r + 8.33333333333333333333e-03;
    p = p * r + 4.16666666666666666667e-02;
    p = p * r + 1.66666666666666666667e-01;
    p = p * r + 5.0e-01;
    p = p * r + 1.0;
    p = p * r + 1.0;
    std::int64_t bits;
    std::memcpy(&bits, &p, 8);
    bits += static_cast<std::int64_t>(k) << 52;
    std::memcpy(&p, &bits, 8);
    y[i] = p;
  }
}

void vec_sigmoid(const double* x, double* y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i)
    y[i] = -std::fmin(std::fmax(x[i], -40.0), 40.0);
  vec_exp(y, y, n);
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + y[i]);
}

void vec_tanh(const double* x, double* y, std::size_t n) {
  // tanh(x) = (e^{2x} - 1)/(e^{2x} + 1). The final pass never re-reads x, so
  // the in-place call is safe.
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i)
    y[i] = 2.0 * std::fmin(std::fmax(x[i], -20.0), 20.0);
  vec_exp(y, y, n);
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] = (y[i] - 1.0) / (y[i] + 1.0);
}

namespace {

// MR A-rows per block: one X-row load feeds MR independent accumulator
// chains, which hides the FMA latency that a single running sum would expose.
template <int B, int MR>
inline void gemm_row_block(const double* __restrict A, int m, int K,
                           const double* __restrict X,
                           const double* __restrict bias,
                           double* __restrict C) {
  double acc[MR][B] = {};
  const double* a[MR];
  for (int r = 0; r < MR; ++r) a[r] = A + static_cast<std::size_t>(m + r) * K;
  for (int k = 0; k < K; ++k) {
    const double* __restrict xr = X + static_cast<std::size_t>(k) * B;
    for (int r = 0; r < MR; ++r) {
      const double av = a[r][k];
#pragma omp simd
      for (int b = 0; b < B; ++b) acc[r][b] += av * xr[b];
    }
  }
  for (int r = 0; r < MR; ++r) {
    const double bv = bias ? bias[m + r] : 0.0;
#pragma omp simd
    for (int b = 0; b < B; ++b)
      C[static_cast<std::size_t>(m + r) * B + b] = acc[r][b] + bv;
  }
}

template <int B>
void gemm_nb_fixed(const double* __restrict A, const double* __restrict X,
                   const double* __restrict bias, double* __restrict C, int M,
                   int K) {
  const int blocks = M / 8;
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t blk) {
    gemm_row_block<B, 8>(A, static_cast<int>(blk) * 8, K, X, bias, C);
  });
  int m = blocks * 8;
  if (m + 4 <= M) {
    gemm_row_block<B, 4>(A, m, K, X, bias, C);
    m += 4;
  }
  for (; m < M; ++m) gemm_row_block<B, 1>(A, m, K, X, bias, C);
}

void gemm_nb_generic(const double* A, const double* X, const double* bias,
                     double* C, int M, int K, int B) {
  parallel_for(static_cast<std::size_t>(M), [&](std::size_t m) {
    double* cr = C + m * B;
    for (int b = 0; b < B; ++b) cr[b] = bias ? bias[m] : 0.0;
    const double* a = A + m * K;
    for (int k = 0; k < K; ++k) {
      const double av = a[k];
      const double* xr = X + static_cast<std::size_t>(k) * B;
      for (int b = 0; b < B; ++b) cr[b] += av * xr[b];
    }
  });
}

}  // namespace

void gemm_nb(const double* A, const double* X, const double* bias, double* C,
             int M, int K, int B) {
  switch (B) {
    case 1: gemm_nb_fixed<1>(A, X, bias, C, M, K); break;
    case 2: gemm_nb_fixed<2>(A, X, bias, C, M, K); break;
    case 3: gemm_nb_fixed<3>(A, X, bias, C, M, K); break;
    case 4: gemm_nb_fixed<4>(A, X, bias, C, M, K); break;
    case 5: gemm_nb_fixed<5>(A, X, bias, C, M, K); break;
    case 6: gemm_nb_fixed<6>(A, X, bias, C, M, K); break;
    case 7: gemm_nb_fixed<7>(A, X, bias, C, M, K); break;
    case 8: gemm_nb_fixed<8>(A, X, bias, C, M, K); break;
    default: gemm_nb_generic(A, X, bias, C, M, K, B); break;
  }
}

void accum_outer_bl(const double* G, const double* Xl, double* dW, int M,
                    int K, int B) {
  parallel_for(static_cast<std::size_t>(M), [&](std::size_t m) {
    double* wr = dW + m * K;
    const double* gr = G + m * B;
    for (int b = 0; b < B; ++b) {
      const double gv = gr[b];
      const double* xb = Xl + static_cast<std::size_t>(b) * K;
#pragma omp simd
      for (int k = 0; k < K; ++k) wr[k] += gv * xb[k];
    }
  });
}

void transpose(const double* A, double* At, int M, int K) {
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k)
      At[static_cast<std::size_t>(k) * M + m] = A[static_cast<std::size_t>(m) * K + k];
}

void conv1d_forward(const double* x, const double* w, const double* bias,
                    double* y, int cin, int cout, int T, int k, int B) {
  const int pad = (k - 1) / 2;
  parallel_for(static_cast<std::size_t>(cout), [&](std::size_t co) {
    double* yo = y + co * static_cast<std::size_t>(T) * B;
    const double bv = bias ? bias[co] : 0.0;
    for (int t = 0; t < T; ++t)
      for (int b = 0; b < B; ++b) yo[static_cast<std::size_t>(t) * B + b] = bv;
    for (int ci = 0; ci < cin; ++ci) {
      const double* xi = x + static_cast<std::size_t>(ci) * T * B;
      const double* wr = w + (co * cin + ci) * k;
      for (int kk = 0; kk < k; ++kk) {
        const double wv = wr[kk];
        const int off = kk - pad;
        const int t0 = std::max(0, -off);
        const int t1 = std::min(T, T - off);
        const double* xs = xi + static_cast<std::size_t>(t0 + off) * B;
        double* ys = yo + static_cast<std::size_t>(t0) * B;
        const std::size_t span = static_cast<std::size_t>(t1 - t0) * B;
#pragma omp simd
        for (std::size_t j = 0; j < span; ++j) ys[j] += wv * xs[j];
      }
    }
  });
}

void conv1d_backward_data(const double* dy, const double* w, double* dx,
                          int cin, int cout, int T, int k, int B) {
  const int pad = (k - 1) / 2;
  parallel_for(static_cast<std::size_t>(cin), [&](std::size_t ci) {
    double* dxi = dx + ci * static_cast<std::size_t>(T) * B;
    std::memset(dxi, 0, sizeof(double) * static_cast<std::size_t>(T) * B);
    for (int co = 0; co < cout; ++co) {
      const double* dyo = dy + static_cast<std::size_t>(co) * T * B;
      const double* wr = w + (static_cast<std::size_t>(co) * cin + ci) * k;
      for (int kk = 0; kk < k; ++kk) {
        // forward: y[t] += w[kk] * x[t + kk - pad]  =>  dx[u] += w[kk]*dy[u - kk + pad]
        const double wv = wr[kk];
        const int off = kk - pad;
        const int u0 = std::max(0, off);
        const int u1 = std::min(T, T + off);
        const double* ds = dyo + static_cast<std::size_t>(u0 - off) * B;
        double* xs = dxi + static_cast<std::size_t>(u0) * B;
        const std::size_t span = static_cast<std::size_t>(u1 - u0) * B;
#pragma omp simd
        for (std::size_t j = 0; j < span; ++j) xs[j] += wv * ds[j];
      }
    }
  });
}

void conv1d_backward_params(const double* dy, const double* x, double* dw,
                            double* db, int cin, int cout, int T, int k, int B) {
  const int pad = (k - 1) / 2;
  parallel_for(static_cast<std::size_t>(cout), [&](std::size_t co) {
    const double* dyo = dy + co * static_cast<std::size_t>(T) * B;
    double bsum = 0.0;
    for (int j = 0; j < T * B; ++j) bsum += dyo[j];
    db[co] += bsum;
    for (int ci = 0; ci < cin; ++ci) {
      const double* xi = x + static_cast<std::size_t>(ci) * T * B;
      double* wr = dw + (co * cin + ci) * k;
      for (int kk = 0; kk < k; ++kk) {
        const int off = kk - pad;
        const int t0 = std::max(0, -off);
        const int t1 = std::min(T, T - off);
        const double* xs = xi + static_cast<std::size_t>(t0 + off) * B;
        const double* ds = dyo + static_cast<std::size_t>(t0) * B;
        double acc = 0.0;
        const std::size_t span = static_cast<std::size_t>(t1 - t0) * B;
#pragma omp simd reduction(+ : acc)
        for (std::size_t j = 0; j < span; ++j) acc += ds[j] * xs[j];
        wr[kk] += acc;
      }
    }
  });
}

void avgpool_forward(const double* x, double* y, int C, int T, int B) {
  const int To = T / 2;
  parallel_for(static_cast<std::size_t>(C), [&](std::size_t c) {
    const double* xi = x + c * static_cast<std::size_t>(T) * B;
    double* yo = y + c * static_cast<std::size_t>(To) * B;
    for (int t = 0; t < To; ++t)
      for (int b = 0; b < B; ++b)
        yo[static_cast<std::size_t>(t) * B + b] =
            0.5 * (xi[static_cast<std::size_t>(2 * t) * B + b] +
                   xi[static_cast<std::size_t>(2 * t + 1) * B + b]);
  });
}

void avgpool_backward(const double* dy, double* dx, int C, int T, int B) {
  const int To = T / 2;
  parallel_for(static_cast<std::size_t>(C), [&](std::size_t c) {
    double* dxi = dx + c * static_cast<std::size_t>(T) * B;
    const double* dyo = dy + c * static_cast<std::size_t>(To) * B;
    std::memset(dxi, 0, sizeof(double) * static_cast<std::size_t>(T) * B);
    for (int t = 0; t < To; ++t)
      for (int b = 0; b < B; ++b) {
        const double g = 0.5 * dyo[static_cast<std::size_t>(t) * B + b];
        dxi[static_cast<std::size_t>(2 * t) * B + b] = g;
        dxi[static_cast<std::size_t>(2 * t + 1) * B + b] = g;
      }
  });
}

void maxpool_forward(const double* x, double* y, unsigned char* argmax, int C,
                     int T, int B) {
  const int To = T / 2;
  parallel_for(static_cast<std::size_t>(C), [&](std::size_t c) {
    const double* xi = x + c * static_cast<std::size_t>(T) * B;
    double* yo = y + c * static_cast<std::size_t>(To) * B;
    unsigned char* am = argmax + c * static_cast<std::size_t>(To) * B;
    for (int t = 0; t < To; ++t)
      for (int b = 0; b < B; ++b) {
        const double a = xi[static_cast<std::size_t>(2 * t) * B + b];
        const double v = xi[static_cast<std::size_t>(2 * t + 1) * B + b];
        const bool second = v > a;  // ties keep the first element
        yo[static_cast<std::size_t>(t) * B + b] = second ? v : a;
        am[static_cast<std::size_t>(t) * B + b] = second ? 1 : 0;
      }
  });
}

void maxpool_backward(const double* dy, const unsigned char* argmax,
                      double* dx, int C, int T, int B) {
  const int To = T / 2;
  parallel_for(static_cast<std::size_t>(C), [&](std::size_t c) {
    double* dxi = dx + c * static_cast<std::size_t>(T) * B;
    const double* dyo = dy + c * static_cast<std::size_t>(To) * B;
    const unsigned char* am = argmax + c * static_cast<std::size_t>(To) * B;
    std::memset(dxi, 0, sizeof(double) * static_cast<std::size_t>(T) * B);
    for (int t = 0; t < To; ++t)
      for (int b = 0; b < B; ++b)
        dxi[static_cast<std::size_t>(2 * t + am[static_cast<std::size_t>(t) * B + b]) * B + b] =
            dyo[static_cast<std::size_t>(t) * B + b];
  });
}

void relu_forward(const double* x, double* y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* dy, const double* y, double* dx,
                   std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) dx[i] = y[i] > 0.0 ? dy[i] : 0.0;
}

}  // namespace surf::kernels
