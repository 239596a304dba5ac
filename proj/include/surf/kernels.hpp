#pragma once

#include <cstddef>

// Optimized data-parallel primitives used by the trainer and predictors.
// Batched activations use the lane-interleaved layout v[(c*T + t)*B + b]
// (B = mini-batch lanes, contiguous) so the innermost loops vectorize.
// A naive serial mirror of every routine lives in ref/reference.hpp and the
// two are compared in tests and in the surf_bench target.
namespace surf::kernels {

// Elementwise transcendentals. Safe to call in place (y == x).
// vec_exp: max relative error ~3e-16 over [-700, 700], clamped outside.
void vec_exp(const double* x, double* y, std::size_t n);
void vec_sigmoid(const double* x, double* y, std::size_t n);
void vec_tanh(const double* x, double* y, std::size_t n);

// C(M,B) = A(M,K) * X(K,B) + bias[m] (bias may be null). Row-major.
void gemm_nb(const double* A, const double* X, const double* bias, double* C,
             int M, int K, int B);

// dW(M,K) += sum_b G[m*B + b] * Xl[b*K + k]; Xl is lane-major (B rows of K).
void accum_outer_bl(const double* G, const double* Xl, double* dW, int M,
                    int K, int B);

// At(K,M) = transpose of A(M,K).
void transpose(const double* A, double* At, int M, int K);

// Batched 1-D convolution, odd kernel k, zero "same" padding.
// w layout: w[(co*cin + ci)*k + kk]; y[(co*T + t)*B + b].
void conv1d_forward(const double* x, const double* w, const double* bias,
                    double* y, int cin, int cout, int T, int k, int B);
// dx is overwritten.
void conv1d_backward_data(const double* dy, const double* w, double* dx,
                          int cin, int cout, int T, int k, int B);
// dw and db are accumulated into (caller zeroes once per batch).
void conv1d_backward_params(const double* dy, const double* x, double* dw,
                            double* db, int cin, int cout, int T, int k, int B);

// Pooling with kernel 2, stride 2; output time length T/2 (T >= 2).
void avgpool_forward(const double* x, double* y, int C, int T, int B);
void avgpool_backward(const double* dy, double* dx, int C, int T, int B);
// argmax holds 0/1 per output element (first-wins ties).
void maxpool_forward(const double* x, double* y, unsigned char* argmax, int C,
                     int T, int B);
void maxpool_backward(const double* dy, const unsigned char* argmax,
                      double* dx, int C, int T, int B);

void relu_forward(const double* x, double* y, std::size_t n);
// Mask from the forward output: dx = dy where y > 0 else 0.
void relu_backward(const double* dy, const double* y, double* dx,
                   std::size_t n);

}  // namespace surf::kernels
