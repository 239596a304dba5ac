#pragma once

#include <cstddef>

// Naive serial mirrors of surf::kernels, written as directly as possible from
// the operation definitions. They are the correctness oracle for the
// optimized kernels (tests compare the two on randomized shapes) and the
// baseline side of the surf_bench comparison. Keep these boring.
namespace surf::ref {

void vec_exp(const double* x, double* y, std::size_t n);
void vec_sigmoid(const double* x, double* y, std::size_t n);
void vec_tanh(const double* x, double* y, std::size_t n);

void gemm_nb(const double* A, const double* X, const double* bias, double* C,
             int M, int K, int B);
void accum_outer_bl(const double* G, const double* Xl, double* dW, int M,
                    int K, int B);

void conv1d_forward(const double* x, const double* w, const double* bias,
                    double* y, int cin, int cout, int T, int k, int B);
void conv1d_backward_data(const double* dy, const double* w, double* dx,
                          int cin, int cout, int T, int k, int B);
void conv1d_backward_params(const double* dy, const double* x, double* dw,
                            double* db, int cin, int cout, int T, int k, int B);

void avgpool_forward(const double* x, double* y, int C, int T, int B);
void maxpool_forward(const double* x, double* y, unsigned char* argmax, int C,
                     int T, int B);

void relu_forward(const double* x, double* y, std::size_t n);

// One LSTM time step for a single example (no batching): gate order i,f,g,o,
// fused weights wu[4H][cin+H], biases b[4H]. Inputs h,c are updated in place.
void lstm_step(const double* x, double* h, double* c, const double* wu,
               const double* b, int cin, int hidden);

}  // namespace surf::ref
