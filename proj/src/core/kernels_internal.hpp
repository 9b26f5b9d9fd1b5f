#pragma once

#include <cstddef>

// Backend entry points. GEMM kernels compute the C[m0:m1, n0:n1] block;
// elementwise/reduction kernels take pre-sliced pointers. Every backend must
// accumulate over k in increasing order per output element (the dispatch
// layer relies on this for run-to-run determinism).

namespace stdgan::kern::detail {

namespace scalar {

template <typename T>
void gemm_nn(const T* A, const T* B, T* C, int M, int K, int N, bool acc,
             int m0, int m1, int n0, int n1);
template <typename T>
void gemm_tn(const T* A, const T* B, T* C, int M, int K, int N, bool acc,
             int m0, int m1, int n0, int n1);
template <typename T>
void gemm_nt(const T* A, const T* B, T* C, int M, int K, int N, bool acc,
             int m0, int m1, int n0, int n1);

template <typename T> void vaxpy(T a, const T* x, T* y, size_t n);
template <typename T> void vscale(T a, T* x, size_t n);
template <typename T> void vadd(const T* a, const T* b, T* y, size_t n);
template <typename T> void vsub(const T* a, const T* b, T* y, size_t n);
template <typename T> void relu_fwd(const T* x, T* y, size_t n);
template <typename T> void lrelu_fwd(T slope, const T* x, T* y, size_t n);
template <typename T> void lrelu_bwd(T slope, const T* x, const T* gy, T* gx, size_t n);
template <typename T> void sigmoid_fwd(const T* x, T* y, size_t n);
template <typename T> void sigmoid_bwd(const T* y, const T* gy, T* gx, size_t n);

template <typename T> T vsum(const T* x, size_t n);
template <typename T> T vdot(const T* a, const T* b, size_t n);
template <typename T> T vsumsq(const T* x, size_t n);
template <typename T> T l1_sum(const T* a, const T* b, size_t n);
template <typename T> T sq_err_sum(const T* x, T c, size_t n);

template <typename T>
void norm_affine(const T* x, T* y, size_t n, T mu, T inv_sigma, T g, T b);
template <typename T>
void adam_step(T* p, const T* g, T* m, T* v, size_t n, T lr_t, T b1, T b2, T eps);

} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define STDGAN_HAVE_AVX2_BACKEND 1

namespace avx2 {

template <typename T>
void gemm_nn(const T* A, const T* B, T* C, int M, int K, int N, bool acc,
             int m0, int m1, int n0, int n1);
template <typename T>
void gemm_tn(const T* A, const T* B, T* C, int M, int K, int N, bool acc,
             int m0, int m1, int n0, int n1);
template <typename T>
void gemm_nt(const T* A, const T* B, T* C, int M, int K, int N, bool acc,
             int m0, int m1, int n0, int n1);

template <typename T> void vaxpy(T a, const T* x, T* y, size_t n);
template <typename T> void vscale(T a, T* x, size_t n);
template <typename T> void vadd(const T* a, const T* b, T* y, size_t n);
template <typename T> void vsub(const T* a, const T* b, T* y, size_t n);
template <typename T> void relu_fwd(const T* x, T* y, size_t n);
template <typename T> void lrelu_fwd(T slope, const T* x, T* y, size_t n);
template <typename T> void lrelu_bwd(T slope, const T* x, const T* gy, T* gx, size_t n);
template <typename T> void sigmoid_fwd(const T* x, T* y, size_t n);
template <typename T> void sigmoid_bwd(const T* y, const T* gy, T* gx, size_t n);

template <typename T> T vsum(const T* x, size_t n);
template <typename T> T vdot(const T* a, const T* b, size_t n);
template <typename T> T vsumsq(const T* x, size_t n);
template <typename T> T l1_sum(const T* a, const T* b, size_t n);
template <typename T> T sq_err_sum(const T* x, T c, size_t n);

template <typename T>
void norm_affine(const T* x, T* y, size_t n, T mu, T inv_sigma, T g, T b);
template <typename T>
void adam_step(T* p, const T* g, T* m, T* v, size_t n, T lr_t, T b1, T b2, T eps);

} // namespace avx2

#endif

} // namespace stdgan::kern::detail
