#pragma once

#include <cstddef>
#include <string>

namespace stdgan::kern {

// Arithmetic inner loops exist in two equivalent variants: a scalar reference
// and an AVX2+FMA one. The active variant is picked once at startup from
// cpuid, overridable with STDGAN_KERNEL=scalar|avx2 or force_backend() (used
// by the equivalence tests). Within one process the selection is stable, so
// repeated runs are bit-identical.
enum class Backend { scalar, avx2 };

Backend active_backend();
void force_backend(Backend b);
bool cpu_supports_avx2();
std::string backend_name(Backend b);

// Row-major GEMM family. Accumulation over k runs in a fixed sequential
// order for every output element, so results do not depend on the worker
// count. When `acc` is false, C is overwritten.
//
//   gemm_nn: C(M,N) (+)= A(M,K) * B(K,N)
//   gemm_tn: C(M,N) (+)= A(K,M)^T * B(K,N)
//   gemm_nt: C(M,N) (+)= A(M,K) * B(N,K)^T
template <typename T>
void gemm_nn(const T* A, const T* B, T* C, int M, int K, int N, bool acc);
template <typename T>
void gemm_tn(const T* A, const T* B, T* C, int M, int K, int N, bool acc);
template <typename T>
void gemm_nt(const T* A, const T* B, T* C, int M, int K, int N, bool acc);

// Elementwise.
template <typename T> void vaxpy(T a, const T* x, T* y, size_t n);      // y += a*x
template <typename T> void vscale(T a, T* x, size_t n);                 // x *= a
template <typename T> void vadd(const T* a, const T* b, T* y, size_t n);
template <typename T> void vsub(const T* a, const T* b, T* y, size_t n);
template <typename T> void relu_fwd(const T* x, T* y, size_t n);
template <typename T> void lrelu_fwd(T slope, const T* x, T* y, size_t n);
// gx += gy where x > 0, gx += slope*gy otherwise (slope = 0 for plain relu)
template <typename T> void lrelu_bwd(T slope, const T* x, const T* gy, T* gx, size_t n);
template <typename T> void sigmoid_fwd(const T* x, T* y, size_t n);
// gx += gy * y * (1 - y)
template <typename T> void sigmoid_bwd(const T* y, const T* gy, T* gx, size_t n);

// Reductions.
template <typename T> T vsum(const T* x, size_t n);
template <typename T> T vdot(const T* a, const T* b, size_t n);
template <typename T> T vsumsq(const T* x, size_t n);
template <typename T> T l1_sum(const T* a, const T* b, size_t n);       // sum |a-b|
template <typename T> T sq_err_sum(const T* x, T c, size_t n);          // sum (x-c)^2

// Channel-wise affine used by instance norm / AdaIN:
//   y[i] = (x[i] - mu) * inv_sigma * g + b   over one channel plane.
template <typename T>
void norm_affine(const T* x, T* y, size_t n, T mu, T inv_sigma, T g, T b);

// Fused Adam step with bias correction already folded into lr_t:
//   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2;  p -= lr_t * m / (sqrt(v) + eps)
template <typename T>
void adam_step(T* p, const T* g, T* m, T* v, size_t n, T lr_t, T b1, T b2, T eps);

} // namespace stdgan::kern
