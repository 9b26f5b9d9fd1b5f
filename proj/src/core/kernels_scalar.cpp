#include "kernels_internal.hpp"

#include <cmath>

// Reference kernels. Kept free of manual unrolling so they stay obviously
// correct; the AVX2 variants are checked against these.

namespace stdgan::kern::detail::scalar {

template <typename T>
void gemm_nn(const T* A, const T* B, T* C, int M, int K, int N, bool acc,
             int m0, int m1, int n0, int n1) {
    for (int i = m0; i < m1; ++i) {
        T* crow = C + static_cast<size_t>(i) * N;
        if (!acc)
            for (int j = n0; j < n1; ++j) crow[j] = T(0);
        const T* arow = A + static_cast<size_t>(i) * K;
        for (int k = 0; k < K; ++k) {
            const T a = arow[k];
            const T* brow = B + static_cast<size_t>(k) * N;
            for (int j = n0; j < n1; ++j) crow[j] += a * brow[j];
        }
    }
}

template <typename T>
void gemm_tn(const T* A, const T* B, T* C, int M, int K, int N, bool acc,
             int m0, int m1, int n0, int n1) {
    for (int i = m0; i < m1; ++i) {
        T* crow = C + static_cast<size_t>(i) * N;
        if (!acc)
            for (int j = n0; j < n1; ++j) crow[j] = T(0);
        for (int k = 0; k < K; ++k) {
            const T a = A[static_cast<size_t>(k) * M + i];
            const T* brow = B + static_cast<size_t>(k) * N;
            for (int j = n0; j < n1; ++j) crow[j] += a * brow[j];
        }
    }
}

template <typename T>
void gemm_nt(const T* A, const T* B, T* C, int M, int K, int N, bool acc,
             int m0, int m1, int n0, int n1) {
    for (int i = m0; i < m1; ++i) {
        const T* arow = A + static_cast<size_t>(i) * K;
        T* crow = C + static_cast<size_t>(i) * N;
        for (int j = n0; j < n1; ++j) {
            const T* brow = B + static_cast<size_t>(j) * K;
            T s = T(0);
            for (int k = 0; k < K; ++k) s += arow[k] * brow[k];
            crow[j] = acc ? crow[j] + s : s;
        }
    }
}

template <typename T>
void vaxpy(T a, const T* x, T* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
void vscale(T a, T* x, size_t n) {
    for (size_t i = 0; i < n; ++i) x[i] *= a;
}

template <typename T>
void vadd(const T* a, const T* b, T* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

template <typename T>
void vsub(const T* a, const T* b, T* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}

template <typename T>
void relu_fwd(const T* x, T* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void lrelu_fwd(T slope, const T* x, T* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : slope * x[i];
}

template <typename T>
void lrelu_bwd(T slope, const T* x, const T* gy, T* gx, size_t n) {
    for (size_t i = 0; i < n; ++i) gx[i] += x[i] > T(0) ? gy[i] : slope * gy[i];
}

template <typename T>
void sigmoid_fwd(const T* x, T* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
}

template <typename T>
void sigmoid_bwd(const T* y, const T* gy, T* gx, size_t n) {
    for (size_t i = 0; i < n; ++i) gx[i] += gy[i] * y[i] * (T(1) - y[i]);
}

template <typename T>
T vsum(const T* x, size_t n) {
    T s = T(0);
    for (size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

template <typename T>
T vdot(const T* a, const T* b, size_t n) {
    T s = T(0);
    for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

template <typename T>
T vsumsq(const T* x, size_t n) {
    T s = T(0);
    for (size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

template <typename T>
T l1_sum(const T* a, const T* b, size_t n) {
    T s = T(0);
    for (size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
    return s;
}

template <typename T>
T sq_err_sum(const T* x, T c, size_t n) {
    T s = T(0);
    for (size_t i = 0; i < n; ++i) {
        const T d = x[i] - c;
        s += d * d;
    }
    return s;
}

template <typename T>
void norm_affine(const T* x, T* y, size_t n, T mu, T inv_sigma, T g, T b) {
    const T scale = g * inv_sigma;
    const T shift = b - mu * scale;
    for (size_t i = 0; i < n; ++i) y[i] = x[i] * scale + shift;
}

template <typename T>
void adam_step(T* p, const T* g, T* m, T* v, size_t n, T lr_t, T b1, T b2, T eps) {
    for (size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * g[i];
        v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
        p[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps);
    }
}

#define STDGAN_INSTANTIATE(T)                                                            \
    template void gemm_nn<T>(const T*, const T*, T*, int, int, int, bool, int, int, int, int); \
    template void gemm_tn<T>(const T*, const T*, T*, int, int, int, bool, int, int, int, int); \
    template void gemm_nt<T>(const T*, const T*, T*, int, int, int, bool, int, int, int, int); \
    template void vaxpy<T>(T, const T*, T*, size_t);                                     \
    template void vscale<T>(T, T*, size_t);                                              \
    template void vadd<T>(const T*, const T*, T*, size_t);                               \
    template void vsub<T>(const T*, const T*, T*, size_t);                               \
    template void relu_fwd<T>(const T*, T*, size_t);                                     \
    template void lrelu_fwd<T>(T, const T*, T*, size_t);                                 \
    template void lrelu_bwd<T>(T, const T*, const T*, T*, size_t);                       \
    template void sigmoid_fwd<T>(const T*, T*, size_t);                                  \
    template void sigmoid_bwd<T>(const T*, const T*, T*, size_t);                        \
    template T vsum<T>(const T*, size_t);                                                \
    template T vdot<T>(const T*, const T*, size_t);                                      \
    template T vsumsq<T>(const T*, size_t);                                              \
    template T l1_sum<T>(const T*, const T*, size_t);                                    \
    template T sq_err_sum<T>(const T*, T, size_t);                                       \
    template void norm_affine<T>(const T*, T*, size_t, T, T, T, T);                      \
    template void adam_step<T>(T*, const T*, T*, T*, size_t, T, T, T, T);

STDGAN_INSTANTIATE(float)
STDGAN_INSTANTIATE(double)
#undef STDGAN_INSTANTIATE

} // namespace stdgan::kern::detail::scalar
