#include "kernels_internal.hpp"

#ifdef STDGAN_HAVE_AVX2_BACKEND

#include <cmath>
#include <immintrin.h>

// AVX2+FMA variants. This translation unit is the only one built with
// -mavx2 -mfma; nothing here runs unless the dispatcher selected it.
//
// gemm_nn / gemm_tn keep the per-element k accumulation order identical to
// the scalar kernels (broadcast A, FMA across columns). gemm_nt and the
// reductions accumulate in lane-strided order, which is still fixed for a
// given backend.

namespace stdgan::kern::detail::avx2 {

namespace {

inline float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    lo = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, lo);
    lo = _mm_add_ss(lo, sh);
    return _mm_cvtss_f32(lo);
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    lo = _mm_add_sd(lo, sh);
    return _mm_cvtsd_f64(lo);
}

const __m256 kAbsMaskPs = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
const __m256d kAbsMaskPd = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));

// One C row, 16 columns at a time, k innermost.
inline void gemm_row_f(const float* arow, const float* B, float* crow,
                       int K, int N, bool acc, int n0, int n1,
                       bool a_strided, int a_stride) {
    int j = n0;
    for (; j + 16 <= n1; j += 16) {
        __m256 c0, c1;
        if (acc) {
            c0 = _mm256_loadu_ps(crow + j);
            c1 = _mm256_loadu_ps(crow + j + 8);
        } else {
            c0 = _mm256_setzero_ps();
            c1 = _mm256_setzero_ps();
        }
        for (int k = 0; k < K; ++k) {
            const float av = a_strided ? arow[static_cast<size_t>(k) * a_stride] : arow[k];
            const __m256 a = _mm256_set1_ps(av);
            const float* brow = B + static_cast<size_t>(k) * N + j;
            c0 = _mm256_fmadd_ps(a, _mm256_loadu_ps(brow), c0);
            c1 = _mm256_fmadd_ps(a, _mm256_loadu_ps(brow + 8), c1);
        }
        _mm256_storeu_ps(crow + j, c0);
        _mm256_storeu_ps(crow + j + 8, c1);
    }
    for (; j + 8 <= n1; j += 8) {
        __m256 c0 = acc ? _mm256_loadu_ps(crow + j) : _mm256_setzero_ps();
        for (int k = 0; k < K; ++k) {
            const float av = a_strided ? arow[static_cast<size_t>(k) * a_stride] : arow[k];
            c0 = _mm256_fmadd_ps(_mm256_set1_ps(av),
                                 _mm256_loadu_ps(B + static_cast<size_t>(k) * N + j), c0);
        }
        _mm256_storeu_ps(crow + j, c0);
    }
    for (; j < n1; ++j) {
        float s = acc ? crow[j] : 0.0f;
        for (int k = 0; k < K; ++k) {
            const float av = a_strided ? arow[static_cast<size_t>(k) * a_stride] : arow[k];
            s = std::fma(av, B[static_cast<size_t>(k) * N + j], s);
        }
        crow[j] = s;
    }
}

// Four C rows at once; better B reuse.
inline void gemm_row4_f(const float* a0, const float* a1, const float* a2, const float* a3,
                        const float* B, float* c0r, float* c1r, float* c2r, float* c3r,
                        int K, int N, bool acc, int n0, int n1,
                        bool a_strided, int a_stride) {
    int j = n0;
    for (; j + 16 <= n1; j += 16) {
        __m256 acc00, acc01, acc10, acc11, acc20, acc21, acc30, acc31;
        if (acc) {
            acc00 = _mm256_loadu_ps(c0r + j);
            acc01 = _mm256_loadu_ps(c0r + j + 8);
            acc10 = _mm256_loadu_ps(c1r + j);
            acc11 = _mm256_loadu_ps(c1r + j + 8);
            acc20 = _mm256_loadu_ps(c2r + j);
            acc21 = _mm256_loadu_ps(c2r + j + 8);
            acc30 = _mm256_loadu_ps(c3r + j);
            acc31 = _mm256_loadu_ps(c3r + j + 8);
        } else {
            acc00 = acc01 = acc10 = acc11 = _mm256_setzero_ps();
            acc20 = acc21 = acc30 = acc31 = _mm256_setzero_ps();
        }
        for (int k = 0; k < K; ++k) {
            const size_t ak = a_strided ? static_cast<size_t>(k) * a_stride : static_cast<size_t>(k);
            const float* brow = B + static_cast<size_t>(k) * N + j;
            const __m256 b0 = _mm256_loadu_ps(brow);
            const __m256 b1 = _mm256_loadu_ps(brow + 8);
            __m256 a = _mm256_set1_ps(a0[ak]);
            acc00 = _mm256_fmadd_ps(a, b0, acc00);
            acc01 = _mm256_fmadd_ps(a, b1, acc01);
            a = _mm256_set1_ps(a1[ak]);
            acc10 = _mm256_fmadd_ps(a, b0, acc10);
            acc11 = _mm256_fmadd_ps(a, b1, acc11);
            a = _mm256_set1_ps(a2[ak]);
            acc20 = _mm256_fmadd_ps(a, b0, acc20);
            acc21 = _mm256_fmadd_ps(a, b1, acc21);
            a = _mm256_set1_ps(a3[ak]);
            acc30 = _mm256_fmadd_ps(a, b0, acc30);
            acc31 = _mm256_fmadd_ps(a, b1, acc31);
        }
        _mm256_storeu_ps(c0r + j, acc00);
        _mm256_storeu_ps(c0r + j + 8, acc01);
        _mm256_storeu_ps(c1r + j, acc10);
        _mm256_storeu_ps(c1r + j + 8, acc11);
        _mm256_storeu_ps(c2r + j, acc20);
        _mm256_storeu_ps(c2r + j + 8, acc21);
        _mm256_storeu_ps(c3r + j, acc30);
        _mm256_storeu_ps(c3r + j + 8, acc31);
    }
    if (j < n1) {
        gemm_row_f(a0, B, c0r, K, N, acc, j, n1, a_strided, a_stride);
        gemm_row_f(a1, B, c1r, K, N, acc, j, n1, a_strided, a_stride);
        gemm_row_f(a2, B, c2r, K, N, acc, j, n1, a_strided, a_stride);
        gemm_row_f(a3, B, c3r, K, N, acc, j, n1, a_strided, a_stride);
    }
}

inline void gemm_row_d(const double* arow, const double* B, double* crow,
                       int K, int N, bool acc, int n0, int n1,
                       bool a_strided, int a_stride) {
    int j = n0;
    for (; j + 8 <= n1; j += 8) {
        __m256d c0, c1;
        if (acc) {
            c0 = _mm256_loadu_pd(crow + j);
            c1 = _mm256_loadu_pd(crow + j + 4);
        } else {
            c0 = _mm256_setzero_pd();
            c1 = _mm256_setzero_pd();
        }
        for (int k = 0; k < K; ++k) {
            const double av = a_strided ? arow[static_cast<size_t>(k) * a_stride] : arow[k];
            const __m256d a = _mm256_set1_pd(av);
            const double* brow = B + static_cast<size_t>(k) * N + j;
            c0 = _mm256_fmadd_pd(a, _mm256_loadu_pd(brow), c0);
            c1 = _mm256_fmadd_pd(a, _mm256_loadu_pd(brow + 4), c1);
        }
        _mm256_storeu_pd(crow + j, c0);
        _mm256_storeu_pd(crow + j + 4, c1);
    }
    for (; j < n1; ++j) {
        double s = acc ? crow[j] : 0.0;
        for (int k = 0; k < K; ++k) {
            const double av = a_strided ? arow[static_cast<size_t>(k) * a_stride] : arow[k];
            s = std::fma(av, B[static_cast<size_t>(k) * N + j], s);
        }
        crow[j] = s;
    }
}

} // namespace

template <>
void gemm_nn<float>(const float* A, const float* B, float* C, int M, int K, int N,
                    bool acc, int m0, int m1, int n0, int n1) {
    int i = m0;
    for (; i + 4 <= m1; i += 4) {
        gemm_row4_f(A + static_cast<size_t>(i) * K, A + static_cast<size_t>(i + 1) * K,
                    A + static_cast<size_t>(i + 2) * K, A + static_cast<size_t>(i + 3) * K, B,
                    C + static_cast<size_t>(i) * N, C + static_cast<size_t>(i + 1) * N,
                    C + static_cast<size_t>(i + 2) * N, C + static_cast<size_t>(i + 3) * N,
                    K, N, acc, n0, n1, false, 0);
    }
    for (; i < m1; ++i)
        gemm_row_f(A + static_cast<size_t>(i) * K, B, C + static_cast<size_t>(i) * N,
                   K, N, acc, n0, n1, false, 0);
}

template <>
void gemm_nn<double>(const double* A, const double* B, double* C, int M, int K, int N,
                     bool acc, int m0, int m1, int n0, int n1) {
    for (int i = m0; i < m1; ++i)
        gemm_row_d(A + static_cast<size_t>(i) * K, B, C + static_cast<size_t>(i) * N,
                   K, N, acc, n0, n1, false, 0);
}

template <>
void gemm_tn<float>(const float* A, const float* B, float* C, int M, int K, int N,
                    bool acc, int m0, int m1, int n0, int n1) {
    int i = m0;
    for (; i + 4 <= m1; i += 4) {
        gemm_row4_f(A + i, A + i + 1, A + i + 2, A + i + 3, B,
                    C + static_cast<size_t>(i) * N, C + static_cast<size_t>(i + 1) * N,
                    C + static_cast<size_t>(i + 2) * N, C + static_cast<size_t>(i + 3) * N,
                    K, N, acc, n0, n1, true, M);
    }
    for (; i < m1; ++i)
        gemm_row_f(A + i, B, C + static_cast<size_t>(i) * N, K, N, acc, n0, n1, true, M);
}

template <>
void gemm_tn<double>(const double* A, const double* B, double* C, int M, int K, int N,
                     bool acc, int m0, int m1, int n0, int n1) {
    for (int i = m0; i < m1; ++i)
        gemm_row_d(A + i, B, C + static_cast<size_t>(i) * N, K, N, acc, n0, n1, true, M);
}

template <>
void gemm_nt<float>(const float* A, const float* B, float* C, int M, int K, int N,
                    bool acc, int m0, int m1, int n0, int n1) {
    for (int i = m0; i < m1; ++i) {
        const float* arow = A + static_cast<size_t>(i) * K;
        float* crow = C + static_cast<size_t>(i) * N;
        int j = n0;
        for (; j + 4 <= n1; j += 4) {
            const float* b0 = B + static_cast<size_t>(j) * K;
            const float* b1 = B + static_cast<size_t>(j + 1) * K;
            const float* b2 = B + static_cast<size_t>(j + 2) * K;
            const float* b3 = B + static_cast<size_t>(j + 3) * K;
            __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
            __m256 s2 = _mm256_setzero_ps(), s3 = _mm256_setzero_ps();
            int k = 0;
            for (; k + 8 <= K; k += 8) {
                const __m256 a = _mm256_loadu_ps(arow + k);
                s0 = _mm256_fmadd_ps(a, _mm256_loadu_ps(b0 + k), s0);
                s1 = _mm256_fmadd_ps(a, _mm256_loadu_ps(b1 + k), s1);
                s2 = _mm256_fmadd_ps(a, _mm256_loadu_ps(b2 + k), s2);
                s3 = _mm256_fmadd_ps(a, _mm256_loadu_ps(b3 + k), s3);
            }
            float r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
            for (; k < K; ++k) {
                const float a = arow[k];
                r0 = std::fma(a, b0[k], r0);
                r1 = std::fma(a, b1[k], r1);
                r2 = std::fma(a, b2[k], r2);
                r3 = std::fma(a, b3[k], r3);
            }
            if (acc) {
                crow[j] += r0;
                crow[j + 1] += r1;
                crow[j + 2] += r2;
                crow[j + 3] += r3;
            } else {
                crow[j] = r0;
                crow[j + 1] = r1;
                crow[j + 2] = r2;
                crow[j + 3] = r3;
            }
        }
        for (; j < n1; ++j) {
            const float* brow = B + static_cast<size_t>(j) * K;
            __m256 s = _mm256_setzero_ps();
            int k = 0;
            for (; k + 8 <= K; k += 8)
                s = _mm256_fmadd_ps(_mm256_loadu_ps(arow + k), _mm256_loadu_ps(brow + k), s);
            float r = hsum(s);
            for (; k < K; ++k) r = std::fma(arow[k], brow[k], r);
            crow[j] = acc ? crow[j] + r : r;
        }
    }
}

template <>
void gemm_nt<double>(const double* A, const double* B, double* C, int M, int K, int N,
                     bool acc, int m0, int m1, int n0, int n1) {
    for (int i = m0; i < m1; ++i) {
        const double* arow = A + static_cast<size_t>(i) * K;
        double* crow = C + static_cast<size_t>(i) * N;
        for (int j = n0; j < n1; ++j) {
            const double* brow = B + static_cast<size_t>(j) * K;
            __m256d s = _mm256_setzero_pd();
            int k = 0;
            for (; k + 4 <= K; k += 4)
                s = _mm256_fmadd_pd(_mm256_loadu_pd(arow + k), _mm256_loadu_pd(brow + k), s);
            double r = hsum(s);
            for (; k < K; ++k) r = std::fma(arow[k], brow[k], r);
            crow[j] = acc ? crow[j] + r : r;
        }
    }
}

template <>
void vaxpy<float>(float a, const float* x, float* y, size_t n) {
    const __m256 av = _mm256_set1_ps(a);
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

template <>
void vaxpy<double>(double a, const double* x, double* y, size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

template <>
void vscale<float>(float a, float* x, size_t n) {
    const __m256 av = _mm256_set1_ps(a);
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(x + i, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

template <>
void vscale<double>(double a, double* x, size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

template <>
void vadd<float>(const float* a, const float* b, float* y, size_t n) {
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i) y[i] = a[i] + b[i];
}

template <>
void vadd<double>(const double* a, const double* b, double* y, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) y[i] = a[i] + b[i];
}

template <>
void vsub<float>(const float* a, const float* b, float* y, size_t n) {
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i) y[i] = a[i] - b[i];
}

template <>
void vsub<double>(const double* a, const double* b, double* y, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) y[i] = a[i] - b[i];
}

template <>
void relu_fwd<float>(const float* x, float* y, size_t n) {
    const __m256 z = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_max_ps(z, _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

template <>
void relu_fwd<double>(const double* x, double* y, size_t n) {
    const __m256d z = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_max_pd(z, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

template <>
void lrelu_fwd<float>(float slope, const float* x, float* y, size_t n) {
    const __m256 sl = _mm256_set1_ps(slope);
    const __m256 z = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 v = _mm256_loadu_ps(x + i);
        const __m256 neg = _mm256_mul_ps(sl, v);
        _mm256_storeu_ps(y + i, _mm256_blendv_ps(neg, v, _mm256_cmp_ps(v, z, _CMP_GT_OQ)));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : slope * x[i];
}

template <>
void lrelu_fwd<double>(double slope, const double* x, double* y, size_t n) {
    const __m256d sl = _mm256_set1_pd(slope);
    const __m256d z = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d neg = _mm256_mul_pd(sl, v);
        _mm256_storeu_pd(y + i, _mm256_blendv_pd(neg, v, _mm256_cmp_pd(v, z, _CMP_GT_OQ)));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

template <>
void lrelu_bwd<float>(float slope, const float* x, const float* gy, float* gx, size_t n) {
    const __m256 sl = _mm256_set1_ps(slope);
    const __m256 z = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 xv = _mm256_loadu_ps(x + i);
        const __m256 gv = _mm256_loadu_ps(gy + i);
        const __m256 g = _mm256_blendv_ps(_mm256_mul_ps(sl, gv), gv, _mm256_cmp_ps(xv, z, _CMP_GT_OQ));
        _mm256_storeu_ps(gx + i, _mm256_add_ps(_mm256_loadu_ps(gx + i), g));
    }
    for (; i < n; ++i) gx[i] += x[i] > 0.0f ? gy[i] : slope * gy[i];
}

template <>
void lrelu_bwd<double>(double slope, const double* x, const double* gy, double* gx, size_t n) {
    const __m256d sl = _mm256_set1_pd(slope);
    const __m256d z = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d gv = _mm256_loadu_pd(gy + i);
        const __m256d g = _mm256_blendv_pd(_mm256_mul_pd(sl, gv), gv, _mm256_cmp_pd(xv, z, _CMP_GT_OQ));
        _mm256_storeu_pd(gx + i, _mm256_add_pd(_mm256_loadu_pd(gx + i), g));
    }
    for (; i < n; ++i) gx[i] += x[i] > 0.0 ? gy[i] : slope * gy[i];
}

// exp() stays scalar; the sigmoid sits on low-volume paths (decoder output,
// discriminator heads), not worth a vector exp.
template <>
void sigmoid_fwd<float>(const float* x, float* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
}

template <>
void sigmoid_fwd<double>(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

template <>
void sigmoid_bwd<float>(const float* y, const float* gy, float* gx, size_t n) {
    const __m256 one = _mm256_set1_ps(1.0f);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 yv = _mm256_loadu_ps(y + i);
        const __m256 d = _mm256_mul_ps(_mm256_loadu_ps(gy + i), _mm256_mul_ps(yv, _mm256_sub_ps(one, yv)));
        _mm256_storeu_ps(gx + i, _mm256_add_ps(_mm256_loadu_ps(gx + i), d));
    }
    for (; i < n; ++i) gx[i] += gy[i] * y[i] * (1.0f - y[i]);
}

template <>
void sigmoid_bwd<double>(const double* y, const double* gy, double* gx, size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d yv = _mm256_loadu_pd(y + i);
        const __m256d d = _mm256_mul_pd(_mm256_loadu_pd(gy + i), _mm256_mul_pd(yv, _mm256_sub_pd(one, yv)));
        _mm256_storeu_pd(gx + i, _mm256_add_pd(_mm256_loadu_pd(gx + i), d));
    }
    for (; i < n; ++i) gx[i] += gy[i] * y[i] * (1.0 - y[i]);
}

template <>
float vsum<float>(const float* x, size_t n) {
    __m256 s = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) s = _mm256_add_ps(s, _mm256_loadu_ps(x + i));
    float r = hsum(s);
    for (; i < n; ++i) r += x[i];
    return r;
}

template <>
double vsum<double>(const double* x, size_t n) {
    __m256d s = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) s = _mm256_add_pd(s, _mm256_loadu_pd(x + i));
    double r = hsum(s);
    for (; i < n; ++i) r += x[i];
    return r;
}

template <>
float vdot<float>(const float* a, const float* b, size_t n) {
    __m256 s = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        s = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), s);
    float r = hsum(s);
    for (; i < n; ++i) r += a[i] * b[i];
    return r;
}

template <>
double vdot<double>(const double* a, const double* b, size_t n) {
    __m256d s = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        s = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s);
    double r = hsum(s);
    for (; i < n; ++i) r += a[i] * b[i];
    return r;
}

template <>
float vsumsq<float>(const float* x, size_t n) {
    return vdot<float>(x, x, n);
}

template <>
double vsumsq<double>(const double* x, size_t n) {
    return vdot<double>(x, x, n);
}

template <>
float l1_sum<float>(const float* a, const float* b, size_t n) {
    __m256 s = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
        s = _mm256_add_ps(s, _mm256_and_ps(d, kAbsMaskPs));
    }
    float r = hsum(s);
    for (; i < n; ++i) r += std::abs(a[i] - b[i]);
    return r;
}

template <>
double l1_sum<double>(const double* a, const double* b, size_t n) {
    __m256d s = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        s = _mm256_add_pd(s, _mm256_and_pd(d, kAbsMaskPd));
    }
    double r = hsum(s);
    for (; i < n; ++i) r += std::abs(a[i] - b[i]);
    return r;
}

template <>
float sq_err_sum<float>(const float* x, float c, size_t n) {
    const __m256 cv = _mm256_set1_ps(c);
    __m256 s = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(x + i), cv);
        s = _mm256_fmadd_ps(d, d, s);
    }
    float r = hsum(s);
    for (; i < n; ++i) {
        const float d = x[i] - c;
        r += d * d;
    }
    return r;
}

template <>
double sq_err_sum<double>(const double* x, double c, size_t n) {
    const __m256d cv = _mm256_set1_pd(c);
    __m256d s = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), cv);
        s = _mm256_fmadd_pd(d, d, s);
    }
    double r = hsum(s);
    for (; i < n; ++i) {
        const double d = x[i] - c;
        r += d * d;
    }
    return r;
}

template <>
void norm_affine<float>(const float* x, float* y, size_t n, float mu, float inv_sigma,
                        float g, float b) {
    const float scale = g * inv_sigma;
    const float shift = b - mu * scale;
    const __m256 sv = _mm256_set1_ps(scale);
    const __m256 hv = _mm256_set1_ps(shift);
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(_mm256_loadu_ps(x + i), sv, hv));
    for (; i < n; ++i) y[i] = x[i] * scale + shift;
}

template <>
void norm_affine<double>(const double* x, double* y, size_t n, double mu, double inv_sigma,
                         double g, double b) {
    const double scale = g * inv_sigma;
    const double shift = b - mu * scale;
    const __m256d sv = _mm256_set1_pd(scale);
    const __m256d hv = _mm256_set1_pd(shift);
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(_mm256_loadu_pd(x + i), sv, hv));
    for (; i < n; ++i) y[i] = x[i] * scale + shift;
}

template <>
void adam_step<float>(float* p, const float* g, float* m, float* v, size_t n,
                      float lr_t, float b1, float b2, float eps) {
    const __m256 b1v = _mm256_set1_ps(b1);
    const __m256 b1c = _mm256_set1_ps(1.0f - b1);
    const __m256 b2v = _mm256_set1_ps(b2);
    const __m256 b2c = _mm256_set1_ps(1.0f - b2);
    const __m256 lrv = _mm256_set1_ps(lr_t);
    const __m256 epsv = _mm256_set1_ps(eps);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 gv = _mm256_loadu_ps(g + i);
        __m256 mv = _mm256_fmadd_ps(b1c, gv, _mm256_mul_ps(b1v, _mm256_loadu_ps(m + i)));
        __m256 vv = _mm256_fmadd_ps(b2c, _mm256_mul_ps(gv, gv), _mm256_mul_ps(b2v, _mm256_loadu_ps(v + i)));
        _mm256_storeu_ps(m + i, mv);
        _mm256_storeu_ps(v + i, vv);
        const __m256 upd = _mm256_div_ps(_mm256_mul_ps(lrv, mv),
                                         _mm256_add_ps(_mm256_sqrt_ps(vv), epsv));
        _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0f - b1) * g[i];
        v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
        p[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps);
    }
}

template <>
void adam_step<double>(double* p, const double* g, double* m, double* v, size_t n,
                       double lr_t, double b1, double b2, double eps) {
    for (size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        p[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps);
    }
}

} // namespace stdgan::kern::detail::avx2

#endif // STDGAN_HAVE_AVX2_BACKEND
