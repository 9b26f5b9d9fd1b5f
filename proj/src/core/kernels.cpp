#include "stdgan/core/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "kernels_internal.hpp"
#include "stdgan/core/parallel.hpp"

namespace stdgan::kern {

namespace {

Backend detect() {
    if (const char* s = std::getenv("STDGAN_KERNEL")) {
        if (std::strcmp(s, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(s, "avx2") == 0) {
            if (!cpu_supports_avx2())
                throw std::runtime_error("STDGAN_KERNEL=avx2 but CPU lacks AVX2+FMA");
            return Backend::avx2;
        }
    }
    return cpu_supports_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<int> g_backend{-1};

// Reductions are combined from fixed-size chunk partials in chunk order, so
// the result is independent of the worker count.
constexpr size_t kReduceChunk = 1 << 15;
constexpr size_t kElemGrain = 1 << 14;
constexpr int64_t kGemmFlopCutoff = 1 << 15;

template <typename F>
auto with_backend(F&& f) {
    return f(active_backend());
}

} // namespace

bool cpu_supports_avx2() {
#ifdef STDGAN_HAVE_AVX2_BACKEND
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend active_backend() {
    int b = g_backend.load(std::memory_order_relaxed);
    if (b < 0) {
        b = static_cast<int>(detect());
        g_backend.store(b, std::memory_order_relaxed);
    }
    return static_cast<Backend>(b);
}

void force_backend(Backend b) {
    if (b == Backend::avx2 && !cpu_supports_avx2())
        throw std::runtime_error("cannot force AVX2 backend on this CPU");
    g_backend.store(static_cast<int>(b), std::memory_order_relaxed);
}

std::string backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

namespace {

// Split the bigger C dimension into disjoint blocks; every block kernel sees
// the full k range, so per-element arithmetic never depends on the split.
template <typename T, typename BlockFn>
void run_gemm(BlockFn&& scalar_fn, BlockFn&& avx2_fn,
              const T* A, const T* B, T* C, int M, int K, int N, bool acc) {
    if (M <= 0 || N <= 0) return;
#ifdef STDGAN_HAVE_AVX2_BACKEND
    const auto& fn = active_backend() == Backend::avx2 ? avx2_fn : scalar_fn;
#else
    const auto& fn = scalar_fn;
    (void)avx2_fn;
#endif
    const int64_t flops = static_cast<int64_t>(M) * K * N;
    if (flops < kGemmFlopCutoff || par::max_threads() == 1) {
        fn(A, B, C, M, K, N, acc, 0, M, 0, N);
        return;
    }
    if (M >= N) {
        par::parallel_for(0, M, [&](int64_t b, int64_t e) {
            fn(A, B, C, M, K, N, acc, static_cast<int>(b), static_cast<int>(e), 0, N);
        }, 4);
    } else {
        par::parallel_for(0, N, [&](int64_t b, int64_t e) {
            fn(A, B, C, M, K, N, acc, 0, M, static_cast<int>(b), static_cast<int>(e));
        }, 16);
    }
}

} // namespace

#ifdef STDGAN_HAVE_AVX2_BACKEND
#define STDGAN_PICK(fn) (active_backend() == Backend::avx2 ? detail::avx2::fn : detail::scalar::fn)
#else
#define STDGAN_PICK(fn) (detail::scalar::fn)
#endif

template <typename T>
void gemm_nn(const T* A, const T* B, T* C, int M, int K, int N, bool acc) {
    run_gemm<T>(detail::scalar::gemm_nn<T>,
#ifdef STDGAN_HAVE_AVX2_BACKEND
                detail::avx2::gemm_nn<T>,
#else
                detail::scalar::gemm_nn<T>,
#endif
                A, B, C, M, K, N, acc);
}

template <typename T>
void gemm_tn(const T* A, const T* B, T* C, int M, int K, int N, bool acc) {
    run_gemm<T>(detail::scalar::gemm_tn<T>,
#ifdef STDGAN_HAVE_AVX2_BACKEND
                detail::avx2::gemm_tn<T>,
#else
                detail::scalar::gemm_tn<T>,
#endif
                A, B, C, M, K, N, acc);
}

template <typename T>
void gemm_nt(const T* A, const T* B, T* C, int M, int K, int N, bool acc) {
    run_gemm<T>(detail::scalar::gemm_nt<T>,
#ifdef STDGAN_HAVE_AVX2_BACKEND
                detail::avx2::gemm_nt<T>,
#else
                detail::scalar::gemm_nt<T>,
#endif
                A, B, C, M, K, N, acc);
}

template <typename T>
void vaxpy(T a, const T* x, T* y, size_t n) {
    auto fn = STDGAN_PICK(vaxpy<T>);
    par::parallel_for(0, static_cast<int64_t>(n), [&](int64_t b, int64_t e) {
        fn(a, x + b, y + b, static_cast<size_t>(e - b));
    }, kElemGrain);
}

template <typename T>
void vscale(T a, T* x, size_t n) {
    auto fn = STDGAN_PICK(vscale<T>);
    par::parallel_for(0, static_cast<int64_t>(n), [&](int64_t b, int64_t e) {
        fn(a, x + b, static_cast<size_t>(e - b));
    }, kElemGrain);
}

template <typename T>
void vadd(const T* a, const T* b, T* y, size_t n) {
    auto fn = STDGAN_PICK(vadd<T>);
    par::parallel_for(0, static_cast<int64_t>(n), [&](int64_t lo, int64_t hi) {
        fn(a + lo, b + lo, y + lo, static_cast<size_t>(hi - lo));
    }, kElemGrain);
}

template <typename T>
void vsub(const T* a, const T* b, T* y, size_t n) {
    auto fn = STDGAN_PICK(vsub<T>);
    par::parallel_for(0, static_cast<int64_t>(n), [&](int64_t lo, int64_t hi) {
        fn(a + lo, b + lo, y + lo, static_cast<size_t>(hi - lo));
    }, kElemGrain);
}

template <typename T>
void relu_fwd(const T* x, T* y, size_t n) {
    auto fn = STDGAN_PICK(relu_fwd<T>);
    par::parallel_for(0, static_cast<int64_t>(n), [&](int64_t b, int64_t e) {
        fn(x + b, y + b, static_cast<size_t>(e - b));
    }, kElemGrain);
}

template <typename T>
void lrelu_fwd(T slope, const T* x, T* y, size_t n) {
    auto fn = STDGAN_PICK(lrelu_fwd<T>);
    par::parallel_for(0, static_cast<int64_t>(n), [&](int64_t b, int64_t e) {
        fn(slope, x + b, y + b, static_cast<size_t>(e - b));
    }, kElemGrain);
}

template <typename T>
void lrelu_bwd(T slope, const T* x, const T* gy, T* gx, size_t n) {
    auto fn = STDGAN_PICK(lrelu_bwd<T>);
    par::parallel_for(0, static_cast<int64_t>(n), [&](int64_t b, int64_t e) {
        fn(slope, x + b, gy + b, gx + b, static_cast<size_t>(e - b));
    }, kElemGrain);
}

template <typename T>
void sigmoid_fwd(const T* x, T* y, size_t n) {
    STDGAN_PICK(sigmoid_fwd<T>)(x, y, n);
}

template <typename T>
void sigmoid_bwd(const T* y, const T* gy, T* gx, size_t n) {
    STDGAN_PICK(sigmoid_bwd<T>)(y, gy, gx, n);
}

namespace {

template <typename T, typename ChunkFn>
T reduce_chunks(size_t n, ChunkFn&& chunk_fn) {
    if (n <= kReduceChunk) return chunk_fn(0, n);
    const size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
    std::vector<T> partial(nchunks);
    par::parallel_for(0, static_cast<int64_t>(nchunks), [&](int64_t b, int64_t e) {
        for (int64_t c = b; c < e; ++c) {
            const size_t lo = static_cast<size_t>(c) * kReduceChunk;
            const size_t hi = std::min(n, lo + kReduceChunk);
            partial[static_cast<size_t>(c)] = chunk_fn(lo, hi);
        }
    });
    T s = T(0);
    for (T p : partial) s += p;
    return s;
}

} // namespace

template <typename T>
T vsum(const T* x, size_t n) {
    auto fn = STDGAN_PICK(vsum<T>);
    return reduce_chunks<T>(n, [&](size_t lo, size_t hi) { return fn(x + lo, hi - lo); });
}

template <typename T>
T vdot(const T* a, const T* b, size_t n) {
    auto fn = STDGAN_PICK(vdot<T>);
    return reduce_chunks<T>(n, [&](size_t lo, size_t hi) { return fn(a + lo, b + lo, hi - lo); });
}

template <typename T>
T vsumsq(const T* x, size_t n) {
    auto fn = STDGAN_PICK(vsumsq<T>);
    return reduce_chunks<T>(n, [&](size_t lo, size_t hi) { return fn(x + lo, hi - lo); });
}

template <typename T>
T l1_sum(const T* a, const T* b, size_t n) {
    auto fn = STDGAN_PICK(l1_sum<T>);
    return reduce_chunks<T>(n, [&](size_t lo, size_t hi) { return fn(a + lo, b + lo, hi - lo); });
}

template <typename T>
T sq_err_sum(const T* x, T c, size_t n) {
    auto fn = STDGAN_PICK(sq_err_sum<T>);
    return reduce_chunks<T>(n, [&](size_t lo, size_t hi) { return fn(x + lo, c, hi - lo); });
}

template <typename T>
void norm_affine(const T* x, T* y, size_t n, T mu, T inv_sigma, T g, T b) {
    STDGAN_PICK(norm_affine<T>)(x, y, n, mu, inv_sigma, g, b);
}

template <typename T>
void adam_step(T* p, const T* g, T* m, T* v, size_t n, T lr_t, T b1, T b2, T eps) {
    auto fn = STDGAN_PICK(adam_step<T>);
    par::parallel_for(0, static_cast<int64_t>(n), [&](int64_t lo, int64_t hi) {
        fn(p + lo, g + lo, m + lo, v + lo, static_cast<size_t>(hi - lo), lr_t, b1, b2, eps);
    }, kElemGrain);
}

#undef STDGAN_PICK

#define STDGAN_INSTANTIATE(T)                                              \
    template void gemm_nn<T>(const T*, const T*, T*, int, int, int, bool); \
    template void gemm_tn<T>(const T*, const T*, T*, int, int, int, bool); \
    template void gemm_nt<T>(const T*, const T*, T*, int, int, int, bool); \
    template void vaxpy<T>(T, const T*, T*, size_t);                       \
    template void vscale<T>(T, T*, size_t);                                \
    template void vadd<T>(const T*, const T*, T*, size_t);                 \
    template void vsub<T>(const T*, const T*, T*, size_t);                 \
    template void relu_fwd<T>(const T*, T*, size_t);                       \
    template void lrelu_fwd<T>(T, const T*, T*, size_t);                   \
    template void lrelu_bwd<T>(T, const T*, const T*, T*, size_t);         \
    template void sigmoid_fwd<T>(const T*, T*, size_t);                    \
    template void sigmoid_bwd<T>(const T*, const T*, T*, size_t);          \
    template T vsum<T>(const T*, size_t);                                  \
    template T vdot<T>(const T*, const T*, size_t);                        \
    template T vsumsq<T>(const T*, size_t);                                \
    template T l1_sum<T>(const T*, const T*, size_t);                      \
    template T sq_err_sum<T>(const T*, T, size_t);                         \
    template void norm_affine<T>(const T*, T*, size_t, T, T, T, T);        \
    template void adam_step<T>(T*, const T*, T*, T*, size_t, T, T, T, T);

STDGAN_INSTANTIATE(float)
STDGAN_INSTANTIATE(double)
#undef STDGAN_INSTANTIATE

} // namespace stdgan::kern
