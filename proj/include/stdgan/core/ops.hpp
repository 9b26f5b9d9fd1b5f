#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stdgan/core/autodiff.hpp"
#include "stdgan/core/kernels.hpp"
#include "stdgan/core/parallel.hpp"

namespace stdgan::ad {

namespace detail {

// col rows are (c, kh, kw), columns are output positions.
template <typename T>
void im2col(const T* img, T* col, int C, int H, int W,
            int KH, int KW, int stride, int pad, int OH, int OW) {
    const int S = OH * OW;
    for (int c = 0; c < C; ++c) {
        const T* plane = img + static_cast<size_t>(c) * H * W;
        for (int kh = 0; kh < KH; ++kh) {
            for (int kw = 0; kw < KW; ++kw) {
                T* dst = col + (static_cast<size_t>(c) * KH * KW + kh * KW + kw) * S;
                for (int oh = 0; oh < OH; ++oh) {
                    const int ih = oh * stride - pad + kh;
                    if (ih < 0 || ih >= H) {
                        for (int ow = 0; ow < OW; ++ow) dst[oh * OW + ow] = T(0);
                        continue;
                    }
                    const T* src_row = plane + static_cast<size_t>(ih) * W;
                    for (int ow = 0; ow < OW; ++ow) {
                        const int iw = ow * stride - pad + kw;
                        dst[oh * OW + ow] = (iw >= 0 && iw < W) ? src_row[iw] : T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* col, T* img, int C, int H, int W,
                int KH, int KW, int stride, int pad, int OH, int OW) {
    for (int c = 0; c < C; ++c) {
        T* plane = img + static_cast<size_t>(c) * H * W;
        for (int kh = 0; kh < KH; ++kh) {
            for (int kw = 0; kw < KW; ++kw) {
                const T* src = col + (static_cast<size_t>(c) * KH * KW + kh * KW + kw) *
                                         (static_cast<size_t>(OH) * OW);
                for (int oh = 0; oh < OH; ++oh) {
                    const int ih = oh * stride - pad + kh;
                    if (ih < 0 || ih >= H) continue;
                    T* dst_row = plane + static_cast<size_t>(ih) * W;
                    for (int ow = 0; ow < OW; ++ow) {
                        const int iw = ow * stride - pad + kw;
                        if (iw >= 0 && iw < W) dst_row[iw] += src[oh * OW + ow];
                    }
                }
            }
        }
    }
}

template <typename T>
inline void add_channel_bias(T* out, const T* bias, int OC, int S) {
    for (int oc = 0; oc < OC; ++oc) {
        const T b = bias[oc];
        T* row = out + static_cast<size_t>(oc) * S;
        for (int i = 0; i < S; ++i) row[i] += b;
    }
}

inline int conv_out_dim(int in, int k, int stride, int pad) {
    const int out = (in + 2 * pad - k) / stride + 1;
    if (out <= 0 || (in + 2 * pad - k) % stride != 0)
        throw std::invalid_argument("conv: input size incompatible with kernel/stride/pad");
    return out;
}

} // namespace detail

// x: (N,C,H,W), w: (OC,C,KH,KW), b: (OC)
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int stride, int pad) {
    const auto& xs = x->value.shape();
    const auto& ws = w->value.shape();
    if (xs.size() != 4 || ws.size() != 4) throw std::invalid_argument("conv2d: rank");
    if (xs[1] != ws[1]) throw std::invalid_argument("conv2d: channel mismatch");
    const int N = xs[0], C = xs[1], H = xs[2], W = xs[3];
    const int OC = ws[0], KH = ws[2], KW = ws[3];
    const int OH = detail::conv_out_dim(H, KH, stride, pad);
    const int OW = detail::conv_out_dim(W, KW, stride, pad);
    const int K = C * KH * KW;
    const int S = OH * OW;

    Tensor<T> out({N, OC, OH, OW});
    Tensor<T> col({K, S});
    for (int n = 0; n < N; ++n) {
        const T* xp = x->value.data() + static_cast<size_t>(n) * C * H * W;
        T* op = out.data() + static_cast<size_t>(n) * OC * S;
        detail::im2col(xp, col.data(), C, H, W, KH, KW, stride, pad, OH, OW);
        kern::gemm_nn(w->value.data(), col.data(), op, OC, K, S, false);
        detail::add_channel_bias(op, b->value.data(), OC, S);
    }

    return make_op<T>(std::move(out), {x, w, b}, [=](Node<T>& node) {
        const T* gy = node.grad.data();
        if (b->requires_grad) {
            Tensor<T>& db = b->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int oc = 0; oc < OC; ++oc)
                    db[oc] += kern::vsum(gy + (static_cast<size_t>(n) * OC + oc) * S,
                                         static_cast<size_t>(S));
        }
        Tensor<T> colb({K, S});
        if (w->requires_grad) {
            Tensor<T>& dw = w->ensure_grad();
            for (int n = 0; n < N; ++n) {
                const T* xp = x->value.data() + static_cast<size_t>(n) * C * H * W;
                detail::im2col(xp, colb.data(), C, H, W, KH, KW, stride, pad, OH, OW);
                kern::gemm_nt(gy + static_cast<size_t>(n) * OC * S, colb.data(),
                              dw.data(), OC, S, K, true);
            }
        }
        if (x->requires_grad) {
            Tensor<T>& dx = x->ensure_grad();
            for (int n = 0; n < N; ++n) {
                kern::gemm_tn(w->value.data(), gy + static_cast<size_t>(n) * OC * S,
                              colb.data(), K, OC, S, false);
                detail::col2im_add(colb.data(), dx.data() + static_cast<size_t>(n) * C * H * W,
                                   C, H, W, KH, KW, stride, pad, OH, OW);
            }
        }
    });
}

// Transposed convolution. x: (N,C,H,W), w: (C,OC,KH,KW), output spatial dims
// are (H-1)*stride - 2*pad + K.
template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int stride, int pad) {
    const auto& xs = x->value.shape();
    const auto& ws = w->value.shape();
    if (xs.size() != 4 || ws.size() != 4) throw std::invalid_argument("conv_transpose2d: rank");
    if (xs[1] != ws[0]) throw std::invalid_argument("conv_transpose2d: channel mismatch");
    const int N = xs[0], C = xs[1], H = xs[2], W = xs[3];
    const int OC = ws[1], KH = ws[2], KW = ws[3];
    const int OH = (H - 1) * stride - 2 * pad + KH;
    const int OW = (W - 1) * stride - 2 * pad + KW;
    if (OH <= 0 || OW <= 0) throw std::invalid_argument("conv_transpose2d: empty output");
    const int Kc = OC * KH * KW;
    const int S = H * W;

    Tensor<T> out({N, OC, OH, OW});
    Tensor<T> tmp({Kc, S});
    for (int n = 0; n < N; ++n) {
        const T* xp = x->value.data() + static_cast<size_t>(n) * C * S;
        T* op = out.data() + static_cast<size_t>(n) * OC * OH * OW;
        kern::gemm_tn(w->value.data(), xp, tmp.data(), Kc, C, S, false);
        detail::col2im_add(tmp.data(), op, OC, OH, OW, KH, KW, stride, pad, H, W);
        detail::add_channel_bias(op, b->value.data(), OC, OH * OW);
    }

    return make_op<T>(std::move(out), {x, w, b}, [=](Node<T>& node) {
        const T* gy = node.grad.data();
        const int OS = OH * OW;
        if (b->requires_grad) {
            Tensor<T>& db = b->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int oc = 0; oc < OC; ++oc)
                    db[oc] += kern::vsum(gy + (static_cast<size_t>(n) * OC + oc) * OS,
                                         static_cast<size_t>(OS));
        }
        Tensor<T> dtmp({Kc, S});
        for (int n = 0; n < N; ++n) {
            const T* gyp = gy + static_cast<size_t>(n) * OC * OS;
            detail::im2col(gyp, dtmp.data(), OC, OH, OW, KH, KW, stride, pad, H, W);
            if (x->requires_grad) {
                Tensor<T>& dx = x->ensure_grad();
                kern::gemm_nn(w->value.data(), dtmp.data(),
                              dx.data() + static_cast<size_t>(n) * C * S, C, Kc, S, true);
            }
            if (w->requires_grad) {
                Tensor<T>& dw = w->ensure_grad();
                kern::gemm_nt(x->value.data() + static_cast<size_t>(n) * C * S, dtmp.data(),
                              dw.data(), C, S, Kc, true);
            }
        }
    });
}

// Per-(sample, channel) normalization over spatial positions, no affine
// parameters; sigma = sqrt(population var + eps).
template <typename T>
Var<T> instance_norm(const Var<T>& x, T eps) {
    const auto& xs = x->value.shape();
    if (xs.size() != 4) throw std::invalid_argument("instance_norm: rank");
    const int N = xs[0], C = xs[1];
    const size_t S = static_cast<size_t>(xs[2]) * xs[3];
    if (S == 0) throw std::invalid_argument("instance_norm: empty plane");

    Tensor<T> out(xs);
    auto mu = std::make_shared<std::vector<T>>(static_cast<size_t>(N) * C);
    auto inv = std::make_shared<std::vector<T>>(static_cast<size_t>(N) * C);
    par::parallel_for(0, static_cast<int64_t>(N) * C, [&](int64_t b, int64_t e) {
        for (int64_t i = b; i < e; ++i) {
            const T* xp = x->value.data() + static_cast<size_t>(i) * S;
            const T m = kern::vsum(xp, S) / static_cast<T>(S);
            const T var = kern::sq_err_sum(xp, m, S) / static_cast<T>(S);
            const T iv = T(1) / std::sqrt(var + eps);
            (*mu)[static_cast<size_t>(i)] = m;
            (*inv)[static_cast<size_t>(i)] = iv;
            kern::norm_affine(xp, out.data() + static_cast<size_t>(i) * S, S, m, iv, T(1), T(0));
        }
    });

    return make_op<T>(std::move(out), {x}, [=](Node<T>& node) {
        if (!x->requires_grad) return;
        Tensor<T>& dx = x->ensure_grad();
        par::parallel_for(0, static_cast<int64_t>(N) * C, [&](int64_t b, int64_t e) {
            for (int64_t i = b; i < e; ++i) {
                const T* xp = x->value.data() + static_cast<size_t>(i) * S;
                const T* gp = node.grad.data() + static_cast<size_t>(i) * S;
                T* dp = dx.data() + static_cast<size_t>(i) * S;
                const T m = (*mu)[static_cast<size_t>(i)];
                const T iv = (*inv)[static_cast<size_t>(i)];
                T gsum = T(0), gxhat = T(0);
                for (size_t k = 0; k < S; ++k) {
                    const T xh = (xp[k] - m) * iv;
                    gsum += gp[k];
                    gxhat += gp[k] * xh;
                }
                const T mg = gsum / static_cast<T>(S);
                const T mgx = gxhat / static_cast<T>(S);
                for (size_t k = 0; k < S; ++k) {
                    const T xh = (xp[k] - m) * iv;
                    dp[k] += iv * (gp[k] - mg - xh * mgx);
                }
            }
        });
    });
}

// AdaIN: out = gamma * (x - mu(x)) / sigma(x) + beta, stats per channel over
// spatial positions. Single-sample activations only.
template <typename T>
Var<T> adain(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
    const auto& xs = x->value.shape();
    if (xs.size() != 4 || xs[0] != 1) throw std::invalid_argument("adain: expects (1,C,H,W)");
    const int C = xs[1];
    const size_t S = static_cast<size_t>(xs[2]) * xs[3];
    if (gamma->value.size() != static_cast<size_t>(C) || beta->value.size() != static_cast<size_t>(C))
        throw std::invalid_argument("adain: parameter length != channel count");

    Tensor<T> out(xs);
    auto mu = std::make_shared<std::vector<T>>(C);
    auto inv = std::make_shared<std::vector<T>>(C);
    for (int c = 0; c < C; ++c) {
        const T* xp = x->value.data() + static_cast<size_t>(c) * S;
        const T m = kern::vsum(xp, S) / static_cast<T>(S);
        const T var = kern::sq_err_sum(xp, m, S) / static_cast<T>(S);
        const T iv = T(1) / std::sqrt(var + eps);
        (*mu)[c] = m;
        (*inv)[c] = iv;
        kern::norm_affine(xp, out.data() + static_cast<size_t>(c) * S, S, m, iv,
                          gamma->value[c], beta->value[c]);
    }

    return make_op<T>(std::move(out), {x, gamma, beta}, [=](Node<T>& node) {
        for (int c = 0; c < C; ++c) {
            const T* xp = x->value.data() + static_cast<size_t>(c) * S;
            const T* gp = node.grad.data() + static_cast<size_t>(c) * S;
            const T m = (*mu)[c];
            const T iv = (*inv)[c];
            T gsum = T(0), gxhat = T(0);
            for (size_t k = 0; k < S; ++k) {
                gsum += gp[k];
                gxhat += gp[k] * (xp[k] - m) * iv;
            }
            if (beta->requires_grad) beta->ensure_grad()[c] += gsum;
            if (gamma->requires_grad) gamma->ensure_grad()[c] += gxhat;
            if (x->requires_grad) {
                T* dp = x->ensure_grad().data() + static_cast<size_t>(c) * S;
                const T g = gamma->value[c];
                const T mg = g * gsum / static_cast<T>(S);
                const T mgx = g * gxhat / static_cast<T>(S);
                for (size_t k = 0; k < S; ++k) {
                    const T xh = (xp[k] - m) * iv;
                    dp[k] += iv * (g * gp[k] - mg - xh * mgx);
                }
            }
        }
    });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
    Tensor<T> out(x->value.shape());
    kern::relu_fwd(x->value.data(), out.data(), out.size());
    return make_op<T>(std::move(out), {x}, [=](Node<T>& node) {
        if (!x->requires_grad) return;
        kern::lrelu_bwd(T(0), x->value.data(), node.grad.data(),
                        x->ensure_grad().data(), node.value.size());
    });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& x, T slope) {
    Tensor<T> out(x->value.shape());
    kern::lrelu_fwd(slope, x->value.data(), out.data(), out.size());
    return make_op<T>(std::move(out), {x}, [=](Node<T>& node) {
        if (!x->requires_grad) return;
        kern::lrelu_bwd(slope, x->value.data(), node.grad.data(),
                        x->ensure_grad().data(), node.value.size());
    });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
    Tensor<T> out(x->value.shape());
    kern::sigmoid_fwd(x->value.data(), out.data(), out.size());
    return make_op<T>(std::move(out), {x}, [=](Node<T>& node) {
        if (!x->requires_grad) return;
        kern::sigmoid_bwd(node.value.data(), node.grad.data(),
                          x->ensure_grad().data(), node.value.size());
    });
}

// 2x2 stride-2 max pooling; spatial dims must be even.
template <typename T>
Var<T> maxpool2(const Var<T>& x) {
    const auto& xs = x->value.shape();
    if (xs.size() != 4 || xs[2] % 2 != 0 || xs[3] % 2 != 0)
        throw std::invalid_argument("maxpool2: needs even (H,W)");
    const int N = xs[0], C = xs[1], H = xs[2], W = xs[3];
    const int OH = H / 2, OW = W / 2;
    Tensor<T> out({N, C, OH, OW});
    auto idx = std::make_shared<std::vector<int32_t>>(out.size());
    const int64_t planes = static_cast<int64_t>(N) * C;
    par::parallel_for(0, planes, [&](int64_t b, int64_t e) {
        for (int64_t p = b; p < e; ++p) {
            const T* xp = x->value.data() + static_cast<size_t>(p) * H * W;
            T* op = out.data() + static_cast<size_t>(p) * OH * OW;
            int32_t* ip = idx->data() + static_cast<size_t>(p) * OH * OW;
            for (int oh = 0; oh < OH; ++oh) {
                for (int ow = 0; ow < OW; ++ow) {
                    const int base = 2 * oh * W + 2 * ow;
                    int best = base;
                    T bv = xp[base];
                    if (xp[base + 1] > bv) { bv = xp[base + 1]; best = base + 1; }
                    if (xp[base + W] > bv) { bv = xp[base + W]; best = base + W; }
                    if (xp[base + W + 1] > bv) { bv = xp[base + W + 1]; best = base + W + 1; }
                    op[oh * OW + ow] = bv;
                    ip[oh * OW + ow] = best;
                }
            }
        }
    });
    return make_op<T>(std::move(out), {x}, [=](Node<T>& node) {
        if (!x->requires_grad) return;
        Tensor<T>& dx = x->ensure_grad();
        par::parallel_for(0, planes, [&](int64_t b, int64_t e) {
            for (int64_t p = b; p < e; ++p) {
                const T* gp = node.grad.data() + static_cast<size_t>(p) * OH * OW;
                const int32_t* ip = idx->data() + static_cast<size_t>(p) * OH * OW;
                T* dp = dx.data() + static_cast<size_t>(p) * H * W;
                for (int i = 0; i < OH * OW; ++i) dp[ip[i]] += gp[i];
            }
        });
    });
}

template <typename T>
Var<T> concat_channels(const Var<T>& a, const Var<T>& b) {
    const auto& as = a->value.shape();
    const auto& bs = b->value.shape();
    if (as.size() != 4 || bs.size() != 4 || as[0] != bs[0] || as[2] != bs[2] || as[3] != bs[3])
        throw std::invalid_argument("concat_channels: shape mismatch");
    const int N = as[0], Ca = as[1], Cb = bs[1];
    const size_t S = static_cast<size_t>(as[2]) * as[3];
    Tensor<T> out({N, Ca + Cb, as[2], as[3]});
    for (int n = 0; n < N; ++n) {
        std::copy_n(a->value.data() + static_cast<size_t>(n) * Ca * S, Ca * S,
                    out.data() + static_cast<size_t>(n) * (Ca + Cb) * S);
        std::copy_n(b->value.data() + static_cast<size_t>(n) * Cb * S, Cb * S,
                    out.data() + static_cast<size_t>(n) * (Ca + Cb) * S + Ca * S);
    }
    return make_op<T>(std::move(out), {a, b}, [=](Node<T>& node) {
        for (int n = 0; n < N; ++n) {
            const T* g = node.grad.data() + static_cast<size_t>(n) * (Ca + Cb) * S;
            if (a->requires_grad)
                kern::vaxpy(T(1), g, a->ensure_grad().data() + static_cast<size_t>(n) * Ca * S, Ca * S);
            if (b->requires_grad)
                kern::vaxpy(T(1), g + Ca * S,
                            b->ensure_grad().data() + static_cast<size_t>(n) * Cb * S, Cb * S);
        }
    });
}

// (N,C,H,W) -> (N,C)
template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
    const auto& xs = x->value.shape();
    if (xs.size() != 4) throw std::invalid_argument("global_avg_pool: rank");
    const int N = xs[0], C = xs[1];
    const size_t S = static_cast<size_t>(xs[2]) * xs[3];
    Tensor<T> out({N, C});
    for (size_t i = 0; i < static_cast<size_t>(N) * C; ++i)
        out[i] = kern::vsum(x->value.data() + i * S, S) / static_cast<T>(S);
    return make_op<T>(std::move(out), {x}, [=](Node<T>& node) {
        if (!x->requires_grad) return;
        Tensor<T>& dx = x->ensure_grad();
        for (size_t i = 0; i < static_cast<size_t>(N) * C; ++i) {
            const T g = node.grad[i] / static_cast<T>(S);
            T* dp = dx.data() + i * S;
            for (size_t k = 0; k < S; ++k) dp[k] += g;
        }
    });
}

// x: (N,F), w: (O,F), b: (O) -> (N,O)
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
    const auto& xs = x->value.shape();
    const auto& ws = w->value.shape();
    if (xs.size() != 2 || ws.size() != 2 || xs[1] != ws[1])
        throw std::invalid_argument("linear: shape mismatch");
    const int N = xs[0], F = xs[1], O = ws[0];
    Tensor<T> out({N, O});
    kern::gemm_nt(x->value.data(), w->value.data(), out.data(), N, F, O, false);
    for (int n = 0; n < N; ++n)
        for (int o = 0; o < O; ++o) out[static_cast<size_t>(n) * O + o] += b->value[o];
    return make_op<T>(std::move(out), {x, w, b}, [=](Node<T>& node) {
        const T* gy = node.grad.data();
        if (b->requires_grad) {
            Tensor<T>& db = b->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int o = 0; o < O; ++o) db[o] += gy[static_cast<size_t>(n) * O + o];
        }
        if (w->requires_grad)
            kern::gemm_tn(gy, x->value.data(), w->ensure_grad().data(), O, N, F, true);
        if (x->requires_grad)
            kern::gemm_nn(gy, w->value.data(), x->ensure_grad().data(), N, O, F, true);
    });
}

// Column slice of a (N,F) tensor: columns [from, from+len).
template <typename T>
Var<T> slice_cols(const Var<T>& x, int from, int len) {
    const auto& xs = x->value.shape();
    if (xs.size() != 2 || from < 0 || from + len > xs[1])
        throw std::invalid_argument("slice_cols: bad range");
    const int N = xs[0], F = xs[1];
    Tensor<T> out({N, len});
    for (int n = 0; n < N; ++n)
        std::copy_n(x->value.data() + static_cast<size_t>(n) * F + from, len,
                    out.data() + static_cast<size_t>(n) * len);
    return make_op<T>(std::move(out), {x}, [=](Node<T>& node) {
        if (!x->requires_grad) return;
        Tensor<T>& dx = x->ensure_grad();
        for (int n = 0; n < N; ++n)
            kern::vaxpy(T(1), node.grad.data() + static_cast<size_t>(n) * len,
                        dx.data() + static_cast<size_t>(n) * F + from, len);
    });
}

template <typename T>
Var<T> flatten_rows(const Var<T>& x) {
    const auto& xs = x->value.shape();
    if (xs.size() < 2) throw std::invalid_argument("flatten_rows: rank");
    int cols = 1;
    for (size_t i = 1; i < xs.size(); ++i) cols *= xs[i];
    Tensor<T> out = x->value.reshaped({xs[0], cols});
    return make_op<T>(std::move(out), {x}, [=](Node<T>& node) {
        if (!x->requires_grad) return;
        kern::vaxpy(T(1), node.grad.data(), x->ensure_grad().data(), node.grad.size());
    });
}

// mean((x - c)^2) over all elements; the LSGAN building block.
template <typename T>
Var<T> mse_to_const(const Var<T>& x, T c) {
    const size_t n = x->value.size();
    Tensor<T> out = Tensor<T>::scalar(kern::sq_err_sum(x->value.data(), c, n) / static_cast<T>(n));
    return make_op<T>(std::move(out), {x}, [=](Node<T>& node) {
        if (!x->requires_grad) return;
        const T g = node.grad[0] * T(2) / static_cast<T>(n);
        Tensor<T>& dx = x->ensure_grad();
        const T* xp = x->value.data();
        for (size_t i = 0; i < n; ++i) dx[i] += g * (xp[i] - c);
    });
}

// mean |a - b| over all elements.
template <typename T>
Var<T> l1_mean(const Var<T>& a, const Var<T>& b) {
    if (!a->value.same_shape(b->value)) throw std::invalid_argument("l1_mean: shape mismatch");
    const size_t n = a->value.size();
    Tensor<T> out = Tensor<T>::scalar(kern::l1_sum(a->value.data(), b->value.data(), n) /
                                      static_cast<T>(n));
    return make_op<T>(std::move(out), {a, b}, [=](Node<T>& node) {
        const T g = node.grad[0] / static_cast<T>(n);
        const T* ap = a->value.data();
        const T* bp = b->value.data();
        T* da = a->requires_grad ? a->ensure_grad().data() : nullptr;
        T* db = b->requires_grad ? b->ensure_grad().data() : nullptr;
        for (size_t i = 0; i < n; ++i) {
            const T d = ap[i] - bp[i];
            const T s = d > T(0) ? g : (d < T(0) ? -g : T(0));
            if (da) da[i] += s;
            if (db) db[i] -= s;
        }
    });
}

// -log softmax(logits)[label] for a single logit row, fused for stability.
template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits, int label) {
    const size_t n = logits->value.size();
    if (label < 0 || static_cast<size_t>(label) >= n)
        throw std::out_of_range("softmax_cross_entropy: label out of range");
    const T* lp = logits->value.data();
    T mx = lp[0];
    for (size_t i = 1; i < n; ++i) mx = std::max(mx, lp[i]);
    T se = T(0);
    for (size_t i = 0; i < n; ++i) se += std::exp(lp[i] - mx);
    const T lse = mx + std::log(se);
    Tensor<T> out = Tensor<T>::scalar(lse - lp[label]);
    return make_op<T>(std::move(out), {logits}, [=](Node<T>& node) {
        if (!logits->requires_grad) return;
        const T g = node.grad[0];
        Tensor<T>& dl = logits->ensure_grad();
        const T* xp = logits->value.data();
        for (size_t i = 0; i < n; ++i) {
            const T p = std::exp(xp[i] - lse);
            dl[i] += g * (p - (static_cast<size_t>(label) == static_cast<size_t>(i) ? T(1) : T(0)));
        }
    });
}

// Pixelwise cross entropy over class channels. labels hold {0=ignored,
// 1..C} per pixel; the mean runs over non-ignored pixels.
template <typename T>
Var<T> masked_softmax_ce_map(const Var<T>& logits, std::shared_ptr<std::vector<uint8_t>> labels) {
    const auto& ls = logits->value.shape();
    if (ls.size() != 4) throw std::invalid_argument("masked_softmax_ce_map: rank");
    const int N = ls[0], C = ls[1], H = ls[2], W = ls[3];
    const size_t S = static_cast<size_t>(H) * W;
    if (labels->size() != static_cast<size_t>(N) * S)
        throw std::invalid_argument("masked_softmax_ce_map: label size");

    double total = 0.0;
    size_t count = 0;
    const T* lp = logits->value.data();
    for (int n = 0; n < N; ++n) {
        for (size_t s = 0; s < S; ++s) {
            const uint8_t lab = (*labels)[static_cast<size_t>(n) * S + s];
            if (lab == 0) continue;
            if (lab > static_cast<uint8_t>(C))
                throw std::out_of_range("masked_softmax_ce_map: label exceeds channels");
            const T* px = lp + static_cast<size_t>(n) * C * S + s;
            T mx = px[0];
            for (int c = 1; c < C; ++c) mx = std::max(mx, px[static_cast<size_t>(c) * S]);
            T se = T(0);
            for (int c = 0; c < C; ++c) se += std::exp(px[static_cast<size_t>(c) * S] - mx);
            total += static_cast<double>(mx + std::log(se) - px[static_cast<size_t>(lab - 1) * S]);
            ++count;
        }
    }
    const T mean = count > 0 ? static_cast<T>(total / static_cast<double>(count)) : T(0);
    Tensor<T> out = Tensor<T>::scalar(mean);
    return make_op<T>(std::move(out), {logits}, [=](Node<T>& node) {
        if (!logits->requires_grad || count == 0) return;
        const T g = node.grad[0] / static_cast<T>(count);
        Tensor<T>& dl = logits->ensure_grad();
        const T* xp = logits->value.data();
        for (int n = 0; n < N; ++n) {
            for (size_t s = 0; s < S; ++s) {
                const uint8_t lab = (*labels)[static_cast<size_t>(n) * S + s];
                if (lab == 0) continue;
                const T* px = xp + static_cast<size_t>(n) * C * S + s;
                T* dpx = dl.data() + static_cast<size_t>(n) * C * S + s;
                T mx = px[0];
                for (int c = 1; c < C; ++c) mx = std::max(mx, px[static_cast<size_t>(c) * S]);
                T se = T(0);
                for (int c = 0; c < C; ++c) se += std::exp(px[static_cast<size_t>(c) * S] - mx);
                for (int c = 0; c < C; ++c) {
                    const T p = std::exp(px[static_cast<size_t>(c) * S] - mx) / se;
                    dpx[static_cast<size_t>(c) * S] +=
                        g * (p - (c == lab - 1 ? T(1) : T(0)));
                }
            }
        }
    });
}

// Weighted sum of scalar nodes.
template <typename T>
Var<T> weighted_sum(std::vector<Var<T>> xs, std::vector<T> ws) {
    if (xs.size() != ws.size() || xs.empty())
        throw std::invalid_argument("weighted_sum: arity mismatch");
    T v = T(0);
    for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i]->value.size() != 1) throw std::invalid_argument("weighted_sum: non-scalar term");
        v += ws[i] * xs[i]->value[0];
    }
    Tensor<T> out = Tensor<T>::scalar(v);
    std::vector<Var<T>> parents = xs;
    return make_op<T>(std::move(out), std::move(parents), [xs = std::move(xs), ws = std::move(ws)](Node<T>& node) {
        for (size_t i = 0; i < xs.size(); ++i) {
            if (!xs[i]->requires_grad) continue;
            xs[i]->ensure_grad()[0] += ws[i] * node.grad[0];
        }
    });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    return weighted_sum<T>({a, b}, {T(1), T(1)});
}

// Plain (non-tape) per-channel spatial statistics; sigma = sqrt(var + eps).
template <typename T>
void instance_stats(const Tensor<T>& x, T eps, std::vector<T>& mu, std::vector<T>& sigma) {
    const auto& xs = x.shape();
    if (xs.size() != 4) throw std::invalid_argument("instance_stats: rank");
    const size_t planes = static_cast<size_t>(xs[0]) * xs[1];
    const size_t S = static_cast<size_t>(xs[2]) * xs[3];
    mu.resize(planes);
    sigma.resize(planes);
    for (size_t i = 0; i < planes; ++i) {
        const T* xp = x.data() + i * S;
        const T m = kern::vsum(xp, S) / static_cast<T>(S);
        const T var = kern::sq_err_sum(xp, m, S) / static_cast<T>(S);
        mu[i] = m;
        sigma[i] = std::sqrt(var + eps);
    }
}

} // namespace stdgan::ad
