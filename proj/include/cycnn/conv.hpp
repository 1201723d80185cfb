#pragma once

#include <stdexcept>
#include <vector>

#include "cycnn/tensor.hpp"

namespace cycnn {

enum class PadMode { zero, cylindrical };
enum class ConvAlgo { direct, winograd };

struct ConvSpec {
    int64_t in_channels = 0;
    int64_t out_channels = 0;
    int64_t kernel_h = 3;
    int64_t kernel_w = 3;
    int64_t stride_h = 1;
    int64_t stride_w = 1;
    int64_t pad = 0;
    PadMode pad_mode = PadMode::zero;
    ConvAlgo algorithm = ConvAlgo::direct;

    void validate() const {
        if (kernel_h < 1 || kernel_w < 1 || stride_h < 1 || stride_w < 1 || pad < 0)
            throw std::invalid_argument("ConvSpec: kernel/stride must be >= 1, pad >= 0");
        if (algorithm == ConvAlgo::winograd &&
            (kernel_h != 3 || kernel_w != 3 || stride_h != 1 || stride_w != 1 || pad != 1))
            throw std::invalid_argument("ConvSpec: winograd requires 3x3 kernel, stride 1, pad 1");
        // Cylindrical wrap semantics are pinned for odd kernels with same-padding.
        if (pad_mode == PadMode::cylindrical && pad > 0 &&
            (kernel_h % 2 != 1 || pad != (kernel_h - 1) / 2))
            throw std::invalid_argument(
                "ConvSpec: cylindrical mode requires odd kernel with pad = (kernel-1)/2");
    }

    int64_t out_h(int64_t in_h) const { return (in_h + 2 * pad - kernel_h) / stride_h + 1; }
    int64_t out_w(int64_t in_w) const { return (in_w + 2 * pad - kernel_w) / stride_w + 1; }
};

template <typename T>
struct FilterBank {
    Tensor<T> weights;     // (out_channels, in_channels, kernel_h, kernel_w)
    std::vector<T> bias;   // out_channels

    FilterBank() = default;
    FilterBank(int64_t out_c, int64_t in_c, int64_t kh, int64_t kw)
        : weights(out_c, in_c, kh, kw), bias(static_cast<size_t>(out_c), T(0)) {}
};

// Zero mode fills every border with 0. Cylindrical mode wraps rows: the top
// border holds the last input rows, the bottom border the first input rows;
// left/right columns (corners included) stay 0.
template <typename T>
Tensor<T> pad_input(const Tensor<T>& x, int64_t pad, PadMode mode) {
    const int64_t H = x.shape.h(), W = x.shape.w();
    if (mode == PadMode::cylindrical && pad > H)
        throw std::invalid_argument("pad_input: cylindrical pad exceeds input height");
    if (pad == 0) return x;
    Tensor<T> out(x.shape.n(), x.shape.c(), H + 2 * pad, W + 2 * pad);
    for (int64_t n = 0; n < x.shape.n(); ++n)
        for (int64_t c = 0; c < x.shape.c(); ++c) {
            const T* src = x.plane(n, c);
            T* dst = out.plane(n, c);
            const int64_t Wp = W + 2 * pad;
            for (int64_t h = 0; h < H; ++h)
                for (int64_t w = 0; w < W; ++w)
                    dst[(h + pad) * Wp + (w + pad)] = src[h * W + w];
            if (mode == PadMode::cylindrical) {
                for (int64_t p = 0; p < pad; ++p) {
                    const int64_t top_src = H - pad + p;   // wraps into row -pad+p
                    const int64_t bot_src = p;             // wraps into row H+p
                    for (int64_t w = 0; w < W; ++w) {
                        dst[p * Wp + (w + pad)] = src[top_src * W + w];
                        dst[(H + pad + p) * Wp + (w + pad)] = src[bot_src * W + w];
                    }
                }
            }
        }
    return out;
}

// Adjoint of pad_input: crops the interior and, in cylindrical mode, folds the
// wrapped border rows back onto the true rows they were copied from.
template <typename T>
Tensor<T> unpad_accumulate(const Tensor<T>& gpad, int64_t pad, PadMode mode, int64_t H, int64_t W) {
    if (pad == 0) return gpad;
    Tensor<T> out(gpad.shape.n(), gpad.shape.c(), H, W);
    const int64_t Wp = W + 2 * pad;
    for (int64_t n = 0; n < gpad.shape.n(); ++n)
        for (int64_t c = 0; c < gpad.shape.c(); ++c) {
            const T* src = gpad.plane(n, c);
            T* dst = out.plane(n, c);
            for (int64_t h = 0; h < H; ++h)
                for (int64_t w = 0; w < W; ++w)
                    dst[h * W + w] = src[(h + pad) * Wp + (w + pad)];
            if (mode == PadMode::cylindrical) {
                for (int64_t p = 0; p < pad; ++p)
                    for (int64_t w = 0; w < W; ++w) {
                        dst[(H - pad + p) * W + w] += src[p * Wp + (w + pad)];
                        dst[p * W + w] += src[(H + pad + p) * Wp + (w + pad)];
                    }
            }
        }
    return out;
}

// Direct convolution. Per output element the reduction runs (c, u, v)
// ascending, so results do not depend on the parallel schedule.
template <typename T>
Tensor<T> conv2d_direct(const Tensor<T>& x, const FilterBank<T>& f, const ConvSpec& spec) {
    spec.validate();
    if (x.shape.c() != spec.in_channels)
        throw std::invalid_argument("conv2d_direct: input has " + std::to_string(x.shape.c()) +
                                    " channels, spec expects " + std::to_string(spec.in_channels));
    const Tensor<T> xp = pad_input(x, spec.pad, spec.pad_mode);
    const int64_t N = x.shape.n(), OC = spec.out_channels, IC = spec.in_channels;
    const int64_t OH = spec.out_h(x.shape.h()), OW = spec.out_w(x.shape.w());
    const int64_t KH = spec.kernel_h, KW = spec.kernel_w;
    const int64_t SH = spec.stride_h, SW = spec.stride_w;
    const int64_t PW = xp.shape.w();
    Tensor<T> out(N, OC, OH, OW);
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < N; ++n)
        for (int64_t o = 0; o < OC; ++o) {
            T* op = out.plane(n, o);
            const T b = f.bias[static_cast<size_t>(o)];
            for (int64_t i = 0; i < OH * OW; ++i) op[i] = b;
            for (int64_t c = 0; c < IC; ++c) {
                const T* ip = xp.plane(n, c);
                const T* wp = f.weights.plane(o, c);
                for (int64_t u = 0; u < KH; ++u)
                    for (int64_t v = 0; v < KW; ++v) {
                        const T w = wp[u * KW + v];
                        if (SW == 1) {
                            for (int64_t i = 0; i < OH; ++i) {
                                const T* row = ip + (i * SH + u) * PW + v;
                                T* orow = op + i * OW;
                                for (int64_t j = 0; j < OW; ++j) orow[j] += w * row[j];
                            }
                        } else {
                            for (int64_t i = 0; i < OH; ++i) {
                                const T* row = ip + (i * SH + u) * PW + v;
                                T* orow = op + i * OW;
                                for (int64_t j = 0; j < OW; ++j) orow[j] += w * row[j * SW];
                            }
                        }
                    }
            }
        }
    return out;
}

template <typename T>
struct ConvGrads {
    Tensor<T> grad_x;
    Tensor<T> grad_w;
    std::vector<T> grad_b;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const FilterBank<T>& f, const Tensor<T>& grad_out,
                             const ConvSpec& spec) {
    spec.validate();
    const int64_t N = x.shape.n(), OC = spec.out_channels, IC = spec.in_channels;
    const int64_t OH = spec.out_h(x.shape.h()), OW = spec.out_w(x.shape.w());
    if (grad_out.shape != Shape(N, OC, OH, OW))
        throw std::invalid_argument("conv2d_backward: grad_out shape " + grad_out.shape.str() +
                                    " does not match forward output " + Shape(N, OC, OH, OW).str());
    if (x.shape.c() != IC) throw std::invalid_argument("conv2d_backward: channel mismatch");
    const Tensor<T> xp = pad_input(x, spec.pad, spec.pad_mode);
    const int64_t KH = spec.kernel_h, KW = spec.kernel_w;
    const int64_t SH = spec.stride_h, SW = spec.stride_w;
    const int64_t PW = xp.shape.w();

    ConvGrads<T> g;
    g.grad_b.assign(static_cast<size_t>(OC), T(0));
    for (int64_t o = 0; o < OC; ++o) {
        T acc = T(0);
        for (int64_t n = 0; n < N; ++n) {
            const T* gp = grad_out.plane(n, o);
            for (int64_t i = 0; i < OH * OW; ++i) acc += gp[i];
        }
        g.grad_b[static_cast<size_t>(o)] = acc;
    }

    g.grad_w = Tensor<T>(OC, IC, KH, KW);
#pragma omp parallel for schedule(static)
    for (int64_t o = 0; o < OC; ++o)
        for (int64_t c = 0; c < IC; ++c) {
            T* wp = g.grad_w.plane(o, c);
            for (int64_t u = 0; u < KH; ++u)
                for (int64_t v = 0; v < KW; ++v) {
                    T acc = T(0);
                    for (int64_t n = 0; n < N; ++n) {
                        const T* ip = xp.plane(n, c);
                        const T* gp = grad_out.plane(n, o);
                        for (int64_t i = 0; i < OH; ++i) {
                            const T* row = ip + (i * SH + u) * PW + v;
                            const T* grow = gp + i * OW;
                            for (int64_t j = 0; j < OW; ++j) acc += row[j * SW] * grow[j];
                        }
                    }
                    wp[u * KW + v] = acc;
                }
        }

    Tensor<T> gxp(xp.shape);
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < IC; ++c) {
            T* gxc = gxp.plane(n, c);
            for (int64_t o = 0; o < OC; ++o) {
                const T* gp = grad_out.plane(n, o);
                const T* wp = f.weights.plane(o, c);
                for (int64_t u = 0; u < KH; ++u)
                    for (int64_t v = 0; v < KW; ++v) {
                        const T w = wp[u * KW + v];
                        for (int64_t i = 0; i < OH; ++i) {
                            T* row = gxc + (i * SH + u) * PW + v;
                            const T* grow = gp + i * OW;
                            for (int64_t j = 0; j < OW; ++j) row[j * SW] += w * grow[j];
                        }
                    }
            }
        }
    g.grad_x = unpad_accumulate(gxp, spec.pad, spec.pad_mode, x.shape.h(), x.shape.w());
    return g;
}

namespace reference {

// Naive six-loop serial convolution. Kept as the oracle the parallel kernels
// are tested and benchmarked against; do not optimize.
template <typename T>
Tensor<T> conv2d_direct(const Tensor<T>& x, const FilterBank<T>& f, const ConvSpec& spec) {
    spec.validate();
    if (x.shape.c() != spec.in_channels)
        throw std::invalid_argument("reference::conv2d_direct: channel mismatch");
    const Tensor<T> xp = pad_input(x, spec.pad, spec.pad_mode);
    const int64_t N = x.shape.n(), OC = spec.out_channels, IC = spec.in_channels;
    const int64_t OH = spec.out_h(x.shape.h()), OW = spec.out_w(x.shape.w());
    Tensor<T> out(N, OC, OH, OW);
    for (int64_t n = 0; n < N; ++n)
        for (int64_t o = 0; o < OC; ++o)
            for (int64_t i = 0; i < OH; ++i)
                for (int64_t j = 0; j < OW; ++j) {
                    T acc = f.bias[static_cast<size_t>(o)];
                    for (int64_t c = 0; c < IC; ++c)
                        for (int64_t u = 0; u < spec.kernel_h; ++u)
                            for (int64_t v = 0; v < spec.kernel_w; ++v)
                                acc += xp(n, c, i * spec.stride_h + u, j * spec.stride_w + v) *
                                       f.weights(o, c, u, v);
                    out(n, o, i, j) = acc;
                }
    return out;
}

}  // namespace reference

}  // namespace cycnn
