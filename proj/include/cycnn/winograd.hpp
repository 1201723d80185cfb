#pragma once

#include <stdexcept>
#include <vector>

#include "cycnn/conv.hpp"
#include "cycnn/tensor.hpp"

namespace cycnn {

// F(2x2, 3x3) minimal filtering constants.
//   Y = A_t [ (G g G_t) .* (B_t d B) ] A
// for a 4x4 data tile d and 3x3 filter g, equal to the valid 2x2 convolution.
struct WinogradTransforms {
    // B_t (4x4 input transform)
    static constexpr double Bt[4][4] = {
        {1, 0, -1, 0}, {0, 1, 1, 0}, {0, -1, 1, 0}, {0, 1, 0, -1}};
    // G (4x3 filter transform)
    static constexpr double G[4][3] = {
        {1, 0, 0}, {0.5, 0.5, 0.5}, {0.5, -0.5, 0.5}, {0, 0, 1}};
    // A_t (2x4 output transform)
    static constexpr double At[2][4] = {{1, 1, 1, 0}, {0, 1, -1, -1}};
};

// Fault-injection hook for the selftest: added to G[0][0] when transforming
// filters. Must stay 0 in normal operation.
inline double& winograd_fault_injection() {
    static double eps = 0.0;
    return eps;
}

// U = G g G_t, as flat row-major 3x3 in / 4x4 out.
template <typename T>
void transform_filter(const T* g, T* u) {
    const T g00 = static_cast<T>(WinogradTransforms::G[0][0] + winograd_fault_injection());
    // Gg: 4x3
    T tmp[4][3];
    for (int j = 0; j < 3; ++j) {
        tmp[0][j] = g00 * g[0 * 3 + j];
        tmp[1][j] = static_cast<T>(0.5) * (g[0 * 3 + j] + g[1 * 3 + j] + g[2 * 3 + j]);
        tmp[2][j] = static_cast<T>(0.5) * (g[0 * 3 + j] - g[1 * 3 + j] + g[2 * 3 + j]);
        tmp[3][j] = g[2 * 3 + j];
    }
    // (Gg) G_t: 4x4
    for (int i = 0; i < 4; ++i) {
        u[i * 4 + 0] = g00 * tmp[i][0];
        u[i * 4 + 1] = static_cast<T>(0.5) * (tmp[i][0] + tmp[i][1] + tmp[i][2]);
        u[i * 4 + 2] = static_cast<T>(0.5) * (tmp[i][0] - tmp[i][1] + tmp[i][2]);
        u[i * 4 + 3] = tmp[i][2];
    }
}

// V = B_t d B, flat row-major 4x4 in/out.
template <typename T>
void transform_input_tile(const T* d, T* v) {
    T tmp[4][4];
    for (int j = 0; j < 4; ++j) {
        tmp[0][j] = d[0 * 4 + j] - d[2 * 4 + j];
        tmp[1][j] = d[1 * 4 + j] + d[2 * 4 + j];
        tmp[2][j] = d[2 * 4 + j] - d[1 * 4 + j];
        tmp[3][j] = d[1 * 4 + j] - d[3 * 4 + j];
    }
    for (int i = 0; i < 4; ++i) {
        v[i * 4 + 0] = tmp[i][0] - tmp[i][2];
        v[i * 4 + 1] = tmp[i][1] + tmp[i][2];
        v[i * 4 + 2] = tmp[i][2] - tmp[i][1];
        v[i * 4 + 3] = tmp[i][1] - tmp[i][3];
    }
}

// Y = A_t m A, 4x4 in, 2x2 out.
template <typename T>
void transform_output_tile(const T* m, T* y) {
    T tmp[2][4];
    for (int j = 0; j < 4; ++j) {
        tmp[0][j] = m[0 * 4 + j] + m[1 * 4 + j] + m[2 * 4 + j];
        tmp[1][j] = m[1 * 4 + j] - m[2 * 4 + j] - m[3 * 4 + j];
    }
    for (int i = 0; i < 2; ++i) {
        y[i * 2 + 0] = tmp[i][0] + tmp[i][1] + tmp[i][2];
        y[i * 2 + 1] = tmp[i][1] - tmp[i][2] - tmp[i][3];
    }
}

// 4x4 patches fetched at stride 2 from the padded input. Tile (i, j) covers
// padded rows [2i, 2i+3] and cols [2j, 2j+3].
template <typename T>
struct TileGrid {
    int64_t n = 0, c = 0, tiles_h = 0, tiles_w = 0;
    std::vector<T> data;  // (n, c, tile_row, tile_col, 4, 4)

    T* tile(int64_t n_, int64_t c_, int64_t ti, int64_t tj) {
        return data.data() + ((((n_ * c + c_) * tiles_h + ti) * tiles_w + tj) * 16);
    }
    const T* tile(int64_t n_, int64_t c_, int64_t ti, int64_t tj) const {
        return data.data() + ((((n_ * c + c_) * tiles_h + ti) * tiles_w + tj) * 16);
    }
};

inline void require_even_hw(int64_t h, int64_t w, const char* what) {
    if (h % 2 != 0 || w % 2 != 0)
        throw std::invalid_argument(std::string(what) +
                                    ": H and W must be even (use conv2d_direct otherwise)");
}

template <typename T>
TileGrid<T> tile_input(const Tensor<T>& x, PadMode mode) {
    require_even_hw(x.shape.h(), x.shape.w(), "tile_input");
    const Tensor<T> xp = pad_input(x, 1, mode);
    TileGrid<T> g;
    g.n = x.shape.n();
    g.c = x.shape.c();
    g.tiles_h = x.shape.h() / 2;
    g.tiles_w = x.shape.w() / 2;
    g.data.resize(static_cast<size_t>(g.n * g.c * g.tiles_h * g.tiles_w * 16));
    const int64_t PW = xp.shape.w();
    for (int64_t n = 0; n < g.n; ++n)
        for (int64_t c = 0; c < g.c; ++c) {
            const T* ip = xp.plane(n, c);
            for (int64_t ti = 0; ti < g.tiles_h; ++ti)
                for (int64_t tj = 0; tj < g.tiles_w; ++tj) {
                    T* t = g.tile(n, c, ti, tj);
                    for (int r = 0; r < 4; ++r)
                        for (int col = 0; col < 4; ++col)
                            t[r * 4 + col] = ip[(2 * ti + r) * PW + (2 * tj + col)];
                }
        }
    return g;
}

// Winograd F(2x2, 3x3) convolution; numerically interchangeable with
// conv2d_direct for 3x3/stride 1/pad 1 on even spatial dims. The channel
// reduction runs in the transform domain, input channels ascending.
template <typename T>
Tensor<T> conv2d_winograd(const Tensor<T>& x, const FilterBank<T>& f, const ConvSpec& spec,
                          PadMode mode) {
    if (spec.kernel_h != 3 || spec.kernel_w != 3 || spec.stride_h != 1 || spec.stride_w != 1 ||
        spec.pad != 1)
        throw std::invalid_argument(
            "conv2d_winograd: requires 3x3 kernel, stride 1, pad 1 (use conv2d_direct)");
    require_even_hw(x.shape.h(), x.shape.w(), "conv2d_winograd");
    if (x.shape.c() != spec.in_channels)
        throw std::invalid_argument("conv2d_winograd: channel mismatch");

    const int64_t N = x.shape.n(), OC = spec.out_channels, IC = spec.in_channels;
    const int64_t H = x.shape.h(), W = x.shape.w();
    const int64_t TH = H / 2, TW = W / 2;
    const Tensor<T> xp = pad_input(x, 1, mode);
    const int64_t PW = xp.shape.w();

    // Filter transforms, computed once per forward pass.
    std::vector<T> U(static_cast<size_t>(OC * IC * 16));
    for (int64_t o = 0; o < OC; ++o)
        for (int64_t c = 0; c < IC; ++c)
            transform_filter(f.weights.plane(o, c), U.data() + (o * IC + c) * 16);

    Tensor<T> out(N, OC, H, W);
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < N; ++n)
        for (int64_t ti = 0; ti < TH; ++ti) {
            std::vector<T> V(static_cast<size_t>(IC) * 16);
            for (int64_t tj = 0; tj < TW; ++tj) {
                for (int64_t c = 0; c < IC; ++c) {
                    T d[16];
                    const T* ip = xp.plane(n, c);
                    for (int r = 0; r < 4; ++r)
                        for (int col = 0; col < 4; ++col)
                            d[r * 4 + col] = ip[(2 * ti + r) * PW + (2 * tj + col)];
                    transform_input_tile(d, V.data() + c * 16);
                }
                for (int64_t o = 0; o < OC; ++o) {
                    T m[16] = {};
                    for (int64_t c = 0; c < IC; ++c) {
                        const T* u = U.data() + (o * IC + c) * 16;
                        const T* v = V.data() + c * 16;
                        for (int k = 0; k < 16; ++k) m[k] += u[k] * v[k];
                    }
                    T y[4];
                    transform_output_tile(m, y);
                    T* op = out.plane(n, o);
                    const T b = f.bias[static_cast<size_t>(o)];
                    op[(2 * ti + 0) * W + 2 * tj + 0] = y[0] + b;
                    op[(2 * ti + 0) * W + 2 * tj + 1] = y[1] + b;
                    op[(2 * ti + 1) * W + 2 * tj + 0] = y[2] + b;
                    op[(2 * ti + 1) * W + 2 * tj + 1] = y[3] + b;
                }
            }
        }
    return out;
}

// Dispatch on spec.algorithm; winograd falls back to direct for geometries it
// does not cover.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const FilterBank<T>& f, const ConvSpec& spec) {
    if (spec.algorithm == ConvAlgo::winograd && x.shape.h() % 2 == 0 && x.shape.w() % 2 == 0)
        return conv2d_winograd(x, f, spec, spec.pad_mode);
    return conv2d_direct(x, f, spec);
}

}  // namespace cycnn
