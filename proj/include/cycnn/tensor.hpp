#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cycnn {

// Rank is fixed at 4 (N, C, H, W); 2-D matrices are stored as (1, 1, R, K).
struct Shape {
    std::array<int64_t, 4> dims{0, 0, 0, 0};

    Shape() = default;
    Shape(int64_t n, int64_t c, int64_t h, int64_t w) : dims{n, c, h, w} {
        for (int64_t d : dims)
            if (d < 0) throw std::invalid_argument("Shape: negative dimension in " + str());
    }

    int64_t n() const { return dims[0]; }
    int64_t c() const { return dims[1]; }
    int64_t h() const { return dims[2]; }
    int64_t w() const { return dims[3]; }
    int64_t count() const { return dims[0] * dims[1] * dims[2] * dims[3]; }

    bool operator==(const Shape& o) const { return dims == o.dims; }
    bool operator!=(const Shape& o) const { return dims != o.dims; }

    std::string str() const {
        std::ostringstream os;
        os << "(" << dims[0] << ", " << dims[1] << ", " << dims[2] << ", " << dims[3] << ")";
        return os.str();
    }
};

// Dense row-major (N, C, H, W) tensor.
template <typename T>
struct Tensor {
    Shape shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(const Shape& s) : shape(s), data(static_cast<size_t>(s.count()), T(0)) {}
    Tensor(int64_t n, int64_t c, int64_t h, int64_t w) : Tensor(Shape(n, c, h, w)) {}

    T& operator()(int64_t n, int64_t c, int64_t h, int64_t w) {
        return data[static_cast<size_t>(((n * shape.c() + c) * shape.h() + h) * shape.w() + w)];
    }
    const T& operator()(int64_t n, int64_t c, int64_t h, int64_t w) const {
        return data[static_cast<size_t>(((n * shape.c() + c) * shape.h() + h) * shape.w() + w)];
    }

    T* plane(int64_t n, int64_t c) { return data.data() + ((n * shape.c() + c) * shape.h() * shape.w()); }
    const T* plane(int64_t n, int64_t c) const {
        return data.data() + ((n * shape.c() + c) * shape.h() * shape.w());
    }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

template <typename T>
void require_finite(const Tensor<T>& t, const char* what) {
    if (!t.all_finite()) throw std::runtime_error(std::string(what) + ": non-finite value");
}

enum class EwOp { add, sub, mul };

template <typename T>
Tensor<T> elementwise(const Tensor<T>& a, const Tensor<T>& b, EwOp op) {
    if (a.shape != b.shape)
        throw std::invalid_argument("elementwise: shape mismatch " + a.shape.str() + " vs " + b.shape.str());
    Tensor<T> out(a.shape);
    const size_t n = a.data.size();
    switch (op) {
        case EwOp::add:
            for (size_t i = 0; i < n; ++i) out.data[i] = a.data[i] + b.data[i];
            break;
        case EwOp::sub:
            for (size_t i = 0; i < n; ++i) out.data[i] = a.data[i] - b.data[i];
            break;
        case EwOp::mul:
            for (size_t i = 0; i < n; ++i) out.data[i] = a.data[i] * b.data[i];
            break;
    }
    return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) { return elementwise(a, b, EwOp::add); }
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) { return elementwise(a, b, EwOp::sub); }
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) { return elementwise(a, b, EwOp::mul); }

// Matrices are (1, 1, R, K) tensors. Accumulation runs k ascending so repeated
// runs are bit-identical.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape.n() != 1 || a.shape.c() != 1 || b.shape.n() != 1 || b.shape.c() != 1)
        throw std::invalid_argument("matmul: operands must be (1,1,R,K) matrices");
    const int64_t R = a.shape.h(), K = a.shape.w(), S = b.shape.w();
    if (b.shape.h() != K)
        throw std::invalid_argument("matmul: inner dims differ: " + a.shape.str() + " vs " + b.shape.str());
    Tensor<T> out(1, 1, R, S);
    for (int64_t r = 0; r < R; ++r)
        for (int64_t s = 0; s < S; ++s) {
            T acc = T(0);
            for (int64_t k = 0; k < K; ++k) acc += a(0, 0, r, k) * b(0, 0, k, s);
            out(0, 0, r, s) = acc;
        }
    return out;
}

// out[n][c][h][w] = t[n][c][(h - k) mod H][w]; k may be negative or exceed H.
template <typename T>
Tensor<T> cyclic_shift_rows(const Tensor<T>& t, int64_t k) {
    const int64_t H = t.shape.h();
    if (H == 0) return t;
    Tensor<T> out(t.shape);
    const int64_t W = t.shape.w();
    int64_t kk = ((k % H) + H) % H;
    for (int64_t n = 0; n < t.shape.n(); ++n)
        for (int64_t c = 0; c < t.shape.c(); ++c)
            for (int64_t h = 0; h < H; ++h) {
                const int64_t src = (h - kk + H) % H;
                const T* in_row = t.plane(n, c) + src * W;
                T* out_row = out.plane(n, c) + h * W;
                for (int64_t w = 0; w < W; ++w) out_row[w] = in_row[w];
            }
    return out;
}

}  // namespace cycnn
