#pragma once

#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cycnn/conv.hpp"
#include "cycnn/rng.hpp"
#include "cycnn/tensor.hpp"
#include "cycnn/winograd.hpp"

namespace cycnn {

template <typename T>
struct ParamView {
    T* value;
    T* grad;
    int64_t count;
};

enum class LayerKind : uint8_t { conv = 0, relu = 1, maxpool = 2, flatten = 3, linear = 4, channel_norm = 5 };

template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x, bool training) = 0;
    virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
    virtual std::vector<ParamView<T>> params() { return {}; }
    virtual LayerKind kind() const = 0;
    virtual std::unique_ptr<Layer<T>> clone() const = 0;
};

template <typename T>
class ConvLayer final : public Layer<T> {
public:
    ConvSpec spec;
    FilterBank<T> filters;
    Tensor<T> grad_w;
    std::vector<T> grad_b;

    ConvLayer(const ConvSpec& s) : spec(s), filters(s.out_channels, s.in_channels, s.kernel_h, s.kernel_w) {
        spec.validate();
        grad_w = Tensor<T>(filters.weights.shape);
        grad_b.assign(static_cast<size_t>(s.out_channels), T(0));
    }

    Tensor<T> forward(const Tensor<T>& x, bool) override {
        cached_input_ = x;
        return conv2d(x, filters, spec);
    }

    // Backward always goes through the direct algorithm, also when the
    // forward ran winograd.
    Tensor<T> backward(const Tensor<T>& grad_out) override {
        ConvGrads<T> g = conv2d_backward(cached_input_, filters, grad_out, spec);
        grad_w = std::move(g.grad_w);
        grad_b = std::move(g.grad_b);
        return std::move(g.grad_x);
    }

    std::vector<ParamView<T>> params() override {
        return {{filters.weights.data.data(), grad_w.data.data(), filters.weights.shape.count()},
                {filters.bias.data(), grad_b.data(), static_cast<int64_t>(filters.bias.size())}};
    }

    LayerKind kind() const override { return LayerKind::conv; }
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<ConvLayer<T>>(*this); }

private:
    Tensor<T> cached_input_;
};

template <typename T>
class ReluLayer final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, bool) override {
        mask_.assign(x.data.size(), 0);
        Tensor<T> out(x.shape);
        for (size_t i = 0; i < x.data.size(); ++i) {
            if (x.data[i] > T(0)) {
                out.data[i] = x.data[i];
                mask_[i] = 1;
            }
        }
        return out;
    }
    Tensor<T> backward(const Tensor<T>& grad_out) override {
        Tensor<T> gx(grad_out.shape);
        for (size_t i = 0; i < grad_out.data.size(); ++i)
            gx.data[i] = mask_[i] ? grad_out.data[i] : T(0);
        return gx;
    }
    LayerKind kind() const override { return LayerKind::relu; }
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<ReluLayer<T>>(*this); }

private:
    std::vector<uint8_t> mask_;
};

// 2x2 max pooling, stride 2. Ties give the gradient to the first occurrence
// in row-major scan of the window.
template <typename T>
class MaxPoolLayer final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, bool) override {
        if (x.shape.h() % 2 != 0 || x.shape.w() % 2 != 0)
            throw std::invalid_argument("MaxPool: spatial dims must be even, got " + x.shape.str());
        in_shape_ = x.shape;
        const int64_t OH = x.shape.h() / 2, OW = x.shape.w() / 2, W = x.shape.w();
        Tensor<T> out(x.shape.n(), x.shape.c(), OH, OW);
        argmax_.assign(out.data.size(), 0);
        size_t oi = 0;
        for (int64_t n = 0; n < x.shape.n(); ++n)
            for (int64_t c = 0; c < x.shape.c(); ++c) {
                const T* ip = x.plane(n, c);
                for (int64_t i = 0; i < OH; ++i)
                    for (int64_t j = 0; j < OW; ++j, ++oi) {
                        int64_t best = (2 * i) * W + 2 * j;
                        T bv = ip[best];
                        const int64_t cand[3] = {(2 * i) * W + 2 * j + 1, (2 * i + 1) * W + 2 * j,
                                                 (2 * i + 1) * W + 2 * j + 1};
                        for (int64_t idx : cand)
                            if (ip[idx] > bv) { bv = ip[idx]; best = idx; }
                        out.data[oi] = bv;
                        argmax_[oi] = best;
                    }
            }
        return out;
    }
    Tensor<T> backward(const Tensor<T>& grad_out) override {
        Tensor<T> gx(in_shape_);
        size_t oi = 0;
        const int64_t OH = grad_out.shape.h(), OW = grad_out.shape.w();
        for (int64_t n = 0; n < in_shape_.n(); ++n)
            for (int64_t c = 0; c < in_shape_.c(); ++c) {
                T* gp = gx.plane(n, c);
                for (int64_t i = 0; i < OH * OW; ++i, ++oi) gp[argmax_[oi]] += grad_out.data[oi];
            }
        return gx;
    }
    LayerKind kind() const override { return LayerKind::maxpool; }
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPoolLayer<T>>(*this); }

private:
    Shape in_shape_;
    std::vector<int64_t> argmax_;
};

template <typename T>
class FlattenLayer final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, bool) override {
        in_shape_ = x.shape;
        Tensor<T> out(x.shape.n(), x.shape.c() * x.shape.h() * x.shape.w(), 1, 1);
        out.data = x.data;
        return out;
    }
    Tensor<T> backward(const Tensor<T>& grad_out) override {
        Tensor<T> gx(in_shape_);
        gx.data = grad_out.data;
        return gx;
    }
    LayerKind kind() const override { return LayerKind::flatten; }
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<FlattenLayer<T>>(*this); }

private:
    Shape in_shape_;
};

template <typename T>
class LinearLayer final : public Layer<T> {
public:
    int64_t in_features, out_features;
    Tensor<T> weights;  // (1, 1, out_features, in_features)
    std::vector<T> bias;
    Tensor<T> grad_w;
    std::vector<T> grad_b;

    LinearLayer(int64_t in_f, int64_t out_f)
        : in_features(in_f), out_features(out_f), weights(1, 1, out_f, in_f),
          bias(static_cast<size_t>(out_f), T(0)), grad_w(1, 1, out_f, in_f),
          grad_b(static_cast<size_t>(out_f), T(0)) {}

    Tensor<T> forward(const Tensor<T>& x, bool) override {
        const int64_t F = x.shape.c() * x.shape.h() * x.shape.w();
        if (F != in_features)
            throw std::invalid_argument("Linear: input has " + std::to_string(F) + " features, expected " +
                                        std::to_string(in_features));
        cached_input_ = x;
        const int64_t N = x.shape.n();
        Tensor<T> out(N, out_features, 1, 1);
#pragma omp parallel for schedule(static)
        for (int64_t n = 0; n < N; ++n) {
            const T* xi = x.data.data() + n * in_features;
            for (int64_t o = 0; o < out_features; ++o) {
                T acc = bias[static_cast<size_t>(o)];
                const T* w = weights.data.data() + o * in_features;
                for (int64_t k = 0; k < in_features; ++k) acc += w[k] * xi[k];
                out.data[static_cast<size_t>(n * out_features + o)] = acc;
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) override {
        const int64_t N = cached_input_.shape.n();
        std::fill(grad_w.data.begin(), grad_w.data.end(), T(0));
        std::fill(grad_b.begin(), grad_b.end(), T(0));
        for (int64_t n = 0; n < N; ++n) {
            const T* xi = cached_input_.data.data() + n * in_features;
            const T* go = grad_out.data.data() + n * out_features;
            for (int64_t o = 0; o < out_features; ++o) {
                grad_b[static_cast<size_t>(o)] += go[o];
                T* gw = grad_w.data.data() + o * in_features;
                for (int64_t k = 0; k < in_features; ++k) gw[k] += go[o] * xi[k];
            }
        }
        Tensor<T> gx(cached_input_.shape);
#pragma omp parallel for schedule(static)
        for (int64_t n = 0; n < N; ++n) {
            const T* go = grad_out.data.data() + n * out_features;
            T* gxi = gx.data.data() + n * in_features;
            for (int64_t o = 0; o < out_features; ++o) {
                const T* w = weights.data.data() + o * in_features;
                const T g = go[o];
                for (int64_t k = 0; k < in_features; ++k) gxi[k] += g * w[k];
            }
        }
        return gx;
    }

    std::vector<ParamView<T>> params() override {
        return {{weights.data.data(), grad_w.data.data(), weights.shape.count()},
                {bias.data(), grad_b.data(), static_cast<int64_t>(bias.size())}};
    }
    LayerKind kind() const override { return LayerKind::linear; }
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<LinearLayer<T>>(*this); }

private:
    Tensor<T> cached_input_;
};

// Affine-free per-channel batch standardization with running statistics.
template <typename T>
class ChannelNormLayer final : public Layer<T> {
public:
    int64_t channels;
    double eps = 1e-5;
    double momentum = 0.1;
    std::vector<T> running_mean, running_var;

    explicit ChannelNormLayer(int64_t c)
        : channels(c), running_mean(static_cast<size_t>(c), T(0)), running_var(static_cast<size_t>(c), T(1)) {}

    Tensor<T> forward(const Tensor<T>& x, bool training) override {
        if (x.shape.c() != channels)
            throw std::invalid_argument("ChannelNorm: channel mismatch, input " + x.shape.str());
        const int64_t N = x.shape.n(), HW = x.shape.h() * x.shape.w();
        const int64_t M = N * HW;
        Tensor<T> out(x.shape);
        xhat_ = Tensor<T>(x.shape);
        inv_std_.assign(static_cast<size_t>(channels), T(0));
        for (int64_t c = 0; c < channels; ++c) {
            double mean, var;
            if (training) {
                double s = 0, s2 = 0;
                for (int64_t n = 0; n < N; ++n) {
                    const T* p = x.plane(n, c);
                    for (int64_t i = 0; i < HW; ++i) s += p[i];
                }
                mean = s / M;
                for (int64_t n = 0; n < N; ++n) {
                    const T* p = x.plane(n, c);
                    for (int64_t i = 0; i < HW; ++i) {
                        const double d = p[i] - mean;
                        s2 += d * d;
                    }
                }
                var = s2 / M;
                running_mean[c] = static_cast<T>((1.0 - momentum) * running_mean[c] + momentum * mean);
                running_var[c] = static_cast<T>((1.0 - momentum) * running_var[c] + momentum * var);
            } else {
                mean = running_mean[c];
                var = running_var[c];
            }
            const double inv = 1.0 / std::sqrt(var + eps);
            inv_std_[static_cast<size_t>(c)] = static_cast<T>(inv);
            for (int64_t n = 0; n < N; ++n) {
                const T* p = x.plane(n, c);
                T* h = xhat_.plane(n, c);
                T* o = out.plane(n, c);
                for (int64_t i = 0; i < HW; ++i) {
                    h[i] = static_cast<T>((p[i] - mean) * inv);
                    o[i] = h[i];
                }
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) override {
        const int64_t N = grad_out.shape.n(), HW = grad_out.shape.h() * grad_out.shape.w();
        const int64_t M = N * HW;
        Tensor<T> gx(grad_out.shape);
        for (int64_t c = 0; c < channels; ++c) {
            double sum_g = 0, sum_gh = 0;
            for (int64_t n = 0; n < N; ++n) {
                const T* g = grad_out.plane(n, c);
                const T* h = xhat_.plane(n, c);
                for (int64_t i = 0; i < HW; ++i) {
                    sum_g += g[i];
                    sum_gh += static_cast<double>(g[i]) * h[i];
                }
            }
            const double inv = inv_std_[static_cast<size_t>(c)];
            for (int64_t n = 0; n < N; ++n) {
                const T* g = grad_out.plane(n, c);
                const T* h = xhat_.plane(n, c);
                T* o = gx.plane(n, c);
                for (int64_t i = 0; i < HW; ++i)
                    o[i] = static_cast<T>(inv / M * (M * g[i] - sum_g - h[i] * sum_gh));
            }
        }
        return gx;
    }

    LayerKind kind() const override { return LayerKind::channel_norm; }
    std::unique_ptr<Layer<T>> clone() const override {
        return std::make_unique<ChannelNormLayer<T>>(*this);
    }

private:
    Tensor<T> xhat_;
    std::vector<T> inv_std_;
};

template <typename T>
struct Model {
    std::vector<std::unique_ptr<Layer<T>>> layers;
    std::string name;

    Model() = default;
    Model(const Model& o) : name(o.name) {
        layers.reserve(o.layers.size());
        for (const auto& l : o.layers) layers.push_back(l->clone());
    }
    Model& operator=(const Model& o) {
        Model tmp(o);
        std::swap(layers, tmp.layers);
        std::swap(name, tmp.name);
        return *this;
    }
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    Tensor<T> forward(const Tensor<T>& batch, bool training) {
        Tensor<T> a = batch;
        for (size_t i = 0; i < layers.size(); ++i) {
            try {
                a = layers[i]->forward(a, training);
            } catch (const std::exception& e) {
                throw std::runtime_error("layer " + std::to_string(i) + " (" +
                                         layer_kind_name(layers[i]->kind()) + "): " + e.what());
            }
        }
        require_finite(a, "forward");
        return a;
    }

    void backward(const Tensor<T>& grad_logits) {
        Tensor<T> g = grad_logits;
        for (size_t i = layers.size(); i-- > 0;) g = layers[i]->backward(g);
    }

    std::vector<ParamView<T>> params() {
        std::vector<ParamView<T>> out;
        for (auto& l : layers)
            for (auto& p : l->params()) out.push_back(p);
        return out;
    }

    static const char* layer_kind_name(LayerKind k) {
        switch (k) {
            case LayerKind::conv: return "conv";
            case LayerKind::relu: return "relu";
            case LayerKind::maxpool: return "maxpool";
            case LayerKind::flatten: return "flatten";
            case LayerKind::linear: return "linear";
            case LayerKind::channel_norm: return "channel_norm";
        }
        return "?";
    }
};

template <typename T>
int64_t count_params(Model<T>& model) {
    int64_t n = 0;
    for (auto& p : model.params()) n += p.count;
    return n;
}

// Switches every conv layer to cylindrical padding; weights untouched. Every
// conv must be spatial-preserving (odd kernel, pad = (k-1)/2, stride 1).
template <typename T>
Model<T> convert_to_cycnn(const Model<T>& model) {
    Model<T> out(model);
    for (size_t i = 0; i < out.layers.size(); ++i) {
        auto* conv = dynamic_cast<ConvLayer<T>*>(out.layers[i].get());
        if (!conv) continue;
        const ConvSpec& s = conv->spec;
        if (s.kernel_h % 2 != 1 || s.pad != (s.kernel_h - 1) / 2 || s.stride_h != 1 || s.stride_w != 1)
            throw std::invalid_argument("convert_to_cycnn: layer " + std::to_string(i) +
                                        " is not spatial-preserving");
        conv->spec.pad_mode = PadMode::cylindrical;
    }
    out.name = "Cy" + out.name;
    return out;
}

// Cross-entropy over softmax: loss = mean over batch of -log softmax[label],
// grad = (softmax - onehot) / batch.
template <typename T>
std::pair<double, Tensor<T>> loss_and_grad(const Tensor<T>& logits, const std::vector<int>& labels) {
    const int64_t N = logits.shape.n();
    const int64_t C = logits.shape.c() * logits.shape.h() * logits.shape.w();
    if (static_cast<int64_t>(labels.size()) != N)
        throw std::invalid_argument("loss_and_grad: batch/label count mismatch");
    Tensor<T> grad(logits.shape);
    double loss = 0;
    for (int64_t n = 0; n < N; ++n) {
        if (labels[n] < 0 || labels[n] >= C)
            throw std::invalid_argument("loss_and_grad: label " + std::to_string(labels[n]) +
                                        " out of range [0, " + std::to_string(C) + ")");
        const T* z = logits.data.data() + n * C;
        double zmax = z[0];
        for (int64_t c = 1; c < C; ++c) zmax = std::max(zmax, static_cast<double>(z[c]));
        double sum = 0;
        for (int64_t c = 0; c < C; ++c) sum += std::exp(z[c] - zmax);
        const double logsum = std::log(sum) + zmax;
        loss += logsum - z[labels[n]];
        T* g = grad.data.data() + n * C;
        for (int64_t c = 0; c < C; ++c) {
            const double p = std::exp(z[c] - logsum);
            g[c] = static_cast<T>((p - (c == labels[n] ? 1.0 : 0.0)) / N);
        }
    }
    return {loss / N, grad};
}

// g' = grad + wd * param; v <- momentum * v + g'; param <- param - lr * v.
template <typename T>
void sgd_step(std::vector<ParamView<T>>& params, std::vector<std::vector<T>>& velocity, double lr,
              double momentum, double weight_decay) {
    if (velocity.size() != params.size()) {
        velocity.clear();
        for (auto& p : params) velocity.emplace_back(static_cast<size_t>(p.count), T(0));
    }
    for (size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        auto& v = velocity[i];
        for (int64_t k = 0; k < p.count; ++k) {
            const T g = p.grad[k] + static_cast<T>(weight_decay) * p.value[k];
            v[static_cast<size_t>(k)] = static_cast<T>(momentum) * v[static_cast<size_t>(k)] + g;
            p.value[k] -= static_cast<T>(lr) * v[static_cast<size_t>(k)];
        }
    }
}

// Fan-in scaled uniform init (+-sqrt(6/fan_in)) seeded by the run seed.
template <typename T>
void init_weights(Model<T>& model, uint64_t seed) {
    Rng rng(seed);
    for (auto& l : model.layers) {
        if (auto* conv = dynamic_cast<ConvLayer<T>*>(l.get())) {
            const double fan_in =
                static_cast<double>(conv->spec.in_channels * conv->spec.kernel_h * conv->spec.kernel_w);
            const double bound = std::sqrt(6.0 / fan_in);
            for (auto& w : conv->filters.weights.data) w = static_cast<T>(rng.uniform(-bound, bound));
            for (auto& b : conv->filters.bias) b = T(0);
        } else if (auto* lin = dynamic_cast<LinearLayer<T>*>(l.get())) {
            const double bound = std::sqrt(6.0 / static_cast<double>(lin->in_features));
            for (auto& w : lin->weights.data) w = static_cast<T>(rng.uniform(-bound, bound));
            for (auto& b : lin->bias) b = T(0);
        }
    }
}

// VGG-style desk-scale reference architecture.
template <typename T>
Model<T> build_minivgg(int64_t in_channels, int64_t classes, int64_t input_hw, PadMode pad_mode,
                       ConvAlgo algo) {
    auto conv = [&](int64_t in_c, int64_t out_c) {
        ConvSpec s;
        s.in_channels = in_c;
        s.out_channels = out_c;
        s.kernel_h = s.kernel_w = 3;
        s.stride_h = s.stride_w = 1;
        s.pad = 1;
        s.pad_mode = pad_mode;
        s.algorithm = algo;
        return std::make_unique<ConvLayer<T>>(s);
    };
    Model<T> m;
    m.name = "MiniVGG";
    const int64_t widths[3][2] = {{32, 32}, {64, 64}, {128, 128}};
    int64_t c = in_channels;
    for (int b = 0; b < 3; ++b) {
        for (int i = 0; i < 2; ++i) {
            m.layers.push_back(conv(c, widths[b][i]));
            c = widths[b][i];
            m.layers.push_back(std::make_unique<ChannelNormLayer<T>>(c));
            m.layers.push_back(std::make_unique<ReluLayer<T>>());
        }
        m.layers.push_back(std::make_unique<MaxPoolLayer<T>>());
    }
    const int64_t hw = input_hw / 8;
    m.layers.push_back(std::make_unique<FlattenLayer<T>>());
    m.layers.push_back(std::make_unique<LinearLayer<T>>(c * hw * hw, 256));
    m.layers.push_back(std::make_unique<ReluLayer<T>>());
    m.layers.push_back(std::make_unique<LinearLayer<T>>(256, classes));
    return m;
}

// ---- Checkpoint: magic "CYC1", little-endian raw buffers, bit-exact round
// ---- trip (save -> load -> save produces identical bytes).

namespace detail {

template <typename V>
void write_pod(std::ostream& os, const V& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}
template <typename V>
V read_pod(std::istream& is) {
    V v;
    is.read(reinterpret_cast<char*>(&v), sizeof(V));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}
template <typename V>
void write_buf(std::ostream& os, const std::vector<V>& v) {
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(V)));
}
template <typename V>
void read_buf(std::istream& is, std::vector<V>& v) {
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(V)));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
}

}  // namespace detail

template <typename T>
void save_model(Model<T>& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot write " + path);
    os.write("CYC1", 4);
    detail::write_pod(os, static_cast<uint8_t>(sizeof(T)));
    detail::write_pod(os, static_cast<uint32_t>(model.name.size()));
    os.write(model.name.data(), static_cast<std::streamsize>(model.name.size()));
    detail::write_pod(os, static_cast<uint32_t>(model.layers.size()));
    for (auto& l : model.layers) {
        detail::write_pod(os, static_cast<uint8_t>(l->kind()));
        if (auto* conv = dynamic_cast<ConvLayer<T>*>(l.get())) {
            const ConvSpec& s = conv->spec;
            for (int64_t v : {s.in_channels, s.out_channels, s.kernel_h, s.kernel_w, s.stride_h,
                              s.stride_w, s.pad})
                detail::write_pod(os, v);
            detail::write_pod(os, static_cast<uint8_t>(s.pad_mode));
            detail::write_pod(os, static_cast<uint8_t>(s.algorithm));
            detail::write_buf(os, conv->filters.weights.data);
            detail::write_buf(os, conv->filters.bias);
        } else if (auto* lin = dynamic_cast<LinearLayer<T>*>(l.get())) {
            detail::write_pod(os, lin->in_features);
            detail::write_pod(os, lin->out_features);
            detail::write_buf(os, lin->weights.data);
            detail::write_buf(os, lin->bias);
        } else if (auto* cn = dynamic_cast<ChannelNormLayer<T>*>(l.get())) {
            detail::write_pod(os, cn->channels);
            detail::write_pod(os, cn->eps);
            detail::write_pod(os, cn->momentum);
            detail::write_buf(os, cn->running_mean);
            detail::write_buf(os, cn->running_var);
        }
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

template <typename T>
Model<T> load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CYC1", 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const auto prec = detail::read_pod<uint8_t>(is);
    if (prec != sizeof(T))
        throw std::runtime_error("checkpoint: precision mismatch (file " + std::to_string(prec) +
                                 " bytes/elem, build " + std::to_string(sizeof(T)) + ")");
    const auto name_len = detail::read_pod<uint32_t>(is);
    Model<T> m;
    m.name.resize(name_len);
    is.read(m.name.data(), name_len);
    const auto layer_count = detail::read_pod<uint32_t>(is);
    for (uint32_t i = 0; i < layer_count; ++i) {
        const auto kind = static_cast<LayerKind>(detail::read_pod<uint8_t>(is));
        switch (kind) {
            case LayerKind::conv: {
                ConvSpec s;
                s.in_channels = detail::read_pod<int64_t>(is);
                s.out_channels = detail::read_pod<int64_t>(is);
                s.kernel_h = detail::read_pod<int64_t>(is);
                s.kernel_w = detail::read_pod<int64_t>(is);
                s.stride_h = detail::read_pod<int64_t>(is);
                s.stride_w = detail::read_pod<int64_t>(is);
                s.pad = detail::read_pod<int64_t>(is);
                s.pad_mode = static_cast<PadMode>(detail::read_pod<uint8_t>(is));
                s.algorithm = static_cast<ConvAlgo>(detail::read_pod<uint8_t>(is));
                auto layer = std::make_unique<ConvLayer<T>>(s);
                detail::read_buf(is, layer->filters.weights.data);
                detail::read_buf(is, layer->filters.bias);
                m.layers.push_back(std::move(layer));
                break;
            }
            case LayerKind::relu:
                m.layers.push_back(std::make_unique<ReluLayer<T>>());
                break;
            case LayerKind::maxpool:
                m.layers.push_back(std::make_unique<MaxPoolLayer<T>>());
                break;
            case LayerKind::flatten:
                m.layers.push_back(std::make_unique<FlattenLayer<T>>());
                break;
            case LayerKind::linear: {
                const auto in_f = detail::read_pod<int64_t>(is);
                const auto out_f = detail::read_pod<int64_t>(is);
                auto layer = std::make_unique<LinearLayer<T>>(in_f, out_f);
                detail::read_buf(is, layer->weights.data);
                detail::read_buf(is, layer->bias);
                m.layers.push_back(std::move(layer));
                break;
            }
            case LayerKind::channel_norm: {
                const auto c = detail::read_pod<int64_t>(is);
                auto layer = std::make_unique<ChannelNormLayer<T>>(c);
                layer->eps = detail::read_pod<double>(is);
                layer->momentum = detail::read_pod<double>(is);
                detail::read_buf(is, layer->running_mean);
                detail::read_buf(is, layer->running_var);
                m.layers.push_back(std::move(layer));
                break;
            }
            default:
                throw std::runtime_error("checkpoint: unknown layer tag");
        }
    }
    return m;
}

}  // namespace cycnn
