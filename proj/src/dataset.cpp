#include "cycnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cycnn/rng.hpp"

namespace cycnn {

namespace {

constexpr double kPi = 3.14159265358979323846;

uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in)
        throw std::runtime_error("idx: truncated header at byte offset " +
                                 std::to_string(static_cast<long long>(in.tellg())) + " in " + path);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

}  // namespace

ImageGrid resize_bilinear(const ImageGrid& img, int out_h, int out_w) {
    ImageGrid out(img.channels, out_h, out_w);
    std::vector<float> sample(img.channels);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) {
            // Align pixel edges: output (x, y) center maps to input coords.
            const double sx = (x + 0.5) * img.width / out_w - 0.5;
            const double sy = (y + 0.5) * img.height / out_h - 0.5;
            bilinear_sample(img, std::clamp(sx, 0.0, img.width - 1.0),
                            std::clamp(sy, 0.0, img.height - 1.0), sample.data());
            for (int c = 0; c < img.channels; ++c) out.at(c, y, x) = sample[c];
        }
    return out;
}

LabeledDataset load_mnist(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw std::runtime_error("mnist: cannot open " + images_path);
    if (read_be32(imgs, images_path) != 0x00000803u)
        throw std::runtime_error("idx: bad image magic at byte offset 0 in " + images_path);
    const uint32_t count = read_be32(imgs, images_path);
    const uint32_t rows = read_be32(imgs, images_path);
    const uint32_t cols = read_be32(imgs, images_path);

    std::ifstream labs(labels_path, std::ios::binary);
    if (!labs) throw std::runtime_error("mnist: cannot open " + labels_path);
    if (read_be32(labs, labels_path) != 0x00000801u)
        throw std::runtime_error("idx: bad label magic at byte offset 0 in " + labels_path);
    const uint32_t lab_count = read_be32(labs, labels_path);
    if (lab_count != count)
        throw std::runtime_error("mnist: image/label count mismatch: " + std::to_string(count) +
                                 " vs " + std::to_string(lab_count));

    LabeledDataset ds;
    ds.class_count = 10;
    std::vector<unsigned char> buf(static_cast<size_t>(rows) * cols);
    for (uint32_t i = 0; i < count; ++i) {
        imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!imgs)
            throw std::runtime_error("idx: truncated image data at byte offset " +
                                     std::to_string(16 + static_cast<long long>(i) * rows * cols) +
                                     " in " + images_path);
        ImageGrid img(1, static_cast<int>(rows), static_cast<int>(cols));
        for (size_t p = 0; p < buf.size(); ++p) img.pix[p] = buf[p] / 255.0f;
        if (rows != 32 || cols != 32) img = resize_bilinear(img, 32, 32);
        ds.images.push_back(std::move(img));
        char lb;
        labs.read(&lb, 1);
        if (!labs)
            throw std::runtime_error("idx: truncated label data at byte offset " +
                                     std::to_string(8 + static_cast<long long>(i)) + " in " + labels_path);
        ds.labels.push_back(static_cast<unsigned char>(lb));
    }
    return ds;
}

LabeledDataset load_cifar10(const std::vector<std::string>& batch_paths) {
    constexpr size_t kRecord = 3073;
    LabeledDataset ds;
    ds.class_count = 10;
    for (const auto& path : batch_paths) {
        std::ifstream in(path, std::ios::binary | std::ios::ate);
        if (!in) throw std::runtime_error("cifar10: cannot open " + path);
        const auto size = static_cast<size_t>(in.tellg());
        if (size % kRecord != 0)
            throw std::runtime_error("cifar10: file size " + std::to_string(size) +
                                     " is not a multiple of 3073 in " + path);
        in.seekg(0);
        std::vector<unsigned char> rec(kRecord);
        const size_t n = size / kRecord;
        for (size_t i = 0; i < n; ++i) {
            in.read(reinterpret_cast<char*>(rec.data()), kRecord);
            if (!in) throw std::runtime_error("cifar10: read failed in " + path);
            ds.labels.push_back(rec[0]);
            ImageGrid img(3, 32, 32);
            for (size_t p = 0; p < 3072; ++p) img.pix[p] = rec[1 + p] / 255.0f;
            ds.images.push_back(std::move(img));
        }
    }
    return ds;
}

LabeledDataset synth_dataset(int n, int classes, uint64_t seed, int size) {
    if (n < 1 || classes < 1) throw std::invalid_argument("synth_dataset: n and classes must be >= 1");
    LabeledDataset ds;
    ds.class_count = classes;
    const double R = size / 2.0;
    const double cx = (size - 1) / 2.0, cy = (size - 1) / 2.0;
    for (int i = 0; i < n; ++i) {
        const int label = i % classes;  // balanced, round-robin
        Rng rng = Rng::derive(seed, static_cast<uint64_t>(i));
        // Class code: ring radius from the low bit, and the angular spacing of
        // a bar pair from the rest. Both bars carry the same brightness for
        // every class, so pooled intensity leaks nothing; telling spacings
        // apart requires relating the two bars across the phi axis.
        const double ring_r = (label % 2 == 0 ? 0.38 : 0.68) * R;
        const double spacing = kPi / (1 + label / 2);  // pi, pi/2, pi/3, ...
        const double jitter_r = ring_r + rng.uniform(-0.6, 0.6);
        const double amp = 0.75 + 0.25 * rng.uniform();
        const double bar_w = 0.16 + 0.04 * rng.uniform();
        // Canonical orientation: the pair is centered on the negative x-axis.
        const double centers[2] = {kPi - spacing / 2, kPi + spacing / 2};

        ImageGrid img(1, size, size);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double dx = x - cx, dy = y - cy;
                const double rho = std::sqrt(dx * dx + dy * dy);
                if (rho > 0.95 * R) continue;
                const double phi = std::atan2(dy, dx);
                double v = 0.0;
                const double dr = (rho - jitter_r) / 1.1;
                v += amp * std::exp(-dr * dr);
                if (rho > 0.18 * R) {
                    const double sigma = bar_w * R / 1.5;
                    for (double c0 : centers) {
                        // Arc-length offset to the bar center, wrapped mod 2*pi.
                        double dphi = std::fmod(phi - c0, 2 * kPi);
                        if (dphi < -kPi) dphi += 2 * kPi;
                        if (dphi > kPi) dphi -= 2 * kPi;
                        const double da = dphi * rho;
                        v += amp * std::exp(-(da * da) / (2.0 * sigma * sigma));
                    }
                }
                v += 0.04 * rng.normal();
                img.at(0, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        ds.images.push_back(std::move(img));
        ds.labels.push_back(label);
    }
    return ds;
}

LabeledDataset augment(const LabeledDataset& ds, const AugmentSpec& spec) {
    if (spec.mode == AugmentMode::none) return ds;
    LabeledDataset out;
    out.class_count = ds.class_count;
    out.labels = ds.labels;
    out.images.reserve(ds.images.size());
    const double pi2 = 6.28318530717958647692;
    for (size_t i = 0; i < ds.images.size(); ++i) {
        Rng rng = Rng::derive(spec.seed, static_cast<uint64_t>(i));
        ImageGrid img = ds.images[i];
        if (spec.mode == AugmentMode::rotate || spec.mode == AugmentMode::rotate_translate)
            img = rotate_image(img, rng.uniform(0.0, pi2));
        if (spec.mode == AugmentMode::translate || spec.mode == AugmentMode::rotate_translate) {
            const int max_dx = img.width / 4, max_dy = img.height / 4;
            const int dx = static_cast<int>(rng.uniform_int(2 * max_dx + 1)) - max_dx;
            const int dy = static_cast<int>(rng.uniform_int(2 * max_dy + 1)) - max_dy;
            img = translate_image(img, dx, dy);
        }
        out.images.push_back(std::move(img));
    }
    return out;
}

LabeledDataset rotated_test_set(const LabeledDataset& ds, uint64_t seed) {
    return augment(ds, AugmentSpec{AugmentMode::rotate, seed});
}

ChannelStats compute_channel_stats(const LabeledDataset& ds) {
    if (ds.images.empty()) throw std::invalid_argument("compute_channel_stats: empty dataset");
    const int channels = ds.images[0].channels;
    ChannelStats st;
    st.mean.assign(channels, 0.0);
    st.stddev.assign(channels, 0.0);
    std::vector<double> sum(channels, 0.0), sum2(channels, 0.0);
    std::vector<int64_t> count(channels, 0);
    for (const auto& img : ds.images)
        for (int c = 0; c < channels; ++c)
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x) {
                    const double v = img.at(c, y, x);
                    sum[c] += v;
                    sum2[c] += v * v;
                    ++count[c];
                }
    for (int c = 0; c < channels; ++c) {
        st.mean[c] = sum[c] / count[c];
        const double var = sum2[c] / count[c] - st.mean[c] * st.mean[c];
        st.stddev[c] = std::sqrt(std::max(var, 1e-12));
    }
    return st;
}

void apply_standardize(LabeledDataset& ds, const ChannelStats& stats) {
    for (auto& img : ds.images)
        for (int c = 0; c < img.channels; ++c)
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x)
                    img.at(c, y, x) =
                        static_cast<float>((img.at(c, y, x) - stats.mean[c]) / stats.stddev[c]);
}

LabeledDataset remap_labels(const LabeledDataset& ds, const std::vector<int>& remap) {
    LabeledDataset out;
    out.images = ds.images;
    for (int lab : ds.labels) {
        if (lab < 0 || lab >= static_cast<int>(remap.size()))
            throw std::invalid_argument("remap_labels: label out of remap range");
        out.labels.push_back(remap[static_cast<size_t>(lab)]);
    }
    int max_label = 0;
    for (int lab : remap) max_label = std::max(max_label, lab);
    out.class_count = max_label + 1;
    return out;
}

LabeledDataset to_polar_dataset(const LabeledDataset& ds, PolarConfig::Mode mode) {
    LabeledDataset out;
    out.class_count = ds.class_count;
    out.labels = ds.labels;
    out.images.reserve(ds.images.size());
    for (const auto& img : ds.images)
        out.images.push_back(to_polar(img, default_polar_config(img, mode)));
    return out;
}

}  // namespace cycnn
