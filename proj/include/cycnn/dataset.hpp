#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cycnn/polar.hpp"
#include "cycnn/tensor.hpp"

namespace cycnn {

struct LabeledDataset {
    std::vector<ImageGrid> images;
    std::vector<int> labels;
    int class_count = 0;
};

enum class AugmentMode { none, rotate, translate, rotate_translate };

struct AugmentSpec {
    AugmentMode mode = AugmentMode::none;
    uint64_t seed = 0;
};

// IDX format (big-endian): magic 0x00000803 for images, 0x00000801 for
// labels. 28x28 inputs are resized to 32x32 by bilinear interpolation and
// scaled to [0, 1].
LabeledDataset load_mnist(const std::string& images_path, const std::string& labels_path);

// CIFAR-10 binary batches: 3073 bytes per record, 1 label byte followed by
// 3072 channel-major pixels.
LabeledDataset load_cifar10(const std::vector<std::string>& batch_paths);

// Deterministic oriented-glyph dataset: classes are (ring radius, angular
// spacing of a bar pair) combinations, distinguishable under rotation. All
// images share a canonical orientation; rotate at test time to probe
// invariance.
LabeledDataset synth_dataset(int n, int classes, uint64_t seed, int size = 32);

// Per-image independent draws from streams derived from (seed, index);
// rotate_translate applies rotation then translation.
LabeledDataset augment(const LabeledDataset& ds, const AugmentSpec& spec);

// augment(rotate) applied to test data (the "-r" datasets).
LabeledDataset rotated_test_set(const LabeledDataset& ds, uint64_t seed);

struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

// Training-set statistics; apply_standardize uses them on val/test too.
ChannelStats compute_channel_stats(const LabeledDataset& ds);
void apply_standardize(LabeledDataset& ds, const ChannelStats& stats);

// Generic label remap (e.g. merging classes 6 and 9 for rotated digits).
// remap[i] is the new label of old class i; class_count becomes max+1.
LabeledDataset remap_labels(const LabeledDataset& ds, const std::vector<int>& remap);

// Converts every image to its (log-)polar representation with default config.
LabeledDataset to_polar_dataset(const LabeledDataset& ds, PolarConfig::Mode mode);

ImageGrid resize_bilinear(const ImageGrid& img, int out_h, int out_w);

// Packs images[indices] into an (N, C, H, W) batch.
template <typename T>
Tensor<T> make_batch(const LabeledDataset& ds, const std::vector<int64_t>& indices) {
    const ImageGrid& first = ds.images.at(static_cast<size_t>(indices.at(0)));
    Tensor<T> out(static_cast<int64_t>(indices.size()), first.channels, first.height, first.width);
    for (size_t i = 0; i < indices.size(); ++i) {
        const ImageGrid& img = ds.images[static_cast<size_t>(indices[i])];
        for (int c = 0; c < img.channels; ++c)
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x)
                    out(static_cast<int64_t>(i), c, y, x) = static_cast<T>(img.at(c, y, x));
    }
    return out;
}

}  // namespace cycnn
