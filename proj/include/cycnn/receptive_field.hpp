#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "cycnn/conv.hpp"

namespace cycnn {

struct RfLayerSpec {
    int64_t kernel_w = 1;
    int64_t kernel_h = 1;
    int64_t stride_w = 1;
    int64_t stride_h = 1;
};

struct RfSize {
    int64_t w = 1;
    int64_t h = 1;
};

// Backward recurrence through the stack:
//   w_prev = s_w * w + k_w - s_w,  h_prev likewise.
// Returns the receptive field of a single final-layer unit in each earlier
// layer's grid, ordered from the layer just below the deepest one back to the
// input image (result[i] = RF seen in the input of stack[size-1-i]).
inline std::vector<RfSize> rf_propagate(const std::vector<RfLayerSpec>& stack,
                                        RfSize seed = {1, 1}) {
    if (stack.empty()) throw std::invalid_argument("rf_propagate: empty stack");
    std::vector<RfSize> out;
    RfSize rf = seed;
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        if (it->kernel_w < 1 || it->kernel_h < 1 || it->stride_w < 1 || it->stride_h < 1)
            throw std::invalid_argument("rf_propagate: kernel/stride must be >= 1");
        rf.w = it->stride_w * rf.w + it->kernel_w - it->stride_w;
        rf.h = it->stride_h * rf.h + it->kernel_h - it->stride_h;
        out.push_back(rf);
    }
    return out;
}

struct BoundaryCoverage {
    std::vector<int64_t> rows_reached;  // per final-layer output row
    int64_t final_height = 0;
};

// For each output row of the final layer, counts the distinct input rows that
// can reach it. Layers use same-padding (pad = (kernel-1)/2, odd kernels);
// in cylindrical mode row indices wrap mod the layer height.
inline BoundaryCoverage boundary_coverage(const std::vector<RfLayerSpec>& stack, int64_t input_h,
                                          PadMode pad_mode) {
    if (stack.empty()) throw std::invalid_argument("boundary_coverage: empty stack");
    std::vector<int64_t> heights{input_h};
    for (const auto& l : stack) {
        if (l.kernel_h % 2 != 1)
            throw std::invalid_argument("boundary_coverage: kernels must be odd");
        const int64_t pad = (l.kernel_h - 1) / 2;
        const int64_t h = (heights.back() + 2 * pad - l.kernel_h) / l.stride_h + 1;
        heights.push_back(h);
    }

    BoundaryCoverage cov;
    cov.final_height = heights.back();
    for (int64_t row = 0; row < cov.final_height; ++row) {
        std::set<int64_t> reach{row};
        for (size_t li = stack.size(); li-- > 0;) {
            const auto& l = stack[li];
            const int64_t pad = (l.kernel_h - 1) / 2;
            const int64_t prev_h = heights[li];
            std::set<int64_t> prev;
            for (int64_t r : reach)
                for (int64_t u = 0; u < l.kernel_h; ++u) {
                    int64_t src = r * l.stride_h + u - pad;
                    if (pad_mode == PadMode::cylindrical)
                        src = ((src % prev_h) + prev_h) % prev_h;
                    else if (src < 0 || src >= prev_h)
                        continue;  // falls in zero padding
                    prev.insert(src);
                }
            reach.swap(prev);
        }
        cov.rows_reached.push_back(static_cast<int64_t>(reach.size()));
    }
    return cov;
}

}  // namespace cycnn
