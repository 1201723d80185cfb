#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cycnn {

// Multi-channel raster image, values nominally in [0, 1]. Coordinates are
// (x = column, y = row); pixel centers sit at integer coordinates.
struct ImageGrid {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> pix;  // channel-major, row-major within a channel

    ImageGrid() = default;
    ImageGrid(int c, int h, int w) : channels(c), height(h), width(w),
                                     pix(static_cast<size_t>(c) * h * w, 0.0f) {
        if (c < 1 || h < 1 || w < 1) throw std::invalid_argument("ImageGrid: dims must be >= 1");
    }

    float& at(int c, int y, int x) { return pix[(static_cast<size_t>(c) * height + y) * width + x]; }
    float at(int c, int y, int x) const { return pix[(static_cast<size_t>(c) * height + y) * width + x]; }
};

struct PolarConfig {
    enum class Mode { polar, logpolar };
    Mode mode = Mode::polar;
    int out_height = 0;  // phi axis resolution
    int out_width = 0;   // rho axis resolution
    double rho_max = 0;  // bounding-circle radius in pixels
};

// Defaults: output dims preserve the input, rho_max is the radius of the
// largest circle fitting inside the image.
inline PolarConfig default_polar_config(const ImageGrid& img, PolarConfig::Mode mode) {
    PolarConfig cfg;
    cfg.mode = mode;
    cfg.out_height = img.height;
    cfg.out_width = img.width;
    cfg.rho_max = std::min(img.width, img.height) / 2.0;
    return cfg;
}

struct PolarPoint {
    double rho;
    double phi;  // in [0, 2*pi)
};

// Six-branch piecewise phi plus rho = sqrt(x^2+y^2). Returns nullopt at the
// origin, where phi is undefined.
inline std::optional<PolarPoint> cartesian_to_polar_point(double x, double y) {
    if (x == 0.0 && y == 0.0) return std::nullopt;
    const double pi = 3.14159265358979323846;
    const double rho = std::sqrt(x * x + y * y);
    double phi;
    if (x > 0.0 && y >= 0.0)
        phi = std::atan(y / x);
    else if (x == 0.0 && y > 0.0)
        phi = pi / 2.0;
    else if (x < 0.0)  // covers y >= 0 and y < 0, same formula
        phi = pi + std::atan(y / x);
    else if (x == 0.0 && y < 0.0)
        phi = 3.0 * pi / 2.0;
    else  // x > 0, y < 0
        phi = 2.0 * pi + std::atan(y / x);
    return PolarPoint{rho, phi};
}

// Bilinear blend of the four neighboring pixel centers; neighbors outside the
// image contribute 0.
inline void bilinear_sample(const ImageGrid& img, double x, double y, float* out) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    const double w00 = (1.0 - fx) * (1.0 - fy);
    const double w01 = fx * (1.0 - fy);
    const double w10 = (1.0 - fx) * fy;
    const double w11 = fx * fy;
    const bool in_x0 = x0 >= 0 && x0 < img.width;
    const bool in_x1 = x0 + 1 >= 0 && x0 + 1 < img.width;
    const bool in_y0 = y0 >= 0 && y0 < img.height;
    const bool in_y1 = y0 + 1 >= 0 && y0 + 1 < img.height;
    for (int c = 0; c < img.channels; ++c) {
        double v = 0.0;
        if (in_y0) {
            if (in_x0) v += w00 * img.at(c, y0, x0);
            if (in_x1) v += w01 * img.at(c, y0, x0 + 1);
        }
        if (in_y1) {
            if (in_x0) v += w10 * img.at(c, y0 + 1, x0);
            if (in_x1) v += w11 * img.at(c, y0 + 1, x0 + 1);
        }
        out[c] = static_cast<float>(v);
    }
}

// Sampling radius of output column c.
inline double polar_column_radius(const PolarConfig& cfg, int c) {
    const double t = (c + 0.5) / cfg.out_width;
    if (cfg.mode == PolarConfig::Mode::polar) return cfg.rho_max * t;
    return std::exp(std::log(cfg.rho_max) * t) - 1.0;
}

// Inverse-mapped resampling: output row r covers phi = 2*pi*r/out_height,
// column c covers the radius above. Row index increases with phi; when the
// result is written as an image file the rows appear top to bottom, so the
// phi axis reads downward on screen.
inline ImageGrid to_polar(const ImageGrid& img, const PolarConfig& cfg) {
    if (img.width < 2 || img.height < 2) throw std::invalid_argument("to_polar: image dims must be >= 2");
    if (cfg.out_height < 1 || cfg.out_width < 1 || cfg.rho_max <= 0)
        throw std::invalid_argument("to_polar: invalid PolarConfig");
    const double pi2 = 6.28318530717958647692;
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    ImageGrid out(img.channels, cfg.out_height, cfg.out_width);
    std::vector<float> sample(img.channels);
    for (int r = 0; r < cfg.out_height; ++r) {
        const double phi = pi2 * r / cfg.out_height;
        const double cphi = std::cos(phi), sphi = std::sin(phi);
        for (int c = 0; c < cfg.out_width; ++c) {
            const double rho = polar_column_radius(cfg, c);
            bilinear_sample(img, cx + rho * cphi, cy + rho * sphi, sample.data());
            for (int ch = 0; ch < img.channels; ++ch) out.at(ch, r, c) = sample[ch];
        }
    }
    return out;
}

// Rotates about the image center; output (x, y) samples the input at the
// point rotated by -angle, vacated area filled with 0. Positive angles move
// a feature at polar angle phi to phi + angle.
inline ImageGrid rotate_image(const ImageGrid& img, double angle) {
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    const double ca = std::cos(angle), sa = std::sin(angle);
    ImageGrid out(img.channels, img.height, img.width);
    std::vector<float> sample(img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double dx = x - cx, dy = y - cy;
            const double sx = cx + dx * ca + dy * sa;
            const double sy = cy - dx * sa + dy * ca;
            bilinear_sample(img, sx, sy, sample.data());
            for (int c = 0; c < img.channels; ++c) out.at(c, y, x) = sample[c];
        }
    return out;
}

// Integer-pixel shift; vacated area filled with 0.
inline ImageGrid translate_image(const ImageGrid& img, int dx, int dy) {
    ImageGrid out(img.channels, img.height, img.width);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y) {
            const int sy = y - dy;
            if (sy < 0 || sy >= img.height) continue;
            for (int x = 0; x < img.width; ++x) {
                const int sx = x - dx;
                if (sx < 0 || sx >= img.width) continue;
                out.at(c, y, x) = img.at(c, sy, sx);
            }
        }
    return out;
}

}  // namespace cycnn
