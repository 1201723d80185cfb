#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "cycnn/image_io.hpp"
#include "cycnn/polar.hpp"
#include "cycnn/rng.hpp"
#include "cycnn/tensor.hpp"

using namespace cycnn;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Smooth random image quantized to 8 bits, like file-sourced test data.
ImageGrid smooth_image(int size, uint64_t seed) {
    Rng rng(seed);
    const double a1 = rng.uniform(0, 2 * kPi), a2 = rng.uniform(0, 2 * kPi);
    const double f1 = 1 + rng.uniform_int(3), f2 = 1 + rng.uniform_int(3);
    ImageGrid img(1, size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double v = 0.5 + 0.25 * std::sin(2 * kPi * f1 * x / size + a1) +
                             0.25 * std::cos(2 * kPi * f2 * y / size + a2);
            img.at(0, y, x) = std::round(std::clamp(v, 0.0, 1.0) * 255.0f) / 255.0f;
        }
    return img;
}

Tensor<double> to_tensor(const ImageGrid& img) {
    Tensor<double> t(1, img.channels, img.height, img.width);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) t(0, c, y, x) = img.at(c, y, x);
    return t;
}

}  // namespace

TEST_CASE("cartesian_to_polar_point covers all piecewise branches") {
    auto check = [](double x, double y, double rho, double phi) {
        auto p = cartesian_to_polar_point(x, y);
        REQUIRE(p.has_value());
        CHECK(p->rho == doctest::Approx(rho).epsilon(1e-15));
        CHECK(p->phi == doctest::Approx(phi).epsilon(1e-15));
    };
    check(1, 0, 1, 0);                          // +x axis
    check(1, 1, std::sqrt(2.0), kPi / 4);       // quadrant 1
    check(0, 1, 1, kPi / 2);                    // +y axis
    check(-1, 1, std::sqrt(2.0), 3 * kPi / 4);  // quadrant 2
    check(-1, 0, 1, kPi);                       // -x axis
    check(-1, -1, std::sqrt(2.0), 5 * kPi / 4); // quadrant 3
    check(0, -1, 1, 3 * kPi / 2);               // -y axis
    check(1, -1, std::sqrt(2.0), 7 * kPi / 4);  // quadrant 4
    CHECK(!cartesian_to_polar_point(0, 0).has_value());
    // phi stays in [0, 2*pi)
    for (double ang = 0.01; ang < 2 * kPi; ang += 0.37) {
        auto p = cartesian_to_polar_point(std::cos(ang), std::sin(ang));
        REQUIRE(p.has_value());
        CHECK(p->phi == doctest::Approx(ang).epsilon(1e-12));
    }
}

TEST_CASE("bilinear_sample reproduces nodes, midpoints, and zero-fill") {
    ImageGrid img(1, 2, 2);
    img.at(0, 0, 0) = 0.2f;
    img.at(0, 0, 1) = 0.6f;
    img.at(0, 1, 0) = 0.4f;
    img.at(0, 1, 1) = 1.0f;
    float v;
    bilinear_sample(img, 1, 0, &v);
    CHECK(v == doctest::Approx(0.6));
    bilinear_sample(img, 0.5, 0, &v);
    CHECK(v == doctest::Approx(0.4));
    bilinear_sample(img, 100, 100, &v);
    CHECK(v == 0.0f);
}

TEST_CASE("to_polar of a constant image is constant inside the pixel grid") {
    ImageGrid img(1, 16, 16);
    for (auto& p : img.pix) p = 0.7f;
    auto cfg = default_polar_config(img, PolarConfig::Mode::polar);
    auto pol = to_polar(img, cfg);
    // The bounding circle's rim pokes half a pixel past the outermost pixel
    // centers, so rim columns attenuate under the zero-fill rule; every
    // column whose radius stays a pixel inside the grid must be constant.
    const double safe = (img.width - 1) / 2.0 - 1.0;
    for (int r = 0; r < cfg.out_height; ++r)
        for (int c = 0; c < cfg.out_width; ++c) {
            if (polar_column_radius(cfg, c) <= safe)
                CHECK(pol.at(0, r, c) == doctest::Approx(0.7).epsilon(1e-6));
            else
                CHECK(pol.at(0, r, c) <= 0.7f + 1e-6f);
        }
}

TEST_CASE("delta image concentrates energy in the expected column near row 0") {
    // Odd size puts the mapping center on an integer pixel, so the delta sits
    // at exactly radius rho0 on the positive x-axis.
    const int size = 33;
    ImageGrid img(1, size, size);
    const int rho0 = 10;
    img.at(0, (size - 1) / 2, (size - 1) / 2 + rho0) = 1.0f;
    auto cfg = default_polar_config(img, PolarConfig::Mode::polar);
    auto pol = to_polar(img, cfg);
    // Sum over the wrap-adjacent rows around phi = 0.
    const int expect_col = static_cast<int>(rho0 * cfg.out_width / cfg.rho_max);
    double best = 0;
    int best_col = -1;
    for (int c = 0; c < cfg.out_width; ++c) {
        double e = 0;
        for (int r : {0, 1, cfg.out_height - 1}) e += pol.at(0, r, c);
        if (e > best) {
            best = e;
            best_col = c;
        }
    }
    CHECK(best > 0);
    CHECK(std::abs(best_col - expect_col) <= 1);
}

// Calibrated against the brute-force two-path comparison below over the test
// corpus; observed maxima sit well under this bound.
static constexpr double kRotShiftTol = 0.035;

TEST_CASE("rotation becomes cyclic row shift in polar space") {
    for (uint64_t seed : {1u, 2u, 3u, 4u}) {
        ImageGrid img = smooth_image(32, seed);
        auto cfg = default_polar_config(img, PolarConfig::Mode::polar);
        auto base = to_tensor(to_polar(img, cfg));
        for (int k : {1, 5, 16, 27}) {
            const double angle = 2 * kPi * k / cfg.out_height;
            auto rotated = to_tensor(to_polar(rotate_image(img, angle), cfg));
            auto shifted = cyclic_shift_rows(base, k);
            double sum = 0;
            for (size_t i = 0; i < rotated.data.size(); ++i)
                sum += std::abs(rotated.data[i] - shifted.data[i]);
            const double mean_abs = sum / static_cast<double>(rotated.data.size());
            CHECK(mean_abs < kRotShiftTol);
        }
    }
}

TEST_CASE("radially symmetric image gives identical polar rows") {
    const int size = 32;
    ImageGrid img(1, size, size);
    const double cx = (size - 1) / 2.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double rho = std::hypot(x - cx, y - cx);
            img.at(0, y, x) = static_cast<float>(std::exp(-rho * rho / 60.0));
        }
    auto pol = to_polar(img, default_polar_config(img, PolarConfig::Mode::polar));
    double max_diff = 0;
    for (int r = 1; r < pol.height; ++r)
        for (int c = 0; c < pol.width; ++c)
            max_diff = std::max(max_diff, std::abs(static_cast<double>(pol.at(0, r, c)) - pol.at(0, 0, c)));
    CHECK(max_diff < 0.02);
}

TEST_CASE("logpolar mapping is monotone and spans the bounding circle") {
    PolarConfig cfg;
    cfg.mode = PolarConfig::Mode::logpolar;
    cfg.out_height = cfg.out_width = 32;
    cfg.rho_max = 16;
    double prev = -1;
    for (int c = 0; c < cfg.out_width; ++c) {
        const double rho = polar_column_radius(cfg, c);
        CHECK(rho > prev);
        CHECK(rho >= 0);
        CHECK(rho <= cfg.rho_max);
        prev = rho;
    }
    // Last column reaches close to rho_max.
    CHECK(polar_column_radius(cfg, cfg.out_width - 1) > 0.8 * cfg.rho_max);
}

TEST_CASE("rotate_image identity and involution") {
    ImageGrid img = smooth_image(24, 9);
    auto same = rotate_image(img, 0.0);
    for (size_t i = 0; i < img.pix.size(); ++i) CHECK(same.pix[i] == doctest::Approx(img.pix[i]));

    auto twice = rotate_image(rotate_image(img, kPi), kPi);
    const double cx = (img.width - 1) / 2.0;
    double max_diff = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (std::hypot(x - cx, y - cx) < img.width / 2.0 - 1)
                max_diff = std::max(max_diff,
                                    std::abs(static_cast<double>(twice.at(0, y, x)) - img.at(0, y, x)));
    CHECK(max_diff < 1e-5);  // half-turn hits pixel centers exactly

    ImageGrid flat(1, 16, 16);
    for (auto& p : flat.pix) p = 0.5f;
    auto rot = rotate_image(flat, 0.7);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            if (std::hypot(x - 7.5, y - 7.5) < 7.0)
                CHECK(rot.at(0, y, x) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("translate_image fill semantics") {
    ImageGrid img = smooth_image(16, 10);
    auto same = translate_image(img, 0, 0);
    CHECK(same.pix == img.pix);

    auto back = translate_image(translate_image(img, 1, 0), -1, 0);
    for (int y = 0; y < img.height; ++y) {
        CHECK(back.at(0, y, img.width - 1) == 0.0f);
        for (int x = 0; x < img.width - 1; ++x) CHECK(back.at(0, y, x) == img.at(0, y, x));
    }

    ImageGrid flat(1, 16, 16);
    for (auto& p : flat.pix) p = 1.0f;
    auto shifted = translate_image(flat, 4, 4);
    CHECK(shifted.at(0, 0, 0) == 0.0f);
    CHECK(shifted.at(0, 15, 15) == 1.0f);
}

TEST_CASE("pnm round trip preserves 8-bit pixel data") {
    ImageGrid img = smooth_image(12, 11);
    const char* path = "test_roundtrip.pgm";
    save_pnm(img, path);
    auto loaded = load_pnm(path);
    REQUIRE(loaded.width == 12);
    REQUIRE(loaded.channels == 1);
    for (size_t i = 0; i < img.pix.size(); ++i)
        CHECK(loaded.pix[i] == doctest::Approx(img.pix[i]).epsilon(1.0 / 255));
    std::remove(path);

    ImageGrid rgb(3, 4, 5);
    for (size_t i = 0; i < rgb.pix.size(); ++i) rgb.pix[i] = (i % 7) / 7.0f;
    save_pnm(rgb, "test_roundtrip.ppm");
    auto rgb2 = load_pnm("test_roundtrip.ppm");
    CHECK(rgb2.channels == 3);
    for (size_t i = 0; i < rgb.pix.size(); ++i)
        CHECK(rgb2.pix[i] == doctest::Approx(rgb.pix[i]).epsilon(1.0 / 255));
    std::remove("test_roundtrip.ppm");

    CHECK_THROWS_AS(load_pnm("does_not_exist.pgm"), std::runtime_error);
}
