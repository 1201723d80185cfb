#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace cycnn {

struct BenchGeometry {
    int64_t n, c, h, w, out_channels;
};

struct BenchRow {
    std::string geometry;
    std::string algorithm;
    double median_ms;
    double gflops;
    int threads;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    // Analytic multiplication counts per 2x2 output tile for a 3x3 kernel.
    int direct_muls_per_tile = 36;
    int winograd_muls_per_tile = 16;
    double multiply_reduction() const {
        return static_cast<double>(direct_muls_per_tile) / winograd_muls_per_tile;
    }
};

// Known algorithm names: direct-serial, direct-zero, direct-cylindrical,
// winograd-zero, winograd-cylindrical. Every algorithm's output is checked
// against the serial reference before timing; a mismatch aborts with diff
// stats. Reported time is the median over `repeats` timed runs.
BenchReport bench_conv(const std::vector<BenchGeometry>& geometries,
                       const std::vector<std::string>& algorithms, int repeats, int warmup);

void write_bench_csv(const BenchReport& report, std::ostream& os);

}  // namespace cycnn
