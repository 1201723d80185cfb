#include "cycnn/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cycnn/conv.hpp"
#include "cycnn/rng.hpp"
#include "cycnn/winograd.hpp"

namespace cycnn {

namespace {

using Real = float;

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

struct Algo {
    PadMode mode;
    bool winograd;
    bool serial;
};

Algo parse_algo(const std::string& name) {
    if (name == "direct-serial") return {PadMode::zero, false, true};
    if (name == "direct-zero") return {PadMode::zero, false, false};
    if (name == "direct-cylindrical") return {PadMode::cylindrical, false, false};
    if (name == "winograd-zero") return {PadMode::zero, true, false};
    if (name == "winograd-cylindrical") return {PadMode::cylindrical, true, false};
    throw std::invalid_argument("bench_conv: unknown algorithm '" + name + "'");
}

}  // namespace

BenchReport bench_conv(const std::vector<BenchGeometry>& geometries,
                       const std::vector<std::string>& algorithms, int repeats, int warmup) {
    if (repeats < 3) throw std::invalid_argument("bench_conv: repeats must be >= 3");
    BenchReport report;
    for (const auto& g : geometries) {
        std::ostringstream geo;
        geo << g.n << "x" << g.c << "x" << g.h << "x" << g.w << "->" << g.out_channels;

        ConvSpec spec;
        spec.in_channels = g.c;
        spec.out_channels = g.out_channels;
        spec.kernel_h = spec.kernel_w = 3;
        spec.stride_h = spec.stride_w = 1;
        spec.pad = 1;

        Rng rng(12345);
        Tensor<Real> x(g.n, g.c, g.h, g.w);
        for (auto& v : x.data) v = static_cast<Real>(rng.uniform(-1.0, 1.0));
        FilterBank<Real> f(g.out_channels, g.c, 3, 3);
        for (auto& v : f.weights.data) v = static_cast<Real>(rng.uniform(-0.5, 0.5));
        for (auto& v : f.bias) v = static_cast<Real>(rng.uniform(-0.1, 0.1));

        for (const auto& name : algorithms) {
            const Algo algo = parse_algo(name);
            ConvSpec s = spec;
            s.pad_mode = algo.mode;
            std::function<Tensor<Real>()> run;
            if (algo.serial)
                run = [&, s] { return reference::conv2d_direct(x, f, s); };
            else if (algo.winograd)
                run = [&, s] { return conv2d_winograd(x, f, s, s.pad_mode); };
            else
                run = [&, s] { return conv2d_direct(x, f, s); };

            // Equivalence gate: a benchmark on non-equivalent outputs is invalid.
            const Tensor<Real> expected = reference::conv2d_direct(x, f, s);
            const Tensor<Real> got = run();
            double max_abs = 0, sum_abs = 0;
            for (size_t i = 0; i < got.data.size(); ++i) {
                const double d = std::abs(static_cast<double>(got.data[i]) - expected.data[i]);
                max_abs = std::max(max_abs, d);
                sum_abs += d;
            }
            if (max_abs > 1e-3)
                throw std::runtime_error("bench_conv: " + name + " on " + geo.str() +
                                         " diverges from reference (max abs " + std::to_string(max_abs) +
                                         ", mean abs " +
                                         std::to_string(sum_abs / static_cast<double>(got.data.size())) +
                                         ")");

            for (int i = 0; i < warmup; ++i) run();
            std::vector<double> times;
            for (int i = 0; i < repeats; ++i) {
                const auto t0 = std::chrono::steady_clock::now();
                run();
                const auto t1 = std::chrono::steady_clock::now();
                times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
            }
            std::sort(times.begin(), times.end());
            const double median = times[times.size() / 2];

            const double flops = 2.0 * g.n * g.out_channels * g.c * 9.0 * g.h * g.w;
            report.rows.push_back(
                {geo.str(), name, median, flops / (median * 1e-3) / 1e9, thread_count()});
        }
    }
    return report;
}

void write_bench_csv(const BenchReport& report, std::ostream& os) {
    os << "geometry,algorithm,median_ms,gflops,threads\n";
    for (const auto& r : report.rows) {
        char buf[192];
        std::snprintf(buf, sizeof(buf), "%s,%s,%.4f,%.3f,%d\n", r.geometry.c_str(),
                      r.algorithm.c_str(), r.median_ms, r.gflops, r.threads);
        os << buf;
    }
}

}  // namespace cycnn
