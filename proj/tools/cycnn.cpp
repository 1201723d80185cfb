// cycnn command-line tool: polar conversion, training, evaluation,
// receptive-field reports, benchmarking, and self-test.
//
// Exit codes: 0 success, 1 assertion/test failure, 2 usage or I/O error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cycnn/bench.hpp"
#include "cycnn/conv.hpp"
#include "cycnn/dataset.hpp"
#include "cycnn/image_io.hpp"
#include "cycnn/network.hpp"
#include "cycnn/polar.hpp"
#include "cycnn/receptive_field.hpp"
#include "cycnn/rng.hpp"
#include "cycnn/train.hpp"
#include "cycnn/winograd.hpp"

namespace {

using namespace cycnn;
using Real = float;

// ---------------------------------------------------------------- polar

struct PolarArgs {
    std::string in_path, out_path;
    std::string mode = "polar";
    double rho_max = 0;  // 0 -> default (min(W,H)/2)
    std::string size;    // "HxW", empty -> input dims
};

int run_polar(const PolarArgs& a) {
    ImageGrid img = load_pnm(a.in_path);
    PolarConfig cfg = default_polar_config(
        img, a.mode == "logpolar" ? PolarConfig::Mode::logpolar : PolarConfig::Mode::polar);
    if (a.rho_max > 0) cfg.rho_max = a.rho_max;
    if (!a.size.empty()) {
        const auto x = a.size.find('x');
        if (x == std::string::npos) throw std::runtime_error("--size expects HxW");
        cfg.out_height = std::stoi(a.size.substr(0, x));
        cfg.out_width = std::stoi(a.size.substr(x + 1));
    }
    save_pnm(to_polar(img, cfg), a.out_path);
    return 0;
}

// ---------------------------------------------------------------- datasets

struct DataArgs {
    std::string dataset = "synth";
    std::string mnist_images, mnist_labels, mnist_test_images, mnist_test_labels;
    std::vector<std::string> cifar_batches, cifar_test_batches;
    int synth_n = 4000, synth_test_n = 1000, synth_classes = 8, synth_size = 32;
    uint64_t seed = 0;
};

void add_data_flags(CLI::App* cmd, DataArgs& d) {
    cmd->add_option("--dataset", d.dataset, "mnist|cifar10|synth")
        ->check(CLI::IsMember({"mnist", "cifar10", "synth"}));
    cmd->add_option("--mnist-images", d.mnist_images, "MNIST train images (IDX)");
    cmd->add_option("--mnist-labels", d.mnist_labels, "MNIST train labels (IDX)");
    cmd->add_option("--mnist-test-images", d.mnist_test_images, "MNIST test images (IDX)");
    cmd->add_option("--mnist-test-labels", d.mnist_test_labels, "MNIST test labels (IDX)");
    cmd->add_option("--cifar-batches", d.cifar_batches, "CIFAR-10 train batch files");
    cmd->add_option("--cifar-test-batches", d.cifar_test_batches, "CIFAR-10 test batch files");
    cmd->add_option("--synth-n", d.synth_n, "synthetic train set size");
    cmd->add_option("--synth-test-n", d.synth_test_n, "synthetic test set size");
    cmd->add_option("--synth-classes", d.synth_classes, "synthetic class count");
    cmd->add_option("--synth-size", d.synth_size, "synthetic image size");
    cmd->add_option("--seed", d.seed, "RNG seed (all randomness derives from it)");
}

LabeledDataset load_train_set(const DataArgs& d) {
    if (d.dataset == "mnist") return load_mnist(d.mnist_images, d.mnist_labels);
    if (d.dataset == "cifar10") return load_cifar10(d.cifar_batches);
    return synth_dataset(d.synth_n, d.synth_classes, d.seed, d.synth_size);
}

LabeledDataset load_test_set(const DataArgs& d) {
    if (d.dataset == "mnist") return load_mnist(d.mnist_test_images, d.mnist_test_labels);
    if (d.dataset == "cifar10") return load_cifar10(d.cifar_test_batches);
    // Synthetic test set: an independent stream from the same seed.
    return synth_dataset(d.synth_test_n, d.synth_classes, d.seed + 0x5eed, d.synth_size);
}

// Variant preprocessing: base keeps Cartesian input; p/lp convert to polar
// or log-polar. cy-* additionally switches conv layers to cylindrical mode.
LabeledDataset apply_variant_transform(const LabeledDataset& ds, const std::string& variant) {
    if (variant == "base") return ds;
    if (variant == "p" || variant == "cy-p") return to_polar_dataset(ds, PolarConfig::Mode::polar);
    if (variant == "lp" || variant == "cy-lp")
        return to_polar_dataset(ds, PolarConfig::Mode::logpolar);
    throw std::runtime_error("unknown variant '" + variant + "'");
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    DataArgs data;
    std::string arch = "minivgg";
    std::string variant = "base";
    std::string augment = "none";
    std::string out_ckpt = "model.cyc";
    std::string metrics_csv = "metrics.csv";
    TrainConfig cfg;
};

AugmentMode parse_augment(const std::string& s) {
    if (s == "none") return AugmentMode::none;
    if (s == "r") return AugmentMode::rotate;
    if (s == "t") return AugmentMode::translate;
    if (s == "rt") return AugmentMode::rotate_translate;
    throw std::runtime_error("unknown augment mode '" + s + "'");
}

int run_train(const TrainArgs& a) {
    if (a.arch != "minivgg") throw std::runtime_error("unknown arch '" + a.arch + "'");
    const bool cylindrical = a.variant.rfind("cy-", 0) == 0;

    LabeledDataset train_ds = load_train_set(a.data);
    // Augment in Cartesian space before any polar conversion: an image
    // rotation only corresponds to a polar row shift, not a polar rotation.
    train_ds = augment(train_ds, AugmentSpec{parse_augment(a.augment), a.data.seed + 0xa06});
    train_ds = apply_variant_transform(train_ds, a.variant);
    const ChannelStats stats = compute_channel_stats(train_ds);
    apply_standardize(train_ds, stats);

    const ImageGrid& first = train_ds.images.at(0);
    Model<Real> model = build_minivgg<Real>(first.channels, train_ds.class_count, first.height,
                                            cylindrical ? PadMode::cylindrical : PadMode::zero,
                                            ConvAlgo::winograd);
    model.name = "MiniVGG:" + a.variant;
    init_weights(model, a.data.seed);

    TrainConfig cfg = a.cfg;
    cfg.seed = a.data.seed;
    cfg.augment = AugmentMode::none;  // already applied above, pre-transform
    TrainResult<Real> result = train(std::move(model), train_ds, cfg);

    save_model(result.model, a.out_ckpt);
    std::ofstream csv(a.metrics_csv);
    if (!csv) throw std::runtime_error("cannot write " + a.metrics_csv);
    write_metrics_csv(result.log, csv);
    std::cout << "trained " << result.log.size() << " epochs; final val_acc "
              << result.log.back().val_acc << "; checkpoint " << a.out_ckpt << "\n";
    return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    DataArgs data;
    std::string ckpt;
    bool rotate_test = false;
    std::string train_augment = "none";
    std::string per_class_csv;
};

int run_eval(const EvalArgs& a) {
    Model<Real> model = load_model<Real>(a.ckpt);
    const auto colon = model.name.find(':');
    if (colon == std::string::npos)
        throw std::runtime_error("checkpoint '" + a.ckpt + "' does not name an arch:variant");
    const std::string variant = model.name.substr(colon + 1);

    LabeledDataset test_ds = load_test_set(a.data);
    if (a.rotate_test) test_ds = rotated_test_set(test_ds, a.data.seed + 0x707);
    test_ds = apply_variant_transform(test_ds, variant);
    // Standardization uses training-set statistics; --train-augment must
    // mirror the augmentation used at training time to reproduce them.
    LabeledDataset train_ds = load_train_set(a.data);
    train_ds = augment(train_ds, AugmentSpec{parse_augment(a.train_augment), a.data.seed + 0xa06});
    train_ds = apply_variant_transform(train_ds, variant);
    const ChannelStats stats = compute_channel_stats(train_ds);
    apply_standardize(test_ds, stats);

    EvalResult res = evaluate(model, test_ds);
    std::cout << "accuracy " << res.accuracy * 100.0 << "% (" << model.name << ", "
              << test_ds.images.size() << " samples" << (a.rotate_test ? ", rotated" : "") << ")\n";
    if (!a.per_class_csv.empty()) {
        std::ofstream csv(a.per_class_csv);
        if (!csv) throw std::runtime_error("cannot write " + a.per_class_csv);
        csv << "class,correct,total,accuracy\n";
        for (size_t c = 0; c < res.per_class_total.size(); ++c) {
            const double acc = res.per_class_total[c]
                                   ? static_cast<double>(res.per_class_correct[c]) / res.per_class_total[c]
                                   : 0.0;
            csv << c << "," << res.per_class_correct[c] << "," << res.per_class_total[c] << "," << acc
                << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------- rf

struct RfArgs {
    std::vector<std::string> layers;
    int input_h = 32;
    std::string pad_mode = "zero";
    bool csv = false;
    bool coverage = false;
};

RfLayerSpec parse_rf_layer(const std::string& s) {
    // "KWxKH" or "KWxKH/SW" or "KWxKH/SWxSH"
    RfLayerSpec l;
    std::string kernel = s, stride;
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
        kernel = s.substr(0, slash);
        stride = s.substr(slash + 1);
    }
    const auto kx = kernel.find('x');
    if (kx == std::string::npos) throw std::runtime_error("layer spec '" + s + "': expected KWxKH[/SWxSH]");
    l.kernel_w = std::stoll(kernel.substr(0, kx));
    l.kernel_h = std::stoll(kernel.substr(kx + 1));
    if (!stride.empty()) {
        const auto sx = stride.find('x');
        if (sx == std::string::npos) {
            l.stride_w = l.stride_h = std::stoll(stride);
        } else {
            l.stride_w = std::stoll(stride.substr(0, sx));
            l.stride_h = std::stoll(stride.substr(sx + 1));
        }
    }
    return l;
}

int run_rf(const RfArgs& a) {
    std::vector<RfLayerSpec> stack;
    for (const auto& s : a.layers) stack.push_back(parse_rf_layer(s));
    const auto rf = rf_propagate(stack);
    const char sep = a.csv ? ',' : '\t';
    if (a.csv)
        std::cout << "depth,kernel,stride,rf_w,rf_h\n";
    else
        std::cout << "depth\tkernel\tstride\trf_w\trf_h\n";
    for (size_t i = 0; i < rf.size(); ++i) {
        const auto& l = stack[stack.size() - 1 - i];
        std::cout << i << sep << l.kernel_w << "x" << l.kernel_h << sep << l.stride_w << "x"
                  << l.stride_h << sep << rf[i].w << sep << rf[i].h << "\n";
    }
    if (a.coverage) {
        const PadMode mode = a.pad_mode == "cylindrical" ? PadMode::cylindrical : PadMode::zero;
        const auto cov = boundary_coverage(stack, a.input_h, mode);
        std::cout << (a.csv ? "row,input_rows_reached\n" : "row\tinput_rows_reached\n");
        for (size_t r = 0; r < cov.rows_reached.size(); ++r)
            std::cout << r << sep << cov.rows_reached[r] << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
    std::vector<std::string> geometries{"8,32,32,32,64"};
    std::vector<std::string> algorithms{"direct-serial", "direct-zero", "direct-cylindrical",
                                        "winograd-zero", "winograd-cylindrical"};
    int repeats = 5;
    int warmup = 2;
    std::string out;
};

int run_bench(const BenchArgs& a) {
    std::vector<BenchGeometry> geos;
    for (const auto& g : a.geometries) {
        BenchGeometry bg{};
        if (std::sscanf(g.c_str(), "%ld,%ld,%ld,%ld,%ld", &bg.n, &bg.c, &bg.h, &bg.w,
                        &bg.out_channels) != 5)
            throw std::runtime_error("geometry '" + g + "': expected N,C,H,W,OC");
        geos.push_back(bg);
    }
    BenchReport rep = bench_conv(geos, a.algorithms, a.repeats, a.warmup);
    std::cout << "# winograd F(2x2,3x3): " << rep.direct_muls_per_tile << " -> "
              << rep.winograd_muls_per_tile << " multiplies per 2x2 tile ("
              << rep.multiply_reduction() << "x analytic reduction)\n";
    if (a.out.empty()) {
        write_bench_csv(rep, std::cout);
    } else {
        std::ofstream os(a.out);
        if (!os) throw std::runtime_error("cannot write " + a.out);
        write_bench_csv(rep, os);
    }
    return 0;
}

// ---------------------------------------------------------------- selftest

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    double m = 0;
    for (size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i])));
    return m;
}

template <typename T>
bool selftest_suites(double wino_tol, double equi_tol, double grad_tol, std::string& failed) {
    Rng rng(7);
    // Winograd vs direct, both modes.
    for (PadMode mode : {PadMode::zero, PadMode::cylindrical}) {
        for (int rep = 0; rep < 4; ++rep) {
            Tensor<T> x(2, 3, 8, 8);
            for (auto& v : x.data) v = static_cast<T>(rng.uniform(-1, 1));
            FilterBank<T> f(4, 3, 3, 3);
            for (auto& v : f.weights.data) v = static_cast<T>(rng.uniform(-1, 1));
            for (auto& v : f.bias) v = static_cast<T>(rng.uniform(-1, 1));
            ConvSpec s;
            s.in_channels = 3;
            s.out_channels = 4;
            s.pad = 1;
            s.pad_mode = mode;
            if (max_abs_diff(conv2d_winograd(x, f, s, mode), reference::conv2d_direct(x, f, s)) >
                wino_tol) {
                failed = "winograd-oracle";
                return false;
            }
            if (max_abs_diff(conv2d_direct(x, f, s), reference::conv2d_direct(x, f, s)) > 0) {
                failed = "direct-vs-reference";
                return false;
            }
        }
    }
    // Cyclic equivariance.
    {
        Tensor<T> x(1, 2, 8, 8);
        for (auto& v : x.data) v = static_cast<T>(rng.uniform(-1, 1));
        FilterBank<T> f(2, 2, 3, 3);
        for (auto& v : f.weights.data) v = static_cast<T>(rng.uniform(-1, 1));
        ConvSpec s;
        s.in_channels = 2;
        s.out_channels = 2;
        s.pad = 1;
        s.pad_mode = PadMode::cylindrical;
        for (int k = 1; k < 8; ++k) {
            if (max_abs_diff(conv2d_direct(cyclic_shift_rows(x, k), f, s),
                             cyclic_shift_rows(conv2d_direct(x, f, s), k)) > equi_tol) {
                failed = "cyclic-equivariance";
                return false;
            }
        }
    }
    // Gradients vs central finite differences on a tiny conv.
    {
        Tensor<double> x(1, 1, 4, 4);
        Rng r2(11);
        for (auto& v : x.data) v = r2.uniform(-1, 1);
        FilterBank<double> f(2, 1, 3, 3);
        for (auto& v : f.weights.data) v = r2.uniform(-1, 1);
        ConvSpec s;
        s.in_channels = 1;
        s.out_channels = 2;
        s.pad = 1;
        s.pad_mode = PadMode::cylindrical;
        Tensor<double> gout(1, 2, 4, 4);
        for (auto& v : gout.data) v = r2.uniform(-1, 1);
        const auto grads = conv2d_backward(x, f, gout, s);
        const double eps = 1e-5;
        for (size_t i = 0; i < f.weights.data.size(); ++i) {
            FilterBank<double> fp = f, fm = f;
            fp.weights.data[i] += eps;
            fm.weights.data[i] -= eps;
            const auto yp = conv2d_direct(x, fp, s);
            const auto ym = conv2d_direct(x, fm, s);
            double fd = 0;
            for (size_t j = 0; j < yp.data.size(); ++j)
                fd += (yp.data[j] - ym.data[j]) / (2 * eps) * gout.data[j];
            const double an = grads.grad_w.data[i];
            if (std::abs(fd - an) / std::max(1.0, std::abs(fd)) > grad_tol) {
                failed = "gradient-check";
                return false;
            }
        }
    }
    return true;
}

int run_selftest(bool use_double, double fault) {
    winograd_fault_injection() = fault;
    std::string failed;
    bool ok;
    if (use_double)
        ok = selftest_suites<double>(1e-10, 0.0, 1e-6, failed);
    else
        ok = selftest_suites<float>(1e-4, 1e-6, 1e-4, failed);
    winograd_fault_injection() = 0.0;
    if (ok) {
        std::cout << "selftest: all suites passed (" << (use_double ? "double" : "single")
                  << " precision)\n";
        return 0;
    }
    std::cout << "selftest: FAILED suite: " << failed << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CyCNN engine: polar mapping + cylindrical convolution"};
    app.require_subcommand(1);
    app.set_config("--config")->description("key = value file mirroring flags (flags win)");

    PolarArgs pa;
    auto* polar_cmd = app.add_subcommand("polar", "Convert a PGM/PPM image to (log-)polar");
    polar_cmd->add_option("--in", pa.in_path, "input image")->required();
    polar_cmd->add_option("--out", pa.out_path, "output image")->required();
    polar_cmd->add_option("--mode", pa.mode, "polar|logpolar")
        ->check(CLI::IsMember({"polar", "logpolar"}));
    polar_cmd->add_option("--rho-max", pa.rho_max, "bounding-circle radius (pixels)");
    polar_cmd->add_option("--size", pa.size, "output dims as HxW");

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "Train a model");
    add_data_flags(train_cmd, ta.data);
    train_cmd->add_option("--arch", ta.arch, "minivgg");
    train_cmd->add_option("--variant", ta.variant, "base|p|lp|cy-p|cy-lp")
        ->check(CLI::IsMember({"base", "p", "lp", "cy-p", "cy-lp"}));
    train_cmd->add_option("--augment", ta.augment, "none|r|t|rt")
        ->check(CLI::IsMember({"none", "r", "t", "rt"}));
    train_cmd->add_option("--out", ta.out_ckpt, "checkpoint path");
    train_cmd->add_option("--metrics", ta.metrics_csv, "metrics CSV path");
    train_cmd->add_option("--lr", ta.cfg.lr0, "initial learning rate");
    train_cmd->add_option("--batch-size", ta.cfg.batch_size, "batch size");
    train_cmd->add_option("--max-epochs", ta.cfg.max_epochs, "epoch safety cap");

    EvalArgs ea;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    add_data_flags(eval_cmd, ea.data);
    eval_cmd->add_option("--ckpt", ea.ckpt, "checkpoint path")->required();
    eval_cmd->add_flag("--rotate-test", ea.rotate_test, "rotate each test image randomly");
    eval_cmd->add_option("--train-augment", ea.train_augment, "augment mode used at training time")
        ->check(CLI::IsMember({"none", "r", "t", "rt"}));
    eval_cmd->add_option("--per-class", ea.per_class_csv, "per-class breakdown CSV path");

    RfArgs ra;
    auto* rf_cmd = app.add_subcommand("rf", "Receptive-field report");
    rf_cmd->add_option("--layers", ra.layers, "layer specs, e.g. 3x3 3x3/2 3x3/3x2")
        ->required()
        ->delimiter(',');
    rf_cmd->add_option("--input-h", ra.input_h, "input height for coverage");
    rf_cmd->add_option("--pad-mode", ra.pad_mode, "zero|cylindrical")
        ->check(CLI::IsMember({"zero", "cylindrical"}));
    rf_cmd->add_flag("--csv", ra.csv, "machine-readable output");
    rf_cmd->add_flag("--coverage", ra.coverage, "also report boundary row coverage");

    BenchArgs ba;
    auto* bench_cmd = app.add_subcommand("bench", "Benchmark convolution paths");
    bench_cmd->add_option("--geometries", ba.geometries, "N,C,H,W,OC entries");
    bench_cmd->add_option("--algorithms", ba.algorithms, "algorithm names");
    bench_cmd->add_option("--repeats", ba.repeats, "timed repeats (median reported)");
    bench_cmd->add_option("--warmup", ba.warmup, "warmup iterations");
    bench_cmd->add_option("--out", ba.out, "CSV output path (default stdout)");

    bool st_double = false;
    double st_fault = 0.0;
    auto* st_cmd = app.add_subcommand("selftest", "Run oracle/equivariance/gradient suites");
    st_cmd->add_flag("--double", st_double, "double-precision mode with tighter tolerances");
    st_cmd->add_option("--inject-winograd-fault", st_fault, "fault-injection hook (testing only)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*polar_cmd) return run_polar(pa);
        if (*train_cmd) return run_train(ta);
        if (*eval_cmd) return run_eval(ea);
        if (*rf_cmd) return run_rf(ra);
        if (*bench_cmd) return run_bench(ba);
        if (*st_cmd) return run_selftest(st_double, st_fault);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
