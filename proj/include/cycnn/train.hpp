#pragma once

#include <algorithm>
#include <numeric>
#include <ostream>
#include <vector>

#include "cycnn/dataset.hpp"
#include "cycnn/network.hpp"
#include "cycnn/rng.hpp"

namespace cycnn {

struct TrainConfig {
    double lr0 = 0.05;
    double momentum = 0.9;
    double weight_decay = 1e-5;
    int lr_halve_patience = 5;     // epochs without val-loss improvement
    int early_stop_patience = 15;  // epochs without val-accuracy improvement
    int batch_size = 32;
    uint64_t seed = 0;
    AugmentMode augment = AugmentMode::none;
    int max_epochs = 200;  // safety cap on the open-ended stopping rule
};

struct EpochMetrics {
    int epoch;  // 1-based
    double train_loss;
    double val_loss;
    double val_acc;
    double lr;
};

template <typename T>
struct TrainResult {
    Model<T> model;
    std::vector<EpochMetrics> log;
};

inline void write_metrics_csv(const std::vector<EpochMetrics>& log, std::ostream& os) {
    os << "epoch,train_loss,val_loss,val_acc,lr\n";
    char buf[160];
    for (const auto& m : log) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%.6f\n", m.epoch, m.train_loss, m.val_loss,
                      m.val_acc, m.lr);
        os << buf;
    }
}

// Plateau LR schedule plus early stopping: halve lr after `lr_halve_patience`
// epochs without validation-loss improvement; request a stop after
// `early_stop_patience` epochs without validation-accuracy improvement.
class PlateauSchedule {
public:
    PlateauSchedule(double lr0, int lr_halve_patience, int early_stop_patience)
        : lr_(lr0), lr_patience_(lr_halve_patience), stop_patience_(early_stop_patience) {}

    // Returns true when training should stop. improved_acc() reports whether
    // this epoch set a new best validation accuracy.
    bool observe(double val_loss, double val_acc) {
        if (val_loss < best_loss_) {
            best_loss_ = val_loss;
            loss_stall_ = 0;
        } else if (++loss_stall_ >= lr_patience_) {
            lr_ *= 0.5;
            loss_stall_ = 0;
        }
        improved_acc_ = val_acc > best_acc_;
        if (improved_acc_) {
            best_acc_ = val_acc;
            acc_stall_ = 0;
            return false;
        }
        return ++acc_stall_ >= stop_patience_;
    }

    double lr() const { return lr_; }
    bool improved_acc() const { return improved_acc_; }

private:
    double lr_;
    int lr_patience_, stop_patience_;
    int loss_stall_ = 0, acc_stall_ = 0;
    double best_loss_ = std::numeric_limits<double>::infinity();
    double best_acc_ = -1.0;
    bool improved_acc_ = false;
};

struct EvalResult {
    double accuracy = 0;
    std::vector<int64_t> per_class_correct;
    std::vector<int64_t> per_class_total;
};

template <typename T>
EvalResult evaluate(Model<T>& model, const LabeledDataset& ds, int batch_size = 64) {
    EvalResult res;
    res.per_class_correct.assign(static_cast<size_t>(ds.class_count), 0);
    res.per_class_total.assign(static_cast<size_t>(ds.class_count), 0);
    int64_t correct = 0;
    const int64_t n = static_cast<int64_t>(ds.images.size());
    for (int64_t start = 0; start < n; start += batch_size) {
        std::vector<int64_t> idx;
        for (int64_t i = start; i < std::min(n, start + batch_size); ++i) idx.push_back(i);
        Tensor<T> batch = make_batch<T>(ds, idx);
        Tensor<T> logits = model.forward(batch, false);
        const int64_t C = logits.shape.c();
        for (size_t b = 0; b < idx.size(); ++b) {
            const T* z = logits.data.data() + static_cast<int64_t>(b) * C;
            int64_t best = 0;
            for (int64_t c = 1; c < C; ++c)
                if (z[c] > z[best]) best = c;
            const int label = ds.labels[static_cast<size_t>(idx[b])];
            ++res.per_class_total[static_cast<size_t>(label)];
            if (best == label) {
                ++correct;
                ++res.per_class_correct[static_cast<size_t>(label)];
            }
        }
    }
    res.accuracy = n > 0 ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
    return res;
}

// SGD with the plateau schedule: halve lr after lr_halve_patience epochs
// without val-loss improvement, stop after early_stop_patience epochs without
// val-accuracy improvement (or at max_epochs). The validation split is the
// last 10% of the seed-shuffled training set. Returns the weights of the best
// validation-accuracy epoch.
template <typename T>
TrainResult<T> train(Model<T> model, const LabeledDataset& dataset, const TrainConfig& cfg) {
    if (dataset.images.empty()) throw std::invalid_argument("train: empty dataset");

    LabeledDataset data = augment(dataset, AugmentSpec{cfg.augment, cfg.seed});

    Rng rng(cfg.seed);
    std::vector<int64_t> order(data.images.size());
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(i)))]);

    const size_t val_n = std::max<size_t>(1, order.size() / 10);
    const size_t train_n = order.size() - val_n;
    std::vector<int64_t> train_idx(order.begin(), order.begin() + static_cast<ptrdiff_t>(train_n));
    std::vector<int64_t> val_idx(order.begin() + static_cast<ptrdiff_t>(train_n), order.end());
    LabeledDataset val_ds;
    val_ds.class_count = data.class_count;
    for (int64_t i : val_idx) {
        val_ds.images.push_back(data.images[static_cast<size_t>(i)]);
        val_ds.labels.push_back(data.labels[static_cast<size_t>(i)]);
    }

    std::vector<std::vector<T>> velocity;
    PlateauSchedule schedule(cfg.lr0, cfg.lr_halve_patience, cfg.early_stop_patience);
    Model<T> best_model(model);
    TrainResult<T> result;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        // Epoch-local batch order, derived so runs are reproducible.
        Rng erng = Rng::derive(cfg.seed, 0x9e3779b9u + static_cast<uint64_t>(epoch));
        std::vector<int64_t> perm = train_idx;
        for (size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[static_cast<size_t>(erng.uniform_int(static_cast<int64_t>(i)))]);

        double loss_sum = 0;
        int64_t batches = 0;
        for (size_t start = 0; start < perm.size(); start += static_cast<size_t>(cfg.batch_size)) {
            std::vector<int64_t> idx(perm.begin() + static_cast<ptrdiff_t>(start),
                                     perm.begin() + static_cast<ptrdiff_t>(std::min(
                                                        perm.size(), start + static_cast<size_t>(cfg.batch_size))));
            Tensor<T> batch = make_batch<T>(data, idx);
            std::vector<int> labels;
            for (int64_t i : idx) labels.push_back(data.labels[static_cast<size_t>(i)]);
            Tensor<T> logits = model.forward(batch, true);
            auto [loss, grad] = loss_and_grad(logits, labels);
            model.backward(grad);
            auto params = model.params();
            sgd_step(params, velocity, schedule.lr(), cfg.momentum, cfg.weight_decay);
            loss_sum += loss;
            ++batches;
        }

        // Validation loss/accuracy in eval mode.
        double val_loss = 0;
        int64_t val_batches = 0;
        for (size_t start = 0; start < val_idx.size(); start += 64) {
            std::vector<int64_t> idx;
            for (size_t i = start; i < std::min(val_idx.size(), start + 64); ++i)
                idx.push_back(static_cast<int64_t>(i));
            Tensor<T> batch = make_batch<T>(val_ds, idx);
            std::vector<int> labels;
            for (int64_t i : idx) labels.push_back(val_ds.labels[static_cast<size_t>(i)]);
            Tensor<T> logits = model.forward(batch, false);
            val_loss += loss_and_grad(logits, labels).first;
            ++val_batches;
        }
        val_loss /= std::max<int64_t>(1, val_batches);
        const double val_acc = evaluate(model, val_ds).accuracy;

        result.log.push_back(
            {epoch, loss_sum / std::max<int64_t>(1, batches), val_loss, val_acc, schedule.lr()});

        const bool stop = schedule.observe(val_loss, val_acc);
        if (schedule.improved_acc()) best_model = model;
        if (stop) break;
    }
    result.model = std::move(best_model);
    return result;
}

}  // namespace cycnn
