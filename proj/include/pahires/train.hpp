#pragma once

#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "pahires/error.hpp"
#include "pahires/loss.hpp"
#include "pahires/model.hpp"
#include "pahires/motion.hpp"
#include "pahires/optimizer.hpp"

namespace pahires {

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 256;  // query coordinates per step
    int epochs = 1000;
    double decay_factor = 0.5;
    int decay_every = 200;
    double factor_min = 1.0;  // degradation range, U(factor_min, factor_max)
    double factor_max = 4.0;
    std::uint64_t seed = 0;
    int steps_per_epoch = 0;  // 0 = ceil(pool frames / batch_size)
    int checkpoint_every = 100;
    std::string checkpoint_path;
    std::string history_path;

    void validate() const {
        if (!(learning_rate > 0))
            throw Error(ErrorKind::config, "learning_rate must be > 0");
        if (batch_size < 1)
            throw Error(ErrorKind::config, "batch_size must be >= 1");
        if (epochs < 0) throw Error(ErrorKind::config, "epochs must be >= 0");
        if (!(decay_factor > 0) || decay_every < 1)
            throw Error(ErrorKind::config, "invalid decay schedule");
        if (factor_min < 1.0 || factor_max < factor_min)
            throw Error(ErrorKind::config,
                        "degradation range needs 1 <= factor_min <= factor_max");
    }
};

// One degraded sequence plus the query coordinates and undegraded targets
// that supervise it. Queries are consecutive original-grid coordinates so
// the velocity loss applies within the item.
struct BatchItem {
    MotionSequence input;          // degraded sequence
    std::vector<double> query_t;   // normalized coordinates into `input`
    Tensor targets;                // matching original frames
    double factor = 1.0;
};

using Batch = std::vector<BatchItem>;

inline Batch sample_batch(const std::vector<MotionSequence>& pool,
                          const TrainConfig& cfg, std::mt19937_64& rng) {
    if (pool.empty())
        throw Error(ErrorKind::data, "sample_batch: empty sequence pool");
    Batch batch;
    int budget = cfg.batch_size;
    while (budget > 0) {
        const MotionSequence& seq =
            pool[std::uniform_int_distribution<std::size_t>(
                0, pool.size() - 1)(rng)];
        double factor = 1.0;
        MotionSequence degraded;
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            factor = std::uniform_real_distribution<double>(
                cfg.factor_min, cfg.factor_max)(rng);
            try {
                degraded = downsample(seq, factor);
                ok = true;
            } catch (const Error&) {
                // sequence too short for this factor; redraw
            }
        }
        if (!ok)
            throw Error(ErrorKind::data,
                        "sample_batch: sequence too short for the "
                        "degradation range");

        // original grid points expressed in the degraded sequence's time
        std::size_t Td = degraded.length();
        double span = factor * double(Td - 1);
        std::size_t last =
            std::min(seq.length() - 1, std::size_t(span + 1e-9));
        std::size_t count = last + 1;
        std::size_t take = std::min<std::size_t>(count, std::size_t(budget));
        std::size_t start =
            take < count
                ? std::uniform_int_distribution<std::size_t>(
                      0, count - take)(rng)
                : 0;

        BatchItem item;
        item.factor = factor;
        item.input = std::move(degraded);
        item.query_t.reserve(take);
        item.targets = Tensor({take, seq.dim()});
        for (std::size_t k = 0; k < take; ++k) {
            std::size_t j = start + k;
            item.query_t.push_back(double(j) / span);
            std::copy(seq.frames.data() + j * seq.dim(),
                      seq.frames.data() + (j + 1) * seq.dim(),
                      item.targets.data() + k * seq.dim());
        }
        budget -= int(take);
        batch.push_back(std::move(item));
    }
    return batch;
}

struct EpochLog {
    int epoch = 0;
    double lr = 0, mse = 0, velocity = 0, total = 0;  // per-element means
};

struct TrainResult {
    std::vector<EpochLog> history;
    long steps = 0;
};

inline void write_history_csv(const std::string& path,
                              const std::vector<EpochLog>& history) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::data, "cannot open for write: " + path);
    os << "epoch,lr,mse,velocity,total\n";
    char buf[128];
    for (const EpochLog& e : history) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", e.epoch,
                      e.lr, e.mse, e.velocity, e.total);
        os << buf;
    }
}

// One optimizer step over a sampled batch. Returns summed (mse, velocity)
// together with their element counts for per-element logging.
struct StepStats {
    double mse_sum = 0, vel_sum = 0;
    std::size_t mse_elems = 0, vel_elems = 0;
};

inline StepStats train_step(Model& model, const Batch& batch,
                            const LossConfig& loss_cfg, AdamState& adam,
                            double lr) {
    Graph g;
    ParamIds ids;
    register_params(g, model, /*trainable=*/true, ids);

    StepStats stats;
    int total = -1;
    for (const BatchItem& item : batch) {
        MotionSequence norm_in = normalize(model, item.input);
        Tensor norm_target = item.targets;
        {
            MotionSequence tmp;
            tmp.frames = norm_target;
            tmp.fps = item.input.fps;
            norm_target = normalize(model, tmp).frames;
        }
        int pred = build_prediction(g, model, ids, norm_in, item.query_t);
        int truth = g.input(norm_target, "targets");
        int mse = mse_node(g, pred, truth);
        int item_loss = mse;
        stats.mse_sum += g.value(mse).scalar_value();
        stats.mse_elems += norm_target.size();
        if (loss_cfg.lambda > 0 && norm_target.rows() >= 2) {
            int vel = velocity_node(g, pred, truth);
            stats.vel_sum += g.value(vel).scalar_value();
            stats.vel_elems += (norm_target.rows() - 1) * norm_target.cols();
            item_loss = g.add(mse, g.scale(vel, loss_cfg.lambda));
        }
        total = total < 0 ? item_loss : g.add(total, item_loss);
    }
    auto grads = g.gradient(total);
    adam_step(model.params, adam, grads, lr);
    return stats;
}

inline void fit_normalization(Model& model,
                              const std::vector<MotionSequence>& pool) {
    std::size_t D = std::size_t(model.config.feature_dim);
    Tensor mean({D}), var({D});
    std::size_t n = 0;
    for (const MotionSequence& seq : pool) {
        for (std::size_t i = 0; i < seq.length(); ++i)
            for (std::size_t j = 0; j < D; ++j) mean[j] += seq.frames(i, j);
        n += seq.length();
    }
    for (std::size_t j = 0; j < D; ++j) mean[j] /= double(n);
    for (const MotionSequence& seq : pool)
        for (std::size_t i = 0; i < seq.length(); ++i)
            for (std::size_t j = 0; j < D; ++j) {
                double d = seq.frames(i, j) - mean[j];
                var[j] += d * d;
            }
    Tensor std_({D});
    for (std::size_t j = 0; j < D; ++j)
        std_[j] = std::max(std::sqrt(var[j] / double(n)), 1e-8);
    model.buffers["norm.mean"] = std::move(mean);
    model.buffers["norm.std"] = std::move(std_);
}

inline TrainResult train(Model& model, const std::vector<MotionSequence>& pool,
                         const TrainConfig& cfg, const LossConfig& loss_cfg,
                         AdamState* adam_in = nullptr) {
    cfg.validate();
    loss_cfg.validate();
    if (pool.empty())
        throw Error(ErrorKind::data, "train: empty sequence pool");
    for (const MotionSequence& seq : pool) {
        seq.validate();
        if (int(seq.dim()) != model.config.feature_dim)
            throw Error(ErrorKind::data,
                        "train: sequence feature dim does not match model");
    }
    if (!model.normalized()) fit_normalization(model, pool);

    std::size_t pool_frames = 0;
    for (const MotionSequence& seq : pool) pool_frames += seq.length();
    int steps_per_epoch =
        cfg.steps_per_epoch > 0
            ? cfg.steps_per_epoch
            : std::max<int>(1, int((pool_frames + std::size_t(cfg.batch_size) -
                                    1) /
                                   std::size_t(cfg.batch_size)));

    AdamState local_adam;
    AdamState& adam = adam_in ? *adam_in : local_adam;
    std::mt19937_64 rng(cfg.seed);
    TrainResult result;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double lr =
            lr_at(cfg.learning_rate, cfg.decay_factor, cfg.decay_every, epoch);
        double mse_mean = 0, vel_mean = 0;
        for (int step = 0; step < steps_per_epoch; ++step) {
            Batch batch = sample_batch(pool, cfg, rng);
            StepStats stats;
            try {
                stats = train_step(model, batch, loss_cfg, adam, lr);
            } catch (const Error& e) {
                // abort on numeric failure; the last checkpoint on disk
                // stays as written
                if (!cfg.history_path.empty())
                    write_history_csv(cfg.history_path, result.history);
                throw Error(ErrorKind::numeric,
                            std::string("training aborted at epoch ") +
                                std::to_string(epoch) + ": " + e.what());
            }
            result.steps += 1;
            mse_mean += stats.mse_sum / double(stats.mse_elems);
            vel_mean += stats.vel_elems
                            ? stats.vel_sum / double(stats.vel_elems)
                            : 0.0;
        }
        mse_mean /= steps_per_epoch;
        vel_mean /= steps_per_epoch;
        result.history.push_back({epoch, lr, mse_mean, vel_mean,
                                  mse_mean + loss_cfg.lambda * vel_mean});
        if (!cfg.checkpoint_path.empty() && cfg.checkpoint_every > 0 &&
            (epoch + 1) % cfg.checkpoint_every == 0)
            save_model(cfg.checkpoint_path, model);
    }
    if (!cfg.checkpoint_path.empty()) save_model(cfg.checkpoint_path, model);
    if (!cfg.history_path.empty())
        write_history_csv(cfg.history_path, result.history);
    return result;
}

}  // namespace pahires
