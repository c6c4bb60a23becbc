#pragma once

#include "pahires/error.hpp"
#include "pahires/graph.hpp"
#include "pahires/tensor.hpp"

namespace pahires {

struct LossConfig {
    double lambda = 0.5;  // velocity-loss weight

    void validate() const {
        if (lambda < 0)
            throw Error(ErrorKind::config, "lambda must be >= 0");
    }
};

// ---- plain tensor versions ---------------------------------------------

// sum over frames of the squared L2 residual
inline double mse_loss(const Tensor& pred, const Tensor& truth) {
    if (!pred.same_shape(truth))
        throw Error(ErrorKind::numeric,
                    "mse_loss: shape mismatch " + pred.shape_string() +
                        " vs " + truth.shape_string());
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - truth[i];
        s += d * d;
    }
    return s;
}

// squared L2 gap between predicted and true frame-to-frame velocities
inline double velocity_loss(const Tensor& pred, const Tensor& truth) {
    if (!pred.same_shape(truth))
        throw Error(ErrorKind::numeric, "velocity_loss: shape mismatch");
    if (pred.rank() != 2 || pred.rows() < 2)
        throw Error(ErrorKind::numeric, "velocity_loss: needs T >= 2 frames");
    std::size_t T = pred.rows(), D = pred.cols();
    double s = 0.0;
    for (std::size_t t = 0; t + 1 < T; ++t)
        for (std::size_t j = 0; j < D; ++j) {
            double vp = pred(t + 1, j) - pred(t, j);
            double vt = truth(t + 1, j) - truth(t, j);
            double d = vp - vt;
            s += d * d;
        }
    return s;
}

inline double total_loss(const Tensor& pred, const Tensor& truth,
                         const LossConfig& cfg) {
    return mse_loss(pred, truth) + cfg.lambda * velocity_loss(pred, truth);
}

// ---- graph versions (for training) -------------------------------------

inline int mse_node(Graph& g, int pred, int truth) {
    int d = g.sub(pred, truth);
    return g.sum(g.mul(d, d));
}

inline int velocity_node(Graph& g, int pred, int truth) {
    std::size_t T = g.value(pred).rows();
    if (T < 2)
        throw Error(ErrorKind::numeric, "velocity_node: needs T >= 2 frames");
    int vp = g.sub(g.slice(pred, 0, 1, T), g.slice(pred, 0, 0, T - 1));
    int vt = g.sub(g.slice(truth, 0, 1, T), g.slice(truth, 0, 0, T - 1));
    int d = g.sub(vp, vt);
    return g.sum(g.mul(d, d));
}

inline int total_loss_node(Graph& g, int pred, int truth,
                           const LossConfig& cfg) {
    int mse = mse_node(g, pred, truth);
    if (cfg.lambda == 0.0) return mse;
    return g.add(mse, g.scale(velocity_node(g, pred, truth), cfg.lambda));
}

}  // namespace pahires
