#pragma once

#include <cmath>
#include <map>
#include <string>

#include "pahires/error.hpp"
#include "pahires/tensor.hpp"

namespace pahires {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::map<std::string, Tensor> m;  // first moments
    std::map<std::string, Tensor> v;  // second moments
    long step = 0;
};

inline void adam_step(std::map<std::string, Tensor>& params, AdamState& state,
                      const std::map<std::string, Tensor>& grads, double lr,
                      const AdamConfig& cfg = {}) {
    state.step += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, double(state.step));
    double bc2 = 1.0 - std::pow(cfg.beta2, double(state.step));
    for (auto& [name, p] : params) {
        auto git = grads.find(name);
        if (git == grads.end()) continue;
        const Tensor& g = git->second;
        if (!g.all_finite())
            throw Error(ErrorKind::numeric,
                        "non-finite gradient for parameter " + name);
        if (!g.same_shape(p))
            throw Error(ErrorKind::numeric,
                        "gradient shape mismatch for parameter " + name);
        Tensor& m = state.m.try_emplace(name, Tensor(p.shape())).first->second;
        Tensor& v = state.v.try_emplace(name, Tensor(p.shape())).first->second;
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

// step decay: lr(epoch) = base * factor^floor(epoch / every)
inline double lr_at(double base, double factor, int every, int epoch) {
    return base * std::pow(factor, double(epoch / every));
}

}  // namespace pahires
