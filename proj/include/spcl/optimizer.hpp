#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "spcl/encoder.hpp"
#include "spcl/errors.hpp"

namespace spcl {

struct OptimizerConfig {
    double learning_rate = 3e-3;
    double lr_floor = 1e-5;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t total_steps = 1;  // planned; steps beyond it use the floor lr
};

/// Half-cosine decay from the peak rate to the floor over total planned
/// steps; clamped at the floor afterwards.
inline double cosine_lr(std::size_t step, const OptimizerConfig& cfg) {
    if (cfg.total_steps == 0 || step >= cfg.total_steps) return cfg.lr_floor;
    const double t = static_cast<double>(step) / static_cast<double>(cfg.total_steps);
    return cfg.lr_floor +
           0.5 * (cfg.learning_rate - cfg.lr_floor) * (1.0 + std::cos(std::numbers::pi * t));
}

// First/second moment accumulators, one pair per parameter block.
struct AdamWState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::size_t step = 0;  // completed steps

    static AdamWState for_blocks(const std::vector<ParamBlock>& blocks) {
        AdamWState s;
        for (const auto& b : blocks) {
            s.m.emplace_back(b.values->size(), 0.0);
            s.v.emplace_back(b.values->size(), 0.0);
        }
        return s;
    }
};

/// One decoupled-weight-decay adaptive-moment update with bias correction.
/// The learning rate for the step comes from the cosine schedule at the
/// state's current step index.
inline void optimizer_step(std::vector<ParamBlock>& blocks, AdamWState& state,
                           const OptimizerConfig& cfg) {
    if (blocks.size() != state.m.size())
        throw StructuralError("optimizer_step: state/block count mismatch");
    const double lr = cosine_lr(state.step, cfg);
    const std::size_t t = state.step + 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        auto& values = *blocks[b].values;
        auto& grads = *blocks[b].grads;
        if (values.size() != grads.size() || values.size() != state.m[b].size())
            throw StructuralError("optimizer_step: shape mismatch in block " + blocks[b].name);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double g = grads[i];
            if (!std::isfinite(g))
                throw EvaluationError("optimizer_step: non-finite gradient in block " +
                                      blocks[b].name);
            state.m[b][i] = cfg.beta1 * state.m[b][i] + (1.0 - cfg.beta1) * g;
            state.v[b][i] = cfg.beta2 * state.v[b][i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = state.m[b][i] / bc1;
            const double vhat = state.v[b][i] / bc2;
            values[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.epsilon) +
                               cfg.weight_decay * values[i]);
        }
    }
    state.step = t;
}

}  // namespace spcl
