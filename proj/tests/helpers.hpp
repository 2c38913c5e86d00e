#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sne/checkpoint.hpp"
#include "sne/rng.hpp"
#include "sne/tensor.hpp"

namespace testutil {

inline double rel_err(double a, double b) {
    const double denom = std::max(std::abs(a), std::abs(b));
    if (denom < 1e-8) return 0.0;
    return std::abs(a - b) / denom;
}

struct GradCheckResult {
    double max_rel = 0.0;
    int checked = 0;
};

// Central-difference check of d(forward())/d(inputs) against the autodiff
// gradients. forward() must rebuild the graph from the current input data on
// every call (any internal randomness must be re-seeded identically).
inline GradCheckResult gradcheck(const std::function<sne::Tensor()>& forward,
                                 std::vector<sne::Tensor> inputs, sne::Rng& rng,
                                 int coords_per_input = 20, double eps = 1e-5) {
    for (auto& t : inputs) t.zero_grad();
    sne::Tensor loss = forward();
    sne::backward(loss);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(inputs.size());
    for (const auto& t : inputs) analytic.push_back(t.grad());

    GradCheckResult result;
    for (std::size_t p = 0; p < inputs.size(); ++p) {
        const std::int64_t n = inputs[p].numel();
        const int coords = static_cast<int>(std::min<std::int64_t>(coords_per_input, n));
        for (int c = 0; c < coords; ++c) {
            const auto i = static_cast<std::size_t>(
                n <= coords_per_input ? c : rng.uniform_int(0, n - 1));
            std::vector<double>& data = inputs[p].mutable_data();
            const double saved = data[i];
            double fplus = 0.0, fminus = 0.0;
            {
                sne::NoGradGuard guard;
                data[i] = saved + eps;
                fplus = forward().item();
                data[i] = saved - eps;
                fminus = forward().item();
            }
            data[i] = saved;
            const double fd = (fplus - fminus) / (2.0 * eps);
            result.max_rel = std::max(result.max_rel, rel_err(fd, analytic[p][i]));
            ++result.checked;
        }
    }
    return result;
}

inline sne::Tensor random_tensor(sne::Shape shape, sne::Rng& rng, bool requires_grad = false) {
    std::vector<double> data(static_cast<std::size_t>(sne::shape_numel(shape)));
    for (auto& v : data) v = rng.normal();
    return sne::Tensor(std::move(shape), std::move(data), requires_grad);
}

// Random values kept away from 0 so kinked activations (relu, maxpool) see no
// sign flips under finite-difference probing.
inline sne::Tensor random_tensor_away_from_zero(sne::Shape shape, sne::Rng& rng,
                                                bool requires_grad = false) {
    std::vector<double> data(static_cast<std::size_t>(sne::shape_numel(shape)));
    for (auto& v : data) {
        v = rng.normal();
        if (std::abs(v) < 0.05) v = v < 0 ? v - 0.1 : v + 0.1;
    }
    return sne::Tensor(std::move(shape), std::move(data), requires_grad);
}

// A small two-layer checkpoint (conv 2×1×2×2 + linear 3×8, biases on) used by
// encoder and training tests.
inline sne::CheckpointModel toy_checkpoint(sne::Rng& rng, double shift = 0.0) {
    sne::CheckpointModel model;
    model.arch_id = "toy";
    sne::LayerRecord conv;
    conv.kind = sne::LayerKind::conv2d;
    conv.shape = {2, 1, 2, 2};
    conv.weights.resize(8);
    conv.bias = std::vector<double>(2);
    conv.layer_index = 0;
    sne::LayerRecord lin;
    lin.kind = sne::LayerKind::linear;
    lin.shape = {3, 8};
    lin.weights.resize(24);
    lin.bias = std::vector<double>(3);
    lin.layer_index = 1;
    for (auto* layer : {&conv, &lin}) {
        for (auto& w : layer->weights) w = rng.normal(shift, 0.4);
        for (auto& b : *layer->bias) b = rng.normal(shift, 0.4);
    }
    model.layers = {conv, lin};
    return model;
}

}  // namespace testutil
