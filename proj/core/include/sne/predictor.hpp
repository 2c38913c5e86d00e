#pragma once

#include <cstdint>
#include <vector>

#include "sne/rng.hpp"
#include "sne/tensor.hpp"

namespace sne {

// Accuracy head: three affine layers, ReLU, ReLU, Sigmoid. The stock widths
// are 1024 -> 1000 -> 1000 -> 1.
struct PredictorConfig {
    std::int64_t in_dim = 1024;
    std::int64_t hidden = 1000;

    void validate() const;
};

struct PredictorParams {
    PredictorConfig config;
    Tensor w1, b1, w2, b2, w3, b3;

    static PredictorParams init(const PredictorConfig& config, Rng& rng);
    std::vector<Tensor> parameters() const;
};

// x [B×in_dim] -> [B×1], every entry in (0, 1).
Tensor predict(const PredictorParams& params, const Tensor& x);

}  // namespace sne
