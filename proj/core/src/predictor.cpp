#include "sne/predictor.hpp"

#include <cmath>

#include "sne/common.hpp"
#include "sne/ops.hpp"

namespace sne {

void PredictorConfig::validate() const {
    if (in_dim < 1 || hidden < 1)
        throw ValidationError("predictor: in_dim and hidden must be positive");
}

namespace {

Tensor xavier(std::int64_t out, std::int64_t in, Rng& rng) {
    const double lim = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(static_cast<std::size_t>(out * in));
    for (auto& v : w) v = rng.uniform(-lim, lim);
    return Tensor({out, in}, std::move(w), true);
}

}  // namespace

PredictorParams PredictorParams::init(const PredictorConfig& config, Rng& rng) {
    config.validate();
    PredictorParams p;
    p.config = config;
    p.w1 = xavier(config.hidden, config.in_dim, rng);
    p.b1 = Tensor::zeros({config.hidden}, true);
    p.w2 = xavier(config.hidden, config.hidden, rng);
    p.b2 = Tensor::zeros({config.hidden}, true);
    p.w3 = xavier(1, config.hidden, rng);
    p.b3 = Tensor::zeros({1}, true);
    return p;
}

std::vector<Tensor> PredictorParams::parameters() const {
    return {w1, b1, w2, b2, w3, b3};
}

Tensor predict(const PredictorParams& params, const Tensor& x) {
    Tensor h = relu(linear(x, params.w1, &params.b1));
    h = relu(linear(h, params.w2, &params.b2));
    return sigmoid(linear(h, params.w3, &params.b3));
}

}  // namespace sne
