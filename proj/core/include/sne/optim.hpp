#pragma once

#include <cstdint>
#include <vector>

#include "sne/tensor.hpp"

namespace sne {

// Adam with bias correction. Moment accumulators are parallel to the parameter
// list handed to init(); adam_step consumes the gradients living on the
// parameter tensors.
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    void init(const std::vector<Tensor>& params);
    bool initialized() const { return !m.empty(); }
};

// One Adam update over all params. Throws ValidationError when a parameter has
// no gradient buffer (it never took part in a backward pass).
void adam_step(std::vector<Tensor>& params, AdamState& state, double lr,
               double weight_decay = 0.0);

// Plain SGD with L2 weight decay folded into the gradient.
void sgd_step(std::vector<Tensor>& params, double lr, double weight_decay = 0.0);

// Multistep decay: lr(epoch) = base · gamma^(#milestones ≤ epoch).
struct MultistepSchedule {
    double base_lr;
    std::vector<std::int64_t> milestones;  // strictly increasing epoch indices
    double gamma;

    MultistepSchedule(double base_lr, std::vector<std::int64_t> milestones, double gamma);
    double lr_at(std::int64_t epoch) const;
};

double grad_norm(const std::vector<Tensor>& params);
// Scales all gradients so the global L2 norm is at most max_norm.
void clip_grad_norm(std::vector<Tensor>& params, double max_norm);
void zero_grads(std::vector<Tensor>& params);

}  // namespace sne
