#include "sne/optim.hpp"

#include <cmath>
#include <string>

#include "sne/common.hpp"

namespace sne {

void AdamState::init(const std::vector<Tensor>& params) {
    m.clear();
    v.clear();
    step = 0;
    for (const Tensor& p : params) {
        m.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
        v.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
    }
}

void adam_step(std::vector<Tensor>& params, AdamState& state, double lr, double weight_decay) {
    if (!state.initialized()) state.init(params);
    if (state.m.size() != params.size())
        throw ValidationError("adam_step: state tracks " + std::to_string(state.m.size()) +
                              " tensors but got " + std::to_string(params.size()));
    ++state.step;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor& p = params[t];
        const std::vector<double>& g = p.grad();
        if (g.empty())
            throw ValidationError("adam_step: parameter " + std::to_string(t) +
                                  " has no gradient");
        std::vector<double>& w = p.mutable_data();
        if (state.m[t].size() != w.size())
            throw ValidationError("adam_step: accumulator shape drifted for parameter " +
                                  std::to_string(t));
        std::vector<double>& mt = state.m[t];
        std::vector<double>& vt = state.v[t];
        for (std::size_t i = 0; i < w.size(); ++i) {
            double gi = g[i] + weight_decay * w[i];
            mt[i] = state.beta1 * mt[i] + (1.0 - state.beta1) * gi;
            vt[i] = state.beta2 * vt[i] + (1.0 - state.beta2) * gi * gi;
            double mhat = mt[i] / bc1;
            double vhat = vt[i] / bc2;
            w[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
        check_finite(w, "adam_step");
    }
}

void sgd_step(std::vector<Tensor>& params, double lr, double weight_decay) {
    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor& p = params[t];
        const std::vector<double>& g = p.grad();
        if (g.empty())
            throw ValidationError("sgd_step: parameter " + std::to_string(t) +
                                  " has no gradient");
        std::vector<double>& w = p.mutable_data();
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] -= lr * (g[i] + weight_decay * w[i]);
        check_finite(w, "sgd_step");
    }
}

MultistepSchedule::MultistepSchedule(double base_lr_, std::vector<std::int64_t> milestones_,
                                     double gamma_)
    : base_lr(base_lr_), milestones(std::move(milestones_)), gamma(gamma_) {
    if (base_lr <= 0.0) throw ValidationError("multistep: base learning rate must be positive");
    if (gamma <= 0.0 || gamma > 1.0)
        throw ValidationError("multistep: decay factor must be in (0,1]");
    for (std::size_t i = 1; i < milestones.size(); ++i)
        if (milestones[i] <= milestones[i - 1])
            throw ValidationError("multistep: milestones must be strictly increasing");
}

double MultistepSchedule::lr_at(std::int64_t epoch) const {
    double lr = base_lr;
    for (std::int64_t ms : milestones)
        if (epoch >= ms) lr *= gamma;
    return lr;
}

double grad_norm(const std::vector<Tensor>& params) {
    double sq = 0.0;
    for (const Tensor& p : params)
        for (double g : p.grad()) sq += g * g;
    return std::sqrt(sq);
}

void clip_grad_norm(std::vector<Tensor>& params, double max_norm) {
    if (max_norm <= 0.0) throw ValidationError("clip_grad_norm: max_norm must be positive");
    double norm = grad_norm(params);
    if (norm <= max_norm || norm == 0.0) return;
    double scale = max_norm / norm;
    for (Tensor& p : params) {
        if (!p.impl()) continue;
        for (double& g : p.impl()->grad) g *= scale;
    }
}

void zero_grads(std::vector<Tensor>& params) {
    for (Tensor& p : params) p.zero_grad();
}

}  // namespace sne
