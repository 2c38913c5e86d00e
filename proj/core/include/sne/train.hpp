#pragma once

#include <cstdint>
#include <vector>

#include "sne/baselines.hpp"
#include "sne/checkpoint.hpp"
#include "sne/encoder.hpp"
#include "sne/optim.hpp"
#include "sne/predictor.hpp"

namespace sne {

// Joint optimization settings for encoder + predictor head. sne.H doubles as
// the encoding width for baseline encoders so every encoder family feeds the
// same head.
struct TrainConfig {
    EncoderKind encoder = EncoderKind::sne;
    SneConfig sne;
    std::int64_t predictor_hidden = 1000;
    double lr = 1e-4;
    std::int64_t batch_size = 64;
    std::int64_t epochs = 300;
    std::vector<std::int64_t> milestones{180, 255};
    double lr_gamma = 0.3;
    double weight_decay = 0.0;
    double grad_clip = 0.0;  // 0 disables
    std::uint64_t seed = 1;

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss;  // one entry per completed epoch
    std::vector<double> val_loss;
    std::vector<double> val_tau;
    std::vector<double> lr;
    std::int64_t best_epoch = -1;
    double best_val_tau = 0.0;
    bool diverged = false;
};

// The trained artifact. sne/baseline + predictor hold the parameters of the
// best validation-τ epoch; last_params and adam carry the final optimizer
// state so training can resume and replay exactly.
struct TrainedPredictor {
    EncoderKind encoder = EncoderKind::sne;
    TrainConfig config;
    std::string source_id;  // "dataset:architecture" of the zoo it was trained on
    SneParams sne;
    BaselineParams baseline;
    PredictorParams predictor;
    std::vector<std::vector<double>> last_params;
    AdamState adam;
    std::int64_t epochs_done = 0;
    TrainHistory history;

    std::vector<Tensor> best_parameters() const;  // encoder params then head params
};

// Jointly trains encoder and head with Adam + a multistep schedule, selecting
// the best epoch by validation τ. Divergence stops the loop and returns the
// last finite state with history.diverged set. resume_from continues a
// previous run's optimizer state; its config must match.
TrainedPredictor train_predictor(const std::vector<const CheckpointModel*>& train_models,
                                 const std::vector<double>& train_y,
                                 const std::vector<const CheckpointModel*>& val_models,
                                 const std::vector<double>& val_y, const TrainConfig& config,
                                 int threads = 1,
                                 const TrainedPredictor* resume_from = nullptr);

// Forward-only scores from the best parameters, one per model.
std::vector<double> predict_scores(const TrainedPredictor& tp,
                                   const std::vector<const CheckpointModel*>& models,
                                   int threads = 1);

// Forward-only encodings (the vector fed to the head), one row per model.
std::vector<std::vector<double>> encode_models(const TrainedPredictor& tp,
                                               const std::vector<const CheckpointModel*>& models,
                                               int threads = 1);

// Kendall τ, but 0 when one side is fully tied (a saturated predictor has no
// ranking signal; early epochs can produce this legitimately).
double tau_or_zero(const std::vector<double>& pred, const std::vector<double>& y);

}  // namespace sne
