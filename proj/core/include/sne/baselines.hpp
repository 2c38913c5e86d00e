#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sne/checkpoint.hpp"
#include "sne/rng.hpp"
#include "sne/tensor.hpp"

namespace sne {

// Per layer and per stream: mean, population variance, and the five quantiles
// q ∈ {0, .25, .5, .75, 1} by linear interpolation — 7 numbers per stream,
// streams in layer order (weights, then bias when present).
struct StatFeatures {
    std::vector<double> values;
    std::int64_t stream_count = 0;
    static constexpr std::int64_t kPerStream = 7;
};

// Everything flattened into one vector in canonical layer order (weights then
// bias per layer); length equals the checkpoint's parameter count.
struct FlatFeatures {
    std::vector<double> values;
};

StatFeatures statnn_features(const CheckpointModel& model);
FlatFeatures mlp_flatten_features(const CheckpointModel& model);

// Shape fingerprint used to lock baseline encoders to one architecture.
std::string arch_signature(const CheckpointModel& model);

enum class EncoderKind { sne, mlp, statnn };

const char* encoder_kind_name(EncoderKind kind);
EncoderKind encoder_kind_from_name(const std::string& name);

// A baseline encoder: fixed feature extractor + trainable affine lift to the
// predictor width, ReLU on top. Locked at init to the reference architecture;
// feeding a different architecture raises CapabilityError.
struct BaselineParams {
    EncoderKind kind = EncoderKind::mlp;
    std::string signature;
    std::int64_t feature_dim = 0;
    std::int64_t out_width = 0;
    Tensor lift_w, lift_b;

    static BaselineParams init(EncoderKind kind, const CheckpointModel& reference,
                               std::int64_t out_width, Rng& rng);
    std::vector<Tensor> parameters() const;
};

// Extracts the features for `model`, enforcing the architecture lock.
std::vector<double> baseline_features(const BaselineParams& params, const CheckpointModel& model);

// Lifts a batch of cached feature vectors to [n × out_width].
Tensor baseline_encode_batch(const BaselineParams& params,
                             const std::vector<std::vector<double>>& features);

}  // namespace sne
