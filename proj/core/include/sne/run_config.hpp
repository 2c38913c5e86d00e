#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sne/train.hpp"

namespace sne {

// Flat key=value run configuration with the stock hyperparameters as
// defaults. Files use one `key = value` per line with '#' comments; CLI
// flags override file values. Unknown keys are rejected.
struct RunConfig {
    std::string encoder = "sne";  // sne | mlp | statnn
    double lr = 1e-4;
    std::int64_t batch_size = 64;
    std::int64_t epochs = 300;
    std::int64_t encoding_size = 1024;   // final network encoding width H
    std::int64_t sab_hidden = 512;       // width h inside every attention stack
    std::int64_t pma_seed_size = 1024;   // must equal encoding_size (single width knob)
    std::int64_t sab_blocks = 2;
    std::int64_t chunksize = 32;
    bool layer_norm = false;
    std::int64_t heads = 4;
    bool pos_enc_type = true;
    bool pos_enc_level = true;
    bool mask_pad = false;
    std::int64_t max_level = 63;
    std::int64_t predictor_hidden = 1000;
    std::vector<std::int64_t> milestones{180, 255};
    double lr_gamma = 0.3;
    double weight_decay = 0.0;
    double grad_clip = 0.0;
    std::uint64_t seed = 1;
    std::int64_t threads = 1;

    // Typed assignment by key name; throws ValidationError for unknown keys
    // or unparseable values.
    void set(const std::string& key, const std::string& value);
    void validate() const;

    TrainConfig to_train_config() const;
    std::string to_text() const;  // sorted "key = value" lines; the fingerprint input
    std::uint64_t fingerprint() const;

    static const std::vector<std::string>& key_names();
};

RunConfig load_run_config(const std::string& path);

// Applies "key=value" override strings in order.
void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides);

}  // namespace sne
