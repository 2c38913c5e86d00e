#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sne/checkpoint.hpp"
#include "sne/dataset.hpp"
#include "sne/rng.hpp"

namespace sne {

// Sampling ranges for trainee hyperparameters. Scales are multipliers on the
// scheme's nominal standard deviation; learning rate is drawn log-uniformly.
struct HyperRanges {
    double lr_min = 5e-3;
    double lr_max = 0.6;
    double weight_decay_min = 0.0;
    double weight_decay_max = 2e-3;
    double dropout_min = 0.0;
    double dropout_max = 0.5;
    double init_scale_min = 0.2;
    double init_scale_max = 3.0;
    std::vector<std::string> init_schemes{"xavier_uniform", "xavier_normal", "he_uniform",
                                          "he_normal"};
    std::vector<std::string> activations{"relu", "tanh", "leaky_relu", "sigmoid"};
    std::int64_t epochs_min = 1;
    std::int64_t epochs_max = 8;

    void validate() const;
};

struct ZooSpec {
    std::string architecture = "arch1";  // arch1 | arch2
    std::string dataset = "blobs";       // synthetic generator id
    std::int64_t population = 200;
    HyperRanges ranges;
    std::uint64_t seed = 1;
    std::uint64_t dataset_seed = 1;
    double train_fraction = 0.4;
    double val_fraction = 0.1;
    double test_fraction = 0.5;
    std::int64_t train_images = 96;
    std::int64_t test_images = 96;
    std::int64_t batch_size = 16;
    double grad_clip = 5.0;  // 0 disables clipping

    void validate() const;
    std::int64_t channels() const;  // 1 for arch1 (grayscale), 3 for arch2
};

struct TraineeHyper {
    double lr = 0.05;
    double weight_decay = 0.0;
    double dropout = 0.0;
    std::string init_scheme = "he_uniform";
    double init_scale = 1.0;
    std::string activation = "relu";
    std::int64_t epochs = 4;
};

struct ZooRecord {
    std::int64_t index = 0;
    std::string checkpoint;  // path relative to the zoo directory
    double test_accuracy = 0.0;
    std::string split;  // train | val | test
    TraineeHyper hyper;
    bool failed = false;  // trainee diverged; consumers skip these
};

// Layer skeleton (zero weights) with shapes fixed by the architecture id.
// arch1 is the 3×conv(16,k3) + GAP + linear(16→10) stack; arch2 the
// conv(8,k5)/pool, conv(6,k5)/pool, conv(4,k2), linear(36→20), linear(20→10)
// stack. in_channels selects the grayscale or RGB variant of the first conv.
CheckpointModel build_arch(const std::string& arch_id, std::int64_t in_channels);

// Fills weights in place per the sampled scheme; biases stay zero.
void init_weights(CheckpointModel& model, const TraineeHyper& hyper, Rng& rng);

struct TraineeResult {
    CheckpointModel model;
    double test_accuracy = 0.0;
    bool diverged = false;
    std::int64_t steps = 0;
};

// Trains one classifier with plain SGD on the given dataset and reports its
// test accuracy. Divergence (non-finite loss or weights) stops training and
// returns the last finite parameters with diverged set.
TraineeResult train_trainee(const std::string& arch_id, const SyntheticDataset& data,
                            const TraineeHyper& hyper, std::uint64_t seed,
                            std::int64_t batch_size = 16, double grad_clip = 5.0);

// Test-split accuracy of a stored checkpoint (forward pass only, no dropout).
double evaluate_accuracy(const CheckpointModel& model, const std::string& arch_id,
                         const SyntheticDataset& data);

// Largest-remainder apportionment of population over (train, val, test).
std::vector<std::int64_t> split_counts(std::int64_t population, double train_fraction,
                                       double val_fraction, double test_fraction);

struct ZooSummary {
    std::vector<ZooRecord> records;  // index order, one per trainee
    std::int64_t failed = 0;
    std::int64_t trained = 0;
    std::int64_t reused = 0;  // checkpoints picked up from a previous run
};

// Trains the whole population into dir (checkpoints/ + manifest.jsonl +
// zoo.json). Rerunning resumes: existing checkpoints are reloaded instead of
// retrained, and the manifest is rewritten from scratch in index order.
ZooSummary train_zoo(const ZooSpec& spec, const std::filesystem::path& dir, int threads = 1);

void write_zoo_spec(const ZooSpec& spec, const std::filesystem::path& path);
ZooSpec read_zoo_spec(const std::filesystem::path& path);

std::vector<ZooRecord> read_manifest(const std::filesystem::path& zoo_dir);
void write_manifest(const std::filesystem::path& zoo_dir, const std::vector<ZooRecord>& records);

// A zoo pulled back into memory; failed records are dropped here.
struct LoadedZoo {
    std::filesystem::path dir;
    ZooSpec spec;
    std::vector<ZooRecord> records;
    std::vector<CheckpointModel> models;  // aligned with records

    std::vector<std::int64_t> split_indices(const std::string& split) const;
};

LoadedZoo load_zoo(const std::filesystem::path& dir);

}  // namespace sne
