#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sne {

struct DatasetSpec {
    std::string generator;  // one of dataset_registry()
    std::int64_t train_count = 96;
    std::int64_t test_count = 96;
    std::uint64_t seed = 0;
};

// Deterministic 10-class image collection. Images are row-major
// [count × channels × 28 × 28] doubles in [0,1]; labels are class-balanced.
struct SyntheticDataset {
    std::string generator;
    std::int64_t channels = 3;
    std::int64_t height = 28;
    std::int64_t width = 28;
    std::int64_t class_count = 10;
    std::vector<double> train_images;
    std::vector<int> train_labels;
    std::vector<double> test_images;
    std::vector<int> test_labels;

    std::int64_t image_size() const { return channels * height * width; }
};

// The four stock generator families. Each renders a class-conditional
// parametric pattern with per-sample jitter and pixel noise; the class signal
// survives grayscale conversion.
const std::vector<std::string>& dataset_registry();

SyntheticDataset generate_dataset(const DatasetSpec& spec);

// Channel-mean reduction to 1×28×28.
SyntheticDataset grayscale(const SyntheticDataset& src);

}  // namespace sne
