#include "sne/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sne/common.hpp"
#include "sne/rng.hpp"

namespace sne {

namespace {

using i64 = std::int64_t;

constexpr i64 kSide = 28;
constexpr i64 kChannels = 3;
constexpr i64 kClasses = 10;
constexpr double kPi = 3.14159265358979323846;

// Deterministic per-class tint. The sin term separates classes per channel;
// the ramp keeps the channel MEAN class-dependent (the three sin phases sum
// to zero), so a brightness cue survives a channel-mean grayscale reduction
// and briefly trained models can still pick up a partial ranking signal.
double class_tint(int label, i64 channel) {
    const double ramp = (static_cast<double>(label) - 4.5) / 4.5;
    return 0.55 + 0.25 * ramp +
           0.20 * std::sin(2.0 * kPi * (static_cast<double>(label) / 10.0 +
                                        static_cast<double>(channel) / 3.0));
}

// Class shows up three ways, from easy to hard: overall brightness (tint
// ramp), blob size, and blob position on the circle. The size ladder walks
// label*3 mod 10 so size and brightness disagree about ordering; adjacent
// brightness classes then sit far apart in size and the 10 classes spread
// over a 2-D grid instead of crowding along one knife-edged axis.
void render_blobs(int label, Rng& rng, double* img) {
    double angle = 2.0 * kPi * label / 10.0 + rng.uniform(-0.15, 0.15);
    double radius = 8.0 + rng.uniform(-1.0, 1.0);
    double cx = 13.5 + radius * std::cos(angle);
    double cy = 13.5 + radius * std::sin(angle);
    double sigma = 1.6 + 0.30 * ((label * 3) % 10) + rng.uniform(-0.15, 0.15);
    for (i64 y = 0; y < kSide; ++y)
        for (i64 x = 0; x < kSide; ++x) {
            double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            double v = 0.15 + 0.85 * std::exp(-d2 / (2.0 * sigma * sigma));
            for (i64 c = 0; c < kChannels; ++c)
                img[c * kSide * kSide + y * kSide + x] = v * class_tint(label, c);
        }
}

void render_stripes(int label, Rng& rng, double* img) {
    double theta = kPi * label / 10.0 + rng.uniform(-0.06, 0.06);
    double freq = 0.55 + rng.uniform(-0.08, 0.08);
    double phase = rng.uniform(0.0, 2.0 * kPi);
    double ct = std::cos(theta), st = std::sin(theta);
    for (i64 y = 0; y < kSide; ++y)
        for (i64 x = 0; x < kSide; ++x) {
            double proj = freq * (ct * (x - 13.5) + st * (y - 13.5)) + phase;
            double v = 0.5 + 0.45 * std::sin(proj);
            for (i64 c = 0; c < kChannels; ++c)
                img[c * kSide * kSide + y * kSide + x] = v * class_tint(label, c);
        }
}

void render_rings(int label, Rng& rng, double* img) {
    double r0 = 3.0 + 0.9 * label + rng.uniform(-0.35, 0.35);
    double cx = 13.5 + rng.uniform(-1.5, 1.5);
    double cy = 13.5 + rng.uniform(-1.5, 1.5);
    double thick = 1.6;
    for (i64 y = 0; y < kSide; ++y)
        for (i64 x = 0; x < kSide; ++x) {
            double d = std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy));
            double v = 0.12 + 0.88 * std::exp(-(d - r0) * (d - r0) / (thick * thick));
            for (i64 c = 0; c < kChannels; ++c)
                img[c * kSide * kSide + y * kSide + x] = v * class_tint(label, c);
        }
}

void render_checkers(int label, Rng& rng, double* img) {
    double cell = 3.0 + static_cast<double>(label % 5) + rng.uniform(-0.2, 0.2);
    bool diagonal = label >= 5;
    double ox = rng.uniform(0.0, cell), oy = rng.uniform(0.0, cell);
    for (i64 y = 0; y < kSide; ++y)
        for (i64 x = 0; x < kSide; ++x) {
            double u = static_cast<double>(x) + ox, w = static_cast<double>(y) + oy;
            double a = diagonal ? (u + w) * 0.70710678118654752440 : u;
            double b = diagonal ? (u - w) * 0.70710678118654752440 : w;
            i64 parity = (static_cast<i64>(std::floor(a / cell)) +
                          static_cast<i64>(std::floor(b / cell))) & 1;
            double v = parity ? 0.85 : 0.2;
            for (i64 c = 0; c < kChannels; ++c)
                img[c * kSide * kSide + y * kSide + x] = v * class_tint(label, c);
        }
}

void render(const std::string& generator, int label, Rng& rng, double* img) {
    if (generator == "blobs")
        render_blobs(label, rng, img);
    else if (generator == "stripes")
        render_stripes(label, rng, img);
    else if (generator == "rings")
        render_rings(label, rng, img);
    else if (generator == "checkers")
        render_checkers(label, rng, img);
    else
        throw ValidationError("unknown dataset generator '" + generator + "'");
    // pixel noise + clamp
    i64 n = kChannels * kSide * kSide;
    for (i64 i = 0; i < n; ++i) {
        double v = img[i] + rng.normal(0.0, 0.12);
        img[i] = std::clamp(v, 0.0, 1.0);
    }
}

void fill_split(const std::string& generator, std::uint64_t seed, const char* split, i64 count,
                std::vector<double>& images, std::vector<int>& labels) {
    Rng rng(Rng::derive(seed, std::string("dataset/") + generator + "/" + split));
    labels.resize(static_cast<std::size_t>(count));
    for (i64 i = 0; i < count; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % kClasses);
    rng.shuffle(labels);
    i64 isz = kChannels * kSide * kSide;
    images.assign(static_cast<std::size_t>(count * isz), 0.0);
    for (i64 i = 0; i < count; ++i)
        render(generator, labels[static_cast<std::size_t>(i)], rng, images.data() + i * isz);
}

}  // namespace

const std::vector<std::string>& dataset_registry() {
    static const std::vector<std::string> names{"blobs", "stripes", "rings", "checkers"};
    return names;
}

SyntheticDataset generate_dataset(const DatasetSpec& spec) {
    if (spec.train_count < 1 || spec.test_count < 1)
        throw ValidationError("dataset: train/test counts must be positive");
    SyntheticDataset ds;
    ds.generator = spec.generator;
    fill_split(spec.generator, spec.seed, "train", spec.train_count, ds.train_images,
               ds.train_labels);
    fill_split(spec.generator, spec.seed, "test", spec.test_count, ds.test_images,
               ds.test_labels);
    return ds;
}

SyntheticDataset grayscale(const SyntheticDataset& src) {
    if (src.channels == 1) return src;
    SyntheticDataset out;
    out.generator = src.generator;
    out.channels = 1;
    out.height = src.height;
    out.width = src.width;
    out.class_count = src.class_count;
    out.train_labels = src.train_labels;
    out.test_labels = src.test_labels;
    i64 area = src.height * src.width;
    auto reduce = [&](const std::vector<double>& in, std::vector<double>& dst) {
        i64 n = static_cast<i64>(in.size()) / (src.channels * area);
        dst.assign(static_cast<std::size_t>(n * area), 0.0);
        for (i64 i = 0; i < n; ++i)
            for (i64 c = 0; c < src.channels; ++c)
                for (i64 p = 0; p < area; ++p)
                    dst[static_cast<std::size_t>(i * area + p)] +=
                        in[static_cast<std::size_t>((i * src.channels + c) * area + p)] /
                        static_cast<double>(src.channels);
    };
    reduce(src.train_images, out.train_images);
    reduce(src.test_images, out.test_images);
    return out;
}

}  // namespace sne
