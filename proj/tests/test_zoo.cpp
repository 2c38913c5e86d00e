#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "sne/common.hpp"
#include "sne/rng.hpp"
#include "sne/zoo.hpp"

using namespace sne;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ZooSpec tiny_spec() {
    ZooSpec spec;
    spec.architecture = "arch1";
    spec.dataset = "blobs";
    spec.population = 10;
    spec.seed = 7;
    spec.train_images = 40;
    spec.test_images = 40;
    spec.ranges.epochs_min = 1;
    spec.ranges.epochs_max = 2;
    return spec;
}

std::string file_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("architectures carry their published parameter counts") {
    CheckpointModel a1 = build_arch("arch1", 1);
    CHECK(a1.parameter_count() == 4970);
    REQUIRE(a1.layers.size() == 4);
    CHECK(a1.layers[0].kind == LayerKind::conv2d);
    CHECK(a1.layers[3].kind == LayerKind::linear);
    CHECK(a1.layers[3].shape == std::vector<std::int64_t>{10, 16});

    CheckpointModel a2g = build_arch("arch2", 1);
    CHECK(a2g.parameter_count() == 2464);
    CheckpointModel a2c = build_arch("arch2", 3);
    CHECK(a2c.parameter_count() == 2864);
    REQUIRE(a2c.layers.size() == 5);
    CHECK(a2c.layers[3].shape == std::vector<std::int64_t>{20, 36});
    CHECK(a2c.layers[4].shape == std::vector<std::int64_t>{10, 20});

    CHECK_THROWS_AS(build_arch("arch3", 1), ValidationError);
}

TEST_CASE("init_weights fills weights per scheme and leaves biases zero") {
    CheckpointModel m = build_arch("arch1", 1);
    TraineeHyper hyper;
    hyper.init_scheme = "xavier_normal";
    hyper.init_scale = 1.0;
    Rng rng(81);
    init_weights(m, hyper, rng);
    double sumsq = 0.0;
    for (double w : m.layers[0].weights) sumsq += w * w;
    CHECK(sumsq > 0.0);
    for (const auto& l : m.layers)
        for (double b : *l.bias) CHECK(b == 0.0);

    // Scale multiplies the spread.
    CheckpointModel wide = build_arch("arch1", 1);
    TraineeHyper big = hyper;
    big.init_scale = 3.0;
    Rng rng2(81);
    init_weights(wide, big, rng2);
    double sumsq_big = 0.0;
    for (double w : wide.layers[0].weights) sumsq_big += w * w;
    CHECK(sumsq_big > 4.0 * sumsq);

    TraineeHyper bad = hyper;
    bad.init_scheme = "orthogonal";
    CHECK_THROWS_AS(init_weights(m, bad, rng), ValidationError);
}

TEST_CASE("split_counts apportions by largest remainder") {
    CHECK(split_counts(200, 0.4, 0.1, 0.5) == std::vector<std::int64_t>{80, 20, 100});
    CHECK(split_counts(10, 0.4, 0.1, 0.5) == std::vector<std::int64_t>{4, 1, 5});
    auto c = split_counts(7, 0.4, 0.1, 0.5);
    CHECK(c[0] + c[1] + c[2] == 7);
    auto tiny = split_counts(3, 0.4, 0.1, 0.5);
    CHECK(tiny[0] + tiny[1] + tiny[2] == 3);
    CHECK_THROWS_AS(split_counts(10, 0.5, 0.1, 0.5), ValidationError);  // fractions > 1
}

TEST_CASE("a briefly trained trainee beats chance on an easy dataset") {
    DatasetSpec dspec;
    dspec.generator = "blobs";
    dspec.train_count = 80;
    dspec.test_count = 80;
    dspec.seed = 3;
    SyntheticDataset data = grayscale(generate_dataset(dspec));

    TraineeHyper hyper;
    hyper.lr = 0.08;
    hyper.epochs = 3;
    hyper.activation = "relu";
    hyper.init_scheme = "he_uniform";
    TraineeResult r = train_trainee("arch1", data, hyper, 11);
    CHECK_FALSE(r.diverged);
    CHECK(r.steps > 0);
    CHECK(r.model.test_accuracy == doctest::Approx(r.test_accuracy));
    CHECK(r.test_accuracy > 0.2);  // 10 classes, chance = 0.1

    // Same seed, same result; the whole path is deterministic.
    TraineeResult r2 = train_trainee("arch1", data, hyper, 11);
    CHECK(r2.test_accuracy == r.test_accuracy);
    for (std::size_t l = 0; l < r.model.layers.size(); ++l)
        CHECK(r2.model.layers[l].weights == r.model.layers[l].weights);
}

TEST_CASE("an absurd learning rate triggers the divergence path, not a crash") {
    DatasetSpec dspec;
    dspec.generator = "blobs";
    dspec.train_count = 32;
    dspec.test_count = 32;
    dspec.seed = 3;
    SyntheticDataset data = grayscale(generate_dataset(dspec));
    // Needs to overflow a conv product on the step after the blow-up; softmax
    // shift-invariance keeps merely-large nets finite, so go truly absurd.
    TraineeHyper hyper;
    hyper.lr = 1e160;
    hyper.epochs = 2;
    TraineeResult r = train_trainee("arch1", data, hyper, 5);
    CHECK(r.diverged);
    // Whatever came back is still finite.
    for (const auto& l : r.model.layers)
        for (double w : l.weights) CHECK(std::isfinite(w));
}

TEST_CASE("zoo spec json round-trips") {
    ZooSpec spec = tiny_spec();
    spec.ranges.lr_max = 0.25;
    spec.grad_clip = 2.5;
    fs::path dir = fresh_dir("sne_zoospec_test");
    write_zoo_spec(spec, dir / "zoo.json");
    ZooSpec back = read_zoo_spec(dir / "zoo.json");
    CHECK(back.architecture == "arch1");
    CHECK(back.dataset == "blobs");
    CHECK(back.population == 10);
    CHECK(back.seed == 7);
    CHECK(back.ranges.lr_max == 0.25);
    CHECK(back.grad_clip == 2.5);
    CHECK_THROWS_AS(read_zoo_spec(dir / "absent.json"), Error);
    fs::remove_all(dir);
}

TEST_CASE("spec validation rejects nonsense") {
    ZooSpec spec = tiny_spec();
    spec.population = 0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = tiny_spec();
    spec.architecture = "arch9";
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = tiny_spec();
    spec.dataset = "imagenet";
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = tiny_spec();
    spec.ranges.lr_min = 0.0;  // log-uniform needs a positive floor
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = tiny_spec();
    spec.train_fraction = 0.9;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    CHECK(tiny_spec().channels() == 1);
    ZooSpec rgb = tiny_spec();
    rgb.architecture = "arch2";
    CHECK(rgb.channels() == 3);
}

TEST_CASE("train_zoo fills a directory and resumes from it") {
    ZooSpec spec = tiny_spec();
    fs::path dir = fresh_dir("sne_zoo_test");

    ZooSummary first = train_zoo(spec, dir);
    CHECK(first.records.size() == 10);
    CHECK(first.trained + first.reused == 10);
    CHECK(first.reused == 0);
    CHECK(fs::exists(dir / "zoo.json"));
    CHECK(fs::exists(dir / "manifest.jsonl"));

    // Manifest: one JSON line per trainee, rewritten deterministically.
    std::string manifest = file_text(dir / "manifest.jsonl");
    CHECK(std::count(manifest.begin(), manifest.end(), '\n') == 10);

    // Splits follow the apportionment and never overlap.
    std::int64_t tr = 0, va = 0, te = 0;
    for (const auto& r : first.records) {
        if (r.split == "train") ++tr;
        if (r.split == "val") ++va;
        if (r.split == "test") ++te;
    }
    CHECK(tr == 4);
    CHECK(va == 1);
    CHECK(te == 5);

    // Rerun: everything reused, manifest byte-identical.
    ZooSummary second = train_zoo(spec, dir);
    CHECK(second.reused == 10);
    CHECK(second.trained == 0);
    CHECK(file_text(dir / "manifest.jsonl") == manifest);

    // Drop one checkpoint: only that one retrains, and the manifest returns
    // to the identical bytes (same seeds, same data).
    fs::remove(dir / first.records[3].checkpoint);
    ZooSummary third = train_zoo(spec, dir);
    CHECK(third.reused == 9);
    CHECK(third.trained == 1);
    CHECK(file_text(dir / "manifest.jsonl") == manifest);

    // A conflicting spec for the same directory is refused.
    ZooSpec other = spec;
    other.seed = 8;
    CHECK_THROWS_AS(train_zoo(other, dir), ValidationError);

    fs::remove_all(dir);
}

TEST_CASE("load_zoo returns aligned records and models with usable splits") {
    ZooSpec spec = tiny_spec();
    spec.seed = 9;
    fs::path dir = fresh_dir("sne_zoo_load_test");
    train_zoo(spec, dir);

    LoadedZoo zoo = load_zoo(dir);
    CHECK(zoo.spec.population == 10);
    REQUIRE(zoo.records.size() == zoo.models.size());
    CHECK(zoo.records.size() == 10);  // assuming no failures at these settings
    for (std::size_t i = 0; i < zoo.records.size(); ++i) {
        CHECK_FALSE(zoo.records[i].failed);
        CHECK(zoo.models[i].test_accuracy ==
              doctest::Approx(zoo.records[i].test_accuracy).epsilon(1e-6));
        CHECK(zoo.models[i].arch_id == "arch1");
        CHECK(zoo.models[i].dataset_id == "blobs");
    }

    auto train_idx = zoo.split_indices("train");
    auto val_idx = zoo.split_indices("val");
    auto test_idx = zoo.split_indices("test");
    CHECK(train_idx.size() == 4);
    CHECK(val_idx.size() == 1);
    CHECK(test_idx.size() == 5);
    std::set<std::int64_t> all;
    for (auto v : train_idx) all.insert(v);
    for (auto v : val_idx) all.insert(v);
    for (auto v : test_idx) all.insert(v);
    CHECK(all.size() == 10);
    CHECK_THROWS_AS(zoo.split_indices("holdout"), ValidationError);

    CHECK_THROWS_AS(load_zoo(dir / "nowhere"), Error);
    fs::remove_all(dir);
}

TEST_CASE("manifest round-trips through read/write") {
    ZooRecord r;
    r.index = 0;
    r.checkpoint = "checkpoints/ckpt_00000.bin";
    r.test_accuracy = 0.375;
    r.split = "train";
    r.hyper.lr = 0.123;
    r.hyper.activation = "tanh";
    r.hyper.epochs = 5;
    ZooRecord f = r;
    f.index = 1;
    f.failed = true;
    f.split = "test";

    fs::path dir = fresh_dir("sne_manifest_test");
    write_manifest(dir, {r, f});
    auto back = read_manifest(dir);
    REQUIRE(back.size() == 2);
    CHECK(back[0].checkpoint == r.checkpoint);
    CHECK(back[0].test_accuracy == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(back[0].hyper.lr == doctest::Approx(0.123).epsilon(1e-12));
    CHECK(back[0].hyper.activation == "tanh");
    CHECK(back[0].hyper.epochs == 5);
    CHECK_FALSE(back[0].failed);
    CHECK(back[1].failed);
    CHECK(back[1].split == "test");
    fs::remove_all(dir);
}
