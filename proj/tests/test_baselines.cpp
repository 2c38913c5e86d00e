#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sne/baselines.hpp"
#include "sne/ops.hpp"
#include "sne/rng.hpp"
#include "sne/zoo.hpp"

using namespace sne;

TEST_CASE("statnn features: 7 numbers per stream in layer order") {
    Rng rng(71);
    CheckpointModel model = testutil::toy_checkpoint(rng);  // conv+bias, linear+bias
    StatFeatures f = statnn_features(model);
    CHECK(f.stream_count == 4);
    CHECK(f.values.size() == 4 * StatFeatures::kPerStream);

    // Stream 0 is the conv weights: verify mean and population variance.
    const auto& w = model.layers[0].weights;
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(w.size());
    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    var /= static_cast<double>(w.size());
    CHECK(f.values[0] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(f.values[1] == doctest::Approx(var).epsilon(1e-12));
}

TEST_CASE("statnn quantiles use linear interpolation") {
    CheckpointModel m;
    m.arch_id = "toy";
    LayerRecord l;
    l.kind = LayerKind::linear;
    l.shape = {1, 4};
    l.weights = {4, 1, 3, 2};  // sorted: 1 2 3 4
    l.layer_index = 0;
    m.layers = {l};
    StatFeatures f = statnn_features(m);
    REQUIRE(f.values.size() == 7);
    CHECK(f.values[0] == doctest::Approx(2.5).epsilon(1e-12));   // mean
    CHECK(f.values[1] == doctest::Approx(1.25).epsilon(1e-12));  // population variance
    CHECK(f.values[2] == doctest::Approx(1.0).epsilon(1e-12));   // q0
    CHECK(f.values[3] == doctest::Approx(1.75).epsilon(1e-12));  // q25
    CHECK(f.values[4] == doctest::Approx(2.5).epsilon(1e-12));   // q50
    CHECK(f.values[5] == doctest::Approx(3.25).epsilon(1e-12));  // q75
    CHECK(f.values[6] == doctest::Approx(4.0).epsilon(1e-12));   // q100
}

TEST_CASE("mlp features flatten every parameter in canonical order") {
    Rng rng(72);
    CheckpointModel model = testutil::toy_checkpoint(rng);
    FlatFeatures f = mlp_flatten_features(model);
    CHECK(static_cast<std::int64_t>(f.values.size()) == model.parameter_count());
    // Order: layer 0 weights, layer 0 bias, layer 1 weights, layer 1 bias.
    CHECK(f.values[0] == model.layers[0].weights[0]);
    CHECK(f.values[8] == (*model.layers[0].bias)[0]);
    CHECK(f.values[10] == model.layers[1].weights[0]);
    CHECK(f.values[34] == (*model.layers[1].bias)[0]);
}

TEST_CASE("arch signatures fingerprint shapes, not values") {
    Rng r1(73), r2(74);
    CheckpointModel a = testutil::toy_checkpoint(r1);
    CheckpointModel b = testutil::toy_checkpoint(r2);  // same shapes, new weights
    CHECK(arch_signature(a) == arch_signature(b));

    CheckpointModel c = a;
    c.layers[1].shape = {4, 8};
    c.layers[1].weights.resize(32);
    c.layers[1].bias = std::vector<double>(4);
    CHECK(arch_signature(a) != arch_signature(c));

    CHECK(arch_signature(build_arch("arch1", 1)) != arch_signature(build_arch("arch2", 1)));
    CHECK(arch_signature(build_arch("arch2", 1)) != arch_signature(build_arch("arch2", 3)));
}

TEST_CASE("baseline encoders lock to the reference architecture") {
    Rng rng(75);
    CheckpointModel ref = testutil::toy_checkpoint(rng);
    CheckpointModel same = testutil::toy_checkpoint(rng);
    CheckpointModel other = build_arch("arch1", 1);

    for (EncoderKind kind : {EncoderKind::mlp, EncoderKind::statnn}) {
        BaselineParams p = BaselineParams::init(kind, ref, 16, rng);
        CHECK(p.out_width == 16);
        CHECK_NOTHROW(baseline_features(p, same));
        CHECK_THROWS_AS(baseline_features(p, other), CapabilityError);
    }
}

TEST_CASE("baseline feature dims: mlp = parameter count, statnn = 7 per stream") {
    Rng rng(76);
    CheckpointModel ref = testutil::toy_checkpoint(rng);
    BaselineParams mlp = BaselineParams::init(EncoderKind::mlp, ref, 8, rng);
    CHECK(mlp.feature_dim == ref.parameter_count());
    CHECK(mlp.lift_w.shape() == Shape{8, ref.parameter_count()});

    BaselineParams stat = BaselineParams::init(EncoderKind::statnn, ref, 8, rng);
    CHECK(stat.feature_dim == 4 * StatFeatures::kPerStream);

    CheckpointModel a1 = build_arch("arch1", 1);
    BaselineParams stat1 = BaselineParams::init(EncoderKind::statnn, a1, 8, rng);
    // arch1: 3 conv layers + 1 linear, all biased -> 8 streams.
    CHECK(stat1.feature_dim == 8 * StatFeatures::kPerStream);
    BaselineParams mlp1 = BaselineParams::init(EncoderKind::mlp, a1, 8, rng);
    CHECK(mlp1.feature_dim == 4970);
}

TEST_CASE("baseline batch encoding lifts features with relu on top") {
    Rng rng(77);
    CheckpointModel ref = testutil::toy_checkpoint(rng);
    BaselineParams p = BaselineParams::init(EncoderKind::statnn, ref, 6, rng);
    std::vector<std::vector<double>> feats = {baseline_features(p, ref),
                                              baseline_features(p, ref)};
    Tensor enc = baseline_encode_batch(p, feats);
    CHECK(enc.shape() == Shape{2, 6});
    // Identical rows in, identical rows out; nothing negative after relu.
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(enc.data()[j] == enc.data()[6 + j]);
        CHECK(enc.data()[j] >= 0.0);
    }
    // Wrong feature width is rejected.
    CHECK_THROWS_AS(baseline_encode_batch(p, {std::vector<double>(3, 0.0)}), CapabilityError);

    // Gradients reach the lift parameters.
    Tensor sum = reduce_sum(enc);
    backward(sum);
    CHECK_FALSE(p.lift_w.grad().empty());
    CHECK_FALSE(p.lift_b.grad().empty());
}

TEST_CASE("encoder kind names round-trip") {
    CHECK(encoder_kind_from_name("sne") == EncoderKind::sne);
    CHECK(encoder_kind_from_name("mlp") == EncoderKind::mlp);
    CHECK(encoder_kind_from_name("statnn") == EncoderKind::statnn);
    CHECK(encoder_kind_name(EncoderKind::statnn) == std::string("statnn"));
    CHECK_THROWS_AS(encoder_kind_from_name("transformer"), ValidationError);
}

TEST_CASE("sne kind cannot be materialized as a baseline") {
    Rng rng(78);
    CheckpointModel ref = testutil::toy_checkpoint(rng);
    CHECK_THROWS_AS(BaselineParams::init(EncoderKind::sne, ref, 8, rng), ValidationError);
}
