#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "sne/ops.hpp"
#include "sne/rng.hpp"
#include "sne/tensor.hpp"

using namespace sne;
using testutil::gradcheck;
using testutil::random_tensor;
using testutil::random_tensor_away_from_zero;

namespace {

// Scalarize an arbitrary output so every coordinate contributes with a
// distinct weight; a plain sum would miss sign/permutation errors.
Tensor weighted_sum(const Tensor& out) {
    std::vector<double> w(static_cast<std::size_t>(out.numel()));
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = 0.3 + 0.17 * static_cast<double>(i % 11) - 0.05 * static_cast<double>(i % 7);
    return reduce_sum(mul(out, Tensor(out.shape(), std::move(w))));
}

}  // namespace

TEST_CASE("softmax matches frozen reference values") {
    Tensor x({1, 3}, {1.0, 2.0, 3.0});
    Tensor y = softmax(x, -1);
    CHECK(y.data()[0] == doctest::Approx(0.09003057317038046).epsilon(1e-12));
    CHECK(y.data()[1] == doctest::Approx(0.24472847105479765).epsilon(1e-12));
    CHECK(y.data()[2] == doctest::Approx(0.6652409557748219).epsilon(1e-12));
    double sum = y.data()[0] + y.data()[1] + y.data()[2];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax is shift invariant and handles large magnitudes") {
    Tensor a({2, 4}, {1.0, 2.0, 3.0, 4.0, -2.0, 0.0, 2.0, 4.0});
    Tensor b({2, 4}, {1001.0, 1002.0, 1003.0, 1004.0, 998.0, 1000.0, 1002.0, 1004.0});
    Tensor ya = softmax(a, 1);
    Tensor yb = softmax(b, 1);
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(ya.data()[i] == doctest::Approx(yb.data()[i]).epsilon(1e-12));
}

TEST_CASE("softmax over the middle axis normalizes each fiber") {
    Rng rng(11);
    Tensor x = random_tensor({2, 3, 4}, rng);
    Tensor y = softmax(x, 1);
    for (std::int64_t o = 0; o < 2; ++o)
        for (std::int64_t in = 0; in < 4; ++in) {
            double s = 0.0;
            for (std::int64_t j = 0; j < 3; ++j)
                s += y.data()[static_cast<std::size_t>(o * 12 + j * 4 + in)];
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
}

TEST_CASE("bce_loss matches frozen reference values") {
    // -[0.9 ln 0.9 + 0.1 ln 0.1]
    Tensor p1({1}, {0.9});
    CHECK(bce_loss(p1, {0.9}).item() == doctest::Approx(0.3250829733914482).epsilon(1e-12));
    // p = 1/2, y = 1 -> ln 2
    Tensor p2({1}, {0.5});
    CHECK(bce_loss(p2, {1.0}).item() == doctest::Approx(0.6931471805599453).epsilon(1e-12));
    // Means over elements.
    Tensor p3({2}, {0.5, 0.5});
    CHECK(bce_loss(p3, {1.0, 0.0}).item() == doctest::Approx(0.6931471805599453).epsilon(1e-12));
}

TEST_CASE("bce_loss clamps saturated predictions instead of overflowing") {
    Tensor p({2}, {0.0, 1.0});
    double loss = bce_loss(p, {1.0, 0.0}).item();
    CHECK(loss == doctest::Approx(-std::log(1e-7)).epsilon(1e-9));
    CHECK(std::isfinite(loss));
    CHECK_THROWS_AS(bce_loss(p, {1.5, 0.0}), ValidationError);
    CHECK_THROWS_AS(bce_loss(p, {1.0}), ValidationError);
}

TEST_CASE("cross_entropy_logits matches -log softmax") {
    Tensor logits({1, 3}, {1.0, 2.0, 3.0});
    double loss = cross_entropy_logits(logits, {2}).item();
    CHECK(loss == doctest::Approx(-std::log(0.6652409557748219)).epsilon(1e-12));
    Tensor two({2, 3}, {1.0, 2.0, 3.0, 1.0, 2.0, 3.0});
    double mean = cross_entropy_logits(two, {2, 0}).item();
    double expect = 0.5 * (-std::log(0.6652409557748219) - std::log(0.09003057317038046));
    CHECK(mean == doctest::Approx(expect).epsilon(1e-12));
    CHECK_THROWS_AS(cross_entropy_logits(two, {2}), ValidationError);
    CHECK_THROWS_AS(cross_entropy_logits(two, {2, 3}), ValidationError);
}

TEST_CASE("layer_norm normalizes rows to zero mean and unit scale") {
    Tensor x({1, 4}, {1.0, 2.0, 3.0, 4.0});
    Tensor gain({4}, {1.0, 1.0, 1.0, 1.0});
    Tensor bias({4}, {0.0, 0.0, 0.0, 0.0});
    Tensor y = layer_norm(x, gain, bias);
    double inv = 1.0 / std::sqrt(1.25 + 1e-5);  // population variance of the row
    CHECK(y.data()[0] == doctest::Approx(-1.5 * inv).epsilon(1e-12));
    CHECK(y.data()[1] == doctest::Approx(-0.5 * inv).epsilon(1e-12));
    CHECK(y.data()[2] == doctest::Approx(0.5 * inv).epsilon(1e-12));
    CHECK(y.data()[3] == doctest::Approx(1.5 * inv).epsilon(1e-12));

    Tensor g2({4}, {2.0, 2.0, 2.0, 2.0});
    Tensor b2({4}, {1.0, 1.0, 1.0, 1.0});
    Tensor y2 = layer_norm(x, g2, b2);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(y2.data()[i] == doctest::Approx(2.0 * y.data()[i] + 1.0).epsilon(1e-12));
}

TEST_CASE("conv2d matches a hand-computed case") {
    // 3x3 input 1..9, 2x2 kernel picking the main diagonal, bias 0.5.
    Tensor x({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    Tensor w({1, 1, 2, 2}, {1, 0, 0, 1});
    Tensor b({1}, {0.5});
    Tensor y = conv2d(x, w, &b, 1, 0);
    CHECK(y.shape() == Shape{1, 1, 2, 2});
    CHECK(y.data()[0] == doctest::Approx(6.5).epsilon(1e-12));
    CHECK(y.data()[1] == doctest::Approx(8.5).epsilon(1e-12));
    CHECK(y.data()[2] == doctest::Approx(12.5).epsilon(1e-12));
    CHECK(y.data()[3] == doctest::Approx(14.5).epsilon(1e-12));
}

TEST_CASE("conv2d applies stride and zero padding") {
    Tensor x({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    Tensor w({1, 1, 2, 2}, {1, 1, 1, 1});
    Tensor y = conv2d(x, w, nullptr, 2, 1);
    // Padded 5x5 image, 2x2 sum windows at (0,0),(0,2),(2,0),(2,2).
    CHECK(y.shape() == Shape{1, 1, 2, 2});
    CHECK(y.data()[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(y.data()[1] == doctest::Approx(2.0 + 3.0).epsilon(1e-12));
    CHECK(y.data()[2] == doctest::Approx(4.0 + 7.0).epsilon(1e-12));
    CHECK(y.data()[3] == doctest::Approx(5.0 + 6.0 + 8.0 + 9.0).epsilon(1e-12));
}

TEST_CASE("conv2d maps channels independently per output filter") {
    Rng rng(3);
    Tensor x = random_tensor({2, 3, 5, 5}, rng);
    Tensor w = random_tensor({4, 3, 3, 3}, rng);
    Tensor b = random_tensor({4}, rng);
    Tensor y = conv2d(x, w, &b, 1, 0);
    CHECK(y.shape() == Shape{2, 4, 3, 3});
    // Spot-check one output element against the raw sum.
    double acc = b.data()[1];
    for (std::int64_t c = 0; c < 3; ++c)
        for (std::int64_t i = 0; i < 3; ++i)
            for (std::int64_t j = 0; j < 3; ++j) {
                double xv = x.data()[static_cast<std::size_t>(((1 * 3 + c) * 5 + (1 + i)) * 5 + (2 + j))];
                double wv = w.data()[static_cast<std::size_t>(((1 * 3 + c) * 3 + i) * 3 + j)];
                acc += xv * wv;
            }
    CHECK(y.data()[static_cast<std::size_t>(((1 * 4 + 1) * 3 + 1) * 3 + 2)] ==
          doctest::Approx(acc).epsilon(1e-10));
    CHECK_THROWS_AS(conv2d(x, random_tensor({4, 2, 3, 3}, rng), nullptr, 1, 0), DimensionError);
}

TEST_CASE("maxpool2d picks window maxima") {
    std::vector<double> seq(16);
    for (std::size_t i = 0; i < 16; ++i) seq[i] = static_cast<double>(i + 1);
    Tensor x({1, 1, 4, 4}, seq);
    Tensor y = maxpool2d(x, 2, 2);
    CHECK(y.shape() == Shape{1, 1, 2, 2});
    CHECK(y.data() == std::vector<double>{6, 8, 14, 16});
}

TEST_CASE("global_avg_pool averages each channel plane") {
    Tensor x({1, 2, 2, 2}, {1, 2, 3, 4, 10, 20, 30, 40});
    Tensor y = global_avg_pool(x);
    CHECK(y.shape() == Shape{1, 2});
    CHECK(y.data()[0] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(y.data()[1] == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("argmax_rows returns per-row indices") {
    Tensor x({2, 3}, {1, 3, 2, 5, 4, 6});
    CHECK(argmax_rows(x) == std::vector<int>{1, 2});
}

TEST_CASE("matmul and linear match hand-computed products") {
    Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor b({3, 2}, {7, 8, 9, 10, 11, 12});
    Tensor c = matmul(a, b);
    CHECK(c.shape() == Shape{2, 2});
    CHECK(c.data() == std::vector<double>{58, 64, 139, 154});
    CHECK_THROWS_AS(matmul(a, a), DimensionError);

    Tensor w({2, 3}, {1, 0, 1, 0, 1, 0});  // out=2, in=3
    Tensor bias({2}, {0.5, -0.5});
    Tensor y = linear(a, w, &bias);
    CHECK(y.shape() == Shape{2, 2});
    CHECK(y.data() == std::vector<double>{4.5, 1.5, 10.5, 4.5});
    Tensor y2 = linear(a, w, nullptr);
    CHECK(y2.data() == std::vector<double>{4, 2, 10, 5});
}

TEST_CASE("bmm agrees with per-slice matmul") {
    Rng rng(5);
    Tensor a = random_tensor({3, 2, 4}, rng);
    Tensor b = random_tensor({3, 4, 5}, rng);
    Tensor y = bmm(a, b);
    CHECK(y.shape() == Shape{3, 2, 5});
    for (std::int64_t s = 0; s < 3; ++s) {
        Tensor as({2, 4}, std::vector<double>(a.data().begin() + s * 8, a.data().begin() + (s + 1) * 8));
        Tensor bs({4, 5}, std::vector<double>(b.data().begin() + s * 20, b.data().begin() + (s + 1) * 20));
        Tensor ys = matmul(as, bs);
        for (std::size_t i = 0; i < 10; ++i)
            CHECK(y.data()[static_cast<std::size_t>(s * 10) + i] ==
                  doctest::Approx(ys.data()[i]).epsilon(1e-12));
    }
}

TEST_CASE("bmm_nt transposes the right operand per slice") {
    Rng rng(6);
    Tensor a = random_tensor({2, 3, 4}, rng);
    Tensor b = random_tensor({2, 5, 4}, rng);
    Tensor y = bmm_nt(a, b);
    CHECK(y.shape() == Shape{2, 3, 5});
    for (std::int64_t s = 0; s < 2; ++s) {
        Tensor as({3, 4}, std::vector<double>(a.data().begin() + s * 12, a.data().begin() + (s + 1) * 12));
        Tensor bs({5, 4}, std::vector<double>(b.data().begin() + s * 20, b.data().begin() + (s + 1) * 20));
        Tensor ys = matmul(as, transpose(bs));
        for (std::size_t i = 0; i < 15; ++i)
            CHECK(y.data()[static_cast<std::size_t>(s * 15) + i] ==
                  doctest::Approx(ys.data()[i]).epsilon(1e-12));
    }
}

TEST_CASE("structure ops round-trip data") {
    Rng rng(7);
    Tensor x = random_tensor({3, 4}, rng);

    Tensor r = reshape(x, {2, 6});
    CHECK(r.shape() == Shape{2, 6});
    CHECK(r.data() == x.data());
    CHECK_THROWS_AS(reshape(x, {5, 5}), DimensionError);

    Tensor tt = transpose(transpose(x));
    CHECK(tt.data() == x.data());
    CHECK(transpose(x).shape() == Shape{4, 3});

    Tensor c = concat({x, x});
    CHECK(c.shape() == Shape{6, 4});
    auto parts = split(c, {3, 3});
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].data() == x.data());
    CHECK(parts[1].data() == x.data());
    CHECK_THROWS_AS(split(c, {4, 4}), DimensionError);

    Tensor s = slice_rows(x, 1, 2);
    CHECK(s.shape() == Shape{2, 4});
    CHECK(s.data() == std::vector<double>(x.data().begin() + 4, x.data().begin() + 12));

    Tensor row0({4}, std::vector<double>(x.data().begin(), x.data().begin() + 4));
    Tensor row1({4}, std::vector<double>(x.data().begin() + 4, x.data().begin() + 8));
    Tensor st = stack_rows({row0, row1});
    CHECK(st.shape() == Shape{2, 4});
    CHECK(st.data() == std::vector<double>(x.data().begin(), x.data().begin() + 8));
}

TEST_CASE("expand_batch repeats the matrix and head split inverts") {
    Rng rng(8);
    Tensor x = random_tensor({3, 4}, rng);
    Tensor e = expand_batch(x, 2);
    CHECK(e.shape() == Shape{2, 3, 4});
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(e.data()[i] == x.data()[i]);
        CHECK(e.data()[12 + i] == x.data()[i]);
    }

    Tensor b = random_tensor({2, 3, 4}, rng);
    Tensor h = split_heads(b, 2);
    CHECK(h.shape() == Shape{4, 3, 2});
    Tensor m = merge_heads(h, 2);
    CHECK(m.shape() == b.shape());
    CHECK(m.data() == b.data());
    CHECK_THROWS_AS(split_heads(b, 3), DimensionError);
}

TEST_CASE("add_rowvec broadcasts over rows") {
    Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor v({3}, {10, 20, 30});
    Tensor y = add_rowvec(x, v);
    CHECK(y.data() == std::vector<double>{11, 22, 33, 14, 25, 36});
    Tensor b({2, 2, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
    Tensor yb = add_rowvec(b, v);
    CHECK(yb.data() == std::vector<double>{11, 22, 33, 14, 25, 36, 17, 28, 39, 20, 31, 42});
    CHECK_THROWS_AS(add_rowvec(x, Tensor({2}, {1, 2})), DimensionError);
}

TEST_CASE("reductions and scalar arithmetic") {
    Tensor x({2, 2}, {1, 2, 3, 4});
    CHECK(reduce_sum(x).item() == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(reduce_mean(x).item() == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(add_scalar(x, 1.5).data() == std::vector<double>{2.5, 3.5, 4.5, 5.5});
    CHECK(mul_scalar(x, -2.0).data() == std::vector<double>{-2, -4, -6, -8});
    CHECK(sub(x, x).data() == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("dropout keeps or scales deterministically by seed") {
    Rng rng(9);
    Tensor x = random_tensor({8, 8}, rng);

    Rng d0(10);
    Tensor id = dropout(x, 0.0, d0);
    CHECK(id.data() == x.data());

    Rng d1(10);
    Tensor a = dropout(x, 0.5, d1);
    Rng d2(10);
    Tensor b = dropout(x, 0.5, d2);
    CHECK(a.data() == b.data());

    int zeros = 0;
    for (std::size_t i = 0; i < 64; ++i) {
        double v = a.data()[i];
        if (v == 0.0) {
            ++zeros;
        } else {
            CHECK(v == doctest::Approx(x.data()[i] * 2.0).epsilon(1e-12));
        }
    }
    CHECK(zeros > 8);
    CHECK(zeros < 56);
    CHECK_THROWS_AS(dropout(x, 1.5, d1), ValidationError);
}

TEST_CASE("activation forward values") {
    Tensor x({5}, {-2.0, -0.5, 0.0, 0.5, 2.0});
    CHECK(relu(x).data() == std::vector<double>{0, 0, 0, 0.5, 2.0});
    CHECK(leaky_relu(x, 0.1).data() == std::vector<double>{-0.2, -0.05, 0, 0.5, 2.0});
    Tensor s = sigmoid(x);
    CHECK(s.data()[2] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.data()[4] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
    Tensor t = tanh_op(x);
    CHECK(t.data()[0] == doctest::Approx(std::tanh(-2.0)).epsilon(1e-12));
    CHECK(t.data()[2] == doctest::Approx(0.0));
}

// ---------------------------------------------------------------------------
// Gradient checks: central differences vs autodiff for every differentiable op.
// ---------------------------------------------------------------------------

TEST_CASE("gradcheck: elementwise arithmetic") {
    Rng rng(100);
    Tensor a = random_tensor({3, 4}, rng, true);
    Tensor b = random_tensor({3, 4}, rng, true);
    auto fwd = [&] { return weighted_sum(mul(add(a, b), sub(a, mul_scalar(b, 0.5)))); };
    auto r = gradcheck(fwd, {a, b}, rng);
    CHECK(r.checked == 24);
    CHECK(r.max_rel < 1e-6);
}

TEST_CASE("gradcheck: add_scalar and add_rowvec") {
    Rng rng(101);
    Tensor x = random_tensor({3, 4}, rng, true);
    Tensor v = random_tensor({4}, rng, true);
    auto fwd = [&] { return weighted_sum(add_rowvec(add_scalar(x, 0.7), v)); };
    auto r = gradcheck(fwd, {x, v}, rng);
    CHECK(r.max_rel < 1e-6);
}

TEST_CASE("gradcheck: relu and leaky_relu") {
    Rng rng(102);
    Tensor x = random_tensor_away_from_zero({4, 5}, rng, true);
    auto fwd = [&] { return weighted_sum(relu(x)); };
    auto r = gradcheck(fwd, {x}, rng);
    CHECK(r.max_rel < 1e-6);
    auto fwd2 = [&] { return weighted_sum(leaky_relu(x, 0.1)); };
    auto r2 = gradcheck(fwd2, {x}, rng);
    CHECK(r2.max_rel < 1e-6);
}

TEST_CASE("gradcheck: sigmoid and tanh") {
    Rng rng(103);
    Tensor x = random_tensor({4, 5}, rng, true);
    auto fwd = [&] { return weighted_sum(sigmoid(x)); };
    CHECK(gradcheck(fwd, {x}, rng).max_rel < 1e-5);
    auto fwd2 = [&] { return weighted_sum(tanh_op(x)); };
    CHECK(gradcheck(fwd2, {x}, rng).max_rel < 1e-5);
}

TEST_CASE("gradcheck: dropout with replayed mask") {
    Rng rng(104);
    Tensor x = random_tensor({4, 5}, rng, true);
    auto fwd = [&] {
        Rng mask(77);  // identical mask on every reconstruction
        return weighted_sum(dropout(x, 0.3, mask));
    };
    CHECK(gradcheck(fwd, {x}, rng).max_rel < 1e-6);
}

TEST_CASE("gradcheck: matmul and linear") {
    Rng rng(105);
    Tensor a = random_tensor({3, 4}, rng, true);
    Tensor b = random_tensor({4, 5}, rng, true);
    auto fwd = [&] { return weighted_sum(matmul(a, b)); };
    CHECK(gradcheck(fwd, {a, b}, rng).max_rel < 1e-5);

    Tensor x = random_tensor({3, 4}, rng, true);
    Tensor w = random_tensor({2, 4}, rng, true);
    Tensor bias = random_tensor({2}, rng, true);
    auto fwd2 = [&] { return weighted_sum(linear(x, w, &bias)); };
    CHECK(gradcheck(fwd2, {x, w, bias}, rng).max_rel < 1e-5);
}

TEST_CASE("gradcheck: bmm and bmm_nt") {
    Rng rng(106);
    Tensor a = random_tensor({2, 3, 4}, rng, true);
    Tensor b = random_tensor({2, 4, 3}, rng, true);
    auto fwd = [&] { return weighted_sum(bmm(a, b)); };
    CHECK(gradcheck(fwd, {a, b}, rng).max_rel < 1e-5);

    Tensor c = random_tensor({2, 5, 4}, rng, true);
    auto fwd2 = [&] { return weighted_sum(bmm_nt(a, c)); };
    CHECK(gradcheck(fwd2, {a, c}, rng).max_rel < 1e-5);
}

TEST_CASE("gradcheck: softmax") {
    Rng rng(107);
    Tensor x = random_tensor({3, 5}, rng, true);
    auto fwd = [&] { return weighted_sum(softmax(x, -1)); };
    CHECK(gradcheck(fwd, {x}, rng).max_rel < 1e-5);
    Tensor y = random_tensor({2, 3, 4}, rng, true);
    auto fwd2 = [&] { return weighted_sum(softmax(y, 1)); };
    CHECK(gradcheck(fwd2, {y}, rng).max_rel < 1e-5);
}

TEST_CASE("gradcheck: layer_norm") {
    Rng rng(108);
    Tensor x = random_tensor({3, 6}, rng, true);
    Tensor gain = random_tensor({6}, rng, true);
    Tensor bias = random_tensor({6}, rng, true);
    auto fwd = [&] { return weighted_sum(layer_norm(x, gain, bias)); };
    CHECK(gradcheck(fwd, {x, gain, bias}, rng).max_rel < 1e-4);
}

TEST_CASE("gradcheck: reductions") {
    Rng rng(109);
    Tensor x = random_tensor({3, 4}, rng, true);
    auto fwd = [&] { return reduce_sum(mul(x, x)); };
    CHECK(gradcheck(fwd, {x}, rng).max_rel < 1e-6);
    auto fwd2 = [&] { return reduce_mean(mul(x, x)); };
    CHECK(gradcheck(fwd2, {x}, rng).max_rel < 1e-6);
}

TEST_CASE("gradcheck: losses") {
    Rng rng(110);
    // Predictions away from the clamp boundaries.
    std::vector<double> pd(6);
    for (auto& v : pd) v = 0.15 + 0.7 * rng.uniform();
    Tensor pred({6}, pd, true);
    std::vector<double> target = {1, 0, 1, 0.5, 0, 1};
    auto fwd = [&] { return bce_loss(pred, target); };
    CHECK(gradcheck(fwd, {pred}, rng).max_rel < 1e-5);

    Tensor logits = random_tensor({4, 5}, rng, true);
    std::vector<int> labels = {0, 3, 2, 4};
    auto fwd2 = [&] { return cross_entropy_logits(logits, labels); };
    CHECK(gradcheck(fwd2, {logits}, rng).max_rel < 1e-5);
}

TEST_CASE("gradcheck: structure ops route gradients home") {
    Rng rng(111);
    Tensor x = random_tensor({4, 6}, rng, true);
    auto fwd = [&] { return weighted_sum(transpose(reshape(x, {3, 8}))); };
    CHECK(gradcheck(fwd, {x}, rng).max_rel < 1e-6);

    Tensor a = random_tensor({2, 3}, rng, true);
    Tensor b = random_tensor({4, 3}, rng, true);
    auto fwd2 = [&] {
        Tensor c = concat({a, b});
        auto parts = split(c, {4, 2});
        return add(weighted_sum(parts[0]), mul_scalar(weighted_sum(parts[1]), 0.5));
    };
    CHECK(gradcheck(fwd2, {a, b}, rng).max_rel < 1e-6);

    auto fwd3 = [&] { return weighted_sum(slice_rows(b, 1, 2)); };
    CHECK(gradcheck(fwd3, {b}, rng).max_rel < 1e-6);

    Tensor r0 = random_tensor({5}, rng, true);
    Tensor r1 = random_tensor({5}, rng, true);
    auto fwd4 = [&] { return weighted_sum(stack_rows({r0, r1, r0})); };
    CHECK(gradcheck(fwd4, {r0, r1}, rng).max_rel < 1e-6);
}

TEST_CASE("gradcheck: batch expansion and head reshuffles") {
    Rng rng(112);
    Tensor x = random_tensor({3, 4}, rng, true);
    auto fwd = [&] { return weighted_sum(expand_batch(x, 3)); };
    CHECK(gradcheck(fwd, {x}, rng).max_rel < 1e-6);

    Tensor b = random_tensor({2, 3, 4}, rng, true);
    auto fwd2 = [&] { return weighted_sum(merge_heads(split_heads(b, 2), 2)); };
    CHECK(gradcheck(fwd2, {b}, rng).max_rel < 1e-6);
}

TEST_CASE("gradcheck: conv2d, maxpool2d, global_avg_pool") {
    Rng rng(113);
    Tensor x = random_tensor({2, 2, 5, 5}, rng, true);
    Tensor w = random_tensor({3, 2, 3, 3}, rng, true);
    Tensor b = random_tensor({3}, rng, true);
    auto fwd = [&] { return weighted_sum(conv2d(x, w, &b, 1, 0)); };
    CHECK(gradcheck(fwd, {x, w, b}, rng, 25).max_rel < 1e-5);

    auto fwd_pad = [&] { return weighted_sum(conv2d(x, w, nullptr, 2, 1)); };
    CHECK(gradcheck(fwd_pad, {x, w}, rng, 25).max_rel < 1e-5);

    Tensor p = random_tensor_away_from_zero({2, 2, 4, 4}, rng, true);
    auto fwd2 = [&] { return weighted_sum(maxpool2d(p, 2, 2)); };
    CHECK(gradcheck(fwd2, {p}, rng, 32).max_rel < 1e-6);

    auto fwd3 = [&] { return weighted_sum(global_avg_pool(x)); };
    CHECK(gradcheck(fwd3, {x}, rng).max_rel < 1e-6);
}
