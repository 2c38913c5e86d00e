#include "sne/set_blocks.hpp"

#include <cmath>
#include <string>

#include "sne/common.hpp"

namespace sne {

namespace {

using i64 = std::int64_t;

Tensor xavier_uniform(i64 out_dim, i64 in_dim, Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    std::vector<double> data(static_cast<std::size_t>(out_dim * in_dim));
    for (double& v : data) v = rng.uniform(-limit, limit);
    return Tensor({out_dim, in_dim}, std::move(data), true);
}

Tensor zeros_vec(i64 n) { return Tensor::zeros({n}, true); }

Tensor ones_vec(i64 n) { return Tensor::full({n}, 1.0, true); }

// Shared-weight affine over the rows of a batched set: [B×n×h] -> [B×n×out].
Tensor rows_linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    i64 B = x.dim(0), n = x.dim(1), h = x.dim(2);
    Tensor flat = reshape(x, {B * n, h});
    Tensor y = linear(flat, w, &b);
    return reshape(y, {B, n, w.dim(0)});
}

Tensor rff(const Tensor& x, const Tensor& w1, const Tensor& b1, const Tensor& w2,
           const Tensor& b2) {
    return rows_linear(relu(rows_linear(x, w1, b1)), w2, b2);
}

void require_set3(const Tensor& x, i64 h, const char* who) {
    if (x.ndim() != 3 || x.dim(2) != h)
        throw DimensionError(std::string(who) + ": expected [B,n," + std::to_string(h) +
                             "], got " + shape_str(x.shape()));
}

}  // namespace

MabParams MabParams::init(i64 h, i64 heads, bool use_layer_norm, Rng& rng) {
    if (h <= 0 || heads <= 0 || h % heads != 0)
        throw ValidationError("mab: width " + std::to_string(h) + " must be divisible by " +
                              std::to_string(heads) + " heads");
    MabParams p;
    p.h = h;
    p.heads = heads;
    p.use_layer_norm = use_layer_norm;
    p.wq = xavier_uniform(h, h, rng);
    p.bq = zeros_vec(h);
    p.wk = xavier_uniform(h, h, rng);
    p.bk = zeros_vec(h);
    p.wv = xavier_uniform(h, h, rng);
    p.bv = zeros_vec(h);
    p.wo = xavier_uniform(h, h, rng);
    p.bo = zeros_vec(h);
    p.ff1_w = xavier_uniform(h, h, rng);
    p.ff1_b = zeros_vec(h);
    p.ff2_w = xavier_uniform(h, h, rng);
    p.ff2_b = zeros_vec(h);
    p.ln1_gain = ones_vec(h);
    p.ln1_bias = zeros_vec(h);
    p.ln2_gain = ones_vec(h);
    p.ln2_bias = zeros_vec(h);
    return p;
}

std::vector<Tensor> MabParams::parameters() const {
    std::vector<Tensor> out{wq, bq, wk, bk, wv, bv, wo, bo, ff1_w, ff1_b, ff2_w, ff2_b};
    if (use_layer_norm) {
        // Only trainable when the norms actually run, otherwise the optimizer
        // would see parameters that never receive gradients.
        out.insert(out.end(), {ln1_gain, ln1_bias, ln2_gain, ln2_bias});
    }
    return out;
}

PmaParams PmaParams::init(i64 h, i64 heads, bool use_layer_norm, Rng& rng) {
    PmaParams p;
    std::vector<double> seed(static_cast<std::size_t>(h));
    double std_dev = 1.0 / std::sqrt(static_cast<double>(h));
    for (double& v : seed) v = rng.normal(0.0, std_dev);
    p.seed = Tensor({1, h}, std::move(seed), true);
    p.mab = MabParams::init(h, heads, use_layer_norm, rng);
    p.ff_w1 = xavier_uniform(h, h, rng);
    p.ff_b1 = zeros_vec(h);
    p.ff_w2 = xavier_uniform(h, h, rng);
    p.ff_b2 = zeros_vec(h);
    return p;
}

std::vector<Tensor> PmaParams::parameters() const {
    std::vector<Tensor> out{seed};
    for (const Tensor& t : mab.parameters()) out.push_back(t);
    out.push_back(ff_w1);
    out.push_back(ff_b1);
    out.push_back(ff_w2);
    out.push_back(ff_b2);
    return out;
}

PosEncTable PosEncTable::build(Kind kind, i64 max_index, i64 width) {
    if (max_index < 0 || width < 1)
        throw ValidationError("pos-enc table: need max_index >= 0 and width >= 1");
    PosEncTable t;
    t.kind = kind;
    t.max_index = max_index;
    t.width = width;
    t.rows.resize(static_cast<std::size_t>((max_index + 1) * width));
    for (i64 p = 0; p <= max_index; ++p)
        for (i64 i = 0; i < width; ++i) {
            i64 pair = i - (i % 2);  // the "2i" of the formula
            double angle = static_cast<double>(p) /
                           std::pow(10000.0, static_cast<double>(pair) / static_cast<double>(width));
            t.rows[static_cast<std::size_t>(p * width + i)] =
                (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    return t;
}

const double* PosEncTable::row(i64 index) const {
    if (index < 0 || index > max_index)
        throw ValidationError("pos-enc index " + std::to_string(index) + " outside [0," +
                              std::to_string(max_index) + "]");
    return rows.data() + index * width;
}

Tensor multihead_batched(const Tensor& x, const Tensor& y, const MabParams& p) {
    require_set3(x, p.h, "multihead");
    require_set3(y, p.h, "multihead");
    if (x.dim(0) != y.dim(0))
        throw DimensionError("multihead: batch mismatch " + shape_str(x.shape()) + " vs " +
                             shape_str(y.shape()));
    i64 dh = p.h / p.heads;
    Tensor q = split_heads(rows_linear(x, p.wq, p.bq), p.heads);
    Tensor k = split_heads(rows_linear(y, p.wk, p.bk), p.heads);
    Tensor v = split_heads(rows_linear(y, p.wv, p.bv), p.heads);
    Tensor scores = mul_scalar(bmm_nt(q, k), 1.0 / std::sqrt(static_cast<double>(dh)));
    Tensor attn = softmax(scores, -1);
    Tensor pooled = merge_heads(bmm(attn, v), p.heads);
    return rows_linear(pooled, p.wo, p.bo);
}

Tensor mab_batched(const Tensor& x, const Tensor& y, const MabParams& p) {
    Tensor h = add(x, multihead_batched(x, y, p));
    if (p.use_layer_norm) h = layer_norm(h, p.ln1_gain, p.ln1_bias);
    Tensor out = add(h, rff(h, p.ff1_w, p.ff1_b, p.ff2_w, p.ff2_b));
    if (p.use_layer_norm) out = layer_norm(out, p.ln2_gain, p.ln2_bias);
    return out;
}

Tensor sab_batched(const Tensor& x, const MabParams& p) { return mab_batched(x, x, p); }

Tensor pma_batched(const Tensor& x, const PmaParams& p) {
    require_set3(x, p.mab.h, "pma");
    if (x.dim(1) < 1) throw ValidationError("pma: empty set");
    Tensor z = rff(x, p.ff_w1, p.ff_b1, p.ff_w2, p.ff_b2);
    Tensor s = expand_batch(p.seed, x.dim(0));
    return mab_batched(s, z, p.mab);
}

namespace {

Tensor as_batch1(const Tensor& x, i64 h, const char* who) {
    if (x.ndim() != 2 || x.dim(1) != h)
        throw DimensionError(std::string(who) + ": expected [n," + std::to_string(h) +
                             "], got " + shape_str(x.shape()));
    return reshape(x, {1, x.dim(0), h});
}

}  // namespace

Tensor multihead(const Tensor& x, const Tensor& y, const MabParams& p) {
    Tensor out = multihead_batched(as_batch1(x, p.h, "multihead"), as_batch1(y, p.h, "multihead"), p);
    return reshape(out, {x.dim(0), p.h});
}

Tensor mab(const Tensor& x, const Tensor& y, const MabParams& p) {
    Tensor out = mab_batched(as_batch1(x, p.h, "mab"), as_batch1(y, p.h, "mab"), p);
    return reshape(out, {x.dim(0), p.h});
}

Tensor sab(const Tensor& x, const MabParams& p) { return mab(x, x, p); }

Tensor pma(const Tensor& x, const PmaParams& p) {
    Tensor out = pma_batched(as_batch1(x, p.mab.h, "pma"), p);
    return reshape(out, {1, p.mab.h});
}

Tensor pos_encode(const Tensor& x, i64 index, const PosEncTable& table) {
    if (x.ndim() < 1 || x.shape().back() != table.width)
        throw DimensionError("pos_encode: input " + shape_str(x.shape()) +
                             " does not end in table width " + std::to_string(table.width));
    const double* r = table.row(index);
    Tensor v({table.width}, std::vector<double>(r, r + table.width), false);
    return add_rowvec(x, v);
}

Tensor pos_encode_rows(const Tensor& x, const std::vector<i64>& indices,
                       const PosEncTable& table) {
    if (x.ndim() != 2 || x.dim(1) != table.width)
        throw DimensionError("pos_encode_rows: expected [n," + std::to_string(table.width) +
                             "], got " + shape_str(x.shape()));
    if (x.dim(0) != static_cast<i64>(indices.size()))
        throw DimensionError("pos_encode_rows: " + std::to_string(indices.size()) +
                             " indices for " + std::to_string(x.dim(0)) + " rows");
    std::vector<double> pe;
    pe.reserve(x.data().size());
    for (i64 idx : indices) {
        const double* r = table.row(idx);
        pe.insert(pe.end(), r, r + table.width);
    }
    Tensor m(x.shape(), std::move(pe), false);
    return add(x, m);
}

}  // namespace sne
