#include "sne/encoder.hpp"

#include <cmath>
#include <string>

#include "sne/common.hpp"
#include "sne/ops.hpp"

namespace sne {

namespace {

using i64 = std::int64_t;

constexpr i64 kMaxTypeIndex = 7;  // room beyond {linear=0, conv2d=1}

Tensor sab_stack(Tensor x, const std::vector<MabParams>& blocks) {
    for (const MabParams& b : blocks) x = sab_batched(x, b);
    return x;
}

}  // namespace

void SneConfig::validate() const {
    if (h < 1 || H < 1 || chunksize < 1 || sab_blocks < 1 || max_level < 0)
        throw ValidationError("encoder config: widths, chunksize, and block count must be positive");
    if (heads < 1 || h % heads != 0)
        throw ValidationError("encoder config: width " + std::to_string(h) +
                              " not divisible by " + std::to_string(heads) + " heads");
}

SneParams SneParams::init(const SneConfig& config, Rng& rng) {
    config.validate();
    SneParams p;
    p.config = config;
    double lim = std::sqrt(6.0 / static_cast<double>(1 + config.h));
    std::vector<double> ew(static_cast<std::size_t>(config.h));
    for (double& v : ew) v = rng.uniform(-lim, lim);
    p.embed_w = Tensor({config.h, 1}, std::move(ew), true);
    p.embed_b = Tensor::zeros({config.h}, true);
    auto make_stack = [&](std::vector<MabParams>& stack) {
        for (i64 i = 0; i < config.sab_blocks; ++i)
            stack.push_back(MabParams::init(config.h, config.heads, config.use_layer_norm, rng));
    };
    make_stack(p.phi1);
    make_stack(p.phi2);
    p.gamma_alpha = PmaParams::init(config.h, config.heads, config.use_layer_norm, rng);
    make_stack(p.phi3);
    p.gamma_beta = PmaParams::init(config.h, config.heads, config.use_layer_norm, rng);
    make_stack(p.phi4);
    p.gamma_gamma = PmaParams::init(config.h, config.heads, config.use_layer_norm, rng);
    make_stack(p.sep_sabs);
    p.gamma_sep = PmaParams::init(config.h, config.heads, config.use_layer_norm, rng);
    std::vector<double> se(static_cast<std::size_t>(2 * config.h));
    double se_std = 1.0 / std::sqrt(static_cast<double>(config.h));
    for (double& v : se) v = rng.normal(0.0, se_std);
    p.stream_embed = Tensor({2, config.h}, std::move(se), true);
    if (config.h != config.H) {
        double llim = std::sqrt(6.0 / static_cast<double>(config.h + config.H));
        std::vector<double> lw(static_cast<std::size_t>(config.H * config.h));
        for (double& v : lw) v = rng.uniform(-llim, llim);
        p.lift_w = Tensor({config.H, config.h}, std::move(lw), true);
        p.lift_b = Tensor::zeros({config.H}, true);
    }
    p.type_table = PosEncTable::build(PosEncTable::Kind::layer_type, kMaxTypeIndex, config.h);
    p.level_table = PosEncTable::build(PosEncTable::Kind::layer_level, config.max_level, config.h);
    return p;
}

std::vector<Tensor> SneParams::parameters() const {
    std::vector<Tensor> out{embed_w, embed_b};
    auto push_stack = [&](const std::vector<MabParams>& stack) {
        for (const MabParams& b : stack)
            for (const Tensor& t : b.parameters()) out.push_back(t);
    };
    auto push_pma = [&](const PmaParams& g) {
        for (const Tensor& t : g.parameters()) out.push_back(t);
    };
    push_stack(phi1);
    push_stack(phi2);
    push_pma(gamma_alpha);
    push_stack(phi3);
    push_pma(gamma_beta);
    push_stack(phi4);
    push_pma(gamma_gamma);
    push_stack(sep_sabs);
    push_pma(gamma_sep);
    out.push_back(stream_embed);
    if (lift_w.defined()) {
        out.push_back(lift_w);
        out.push_back(lift_b);
    }
    return out;
}

i64 SneParams::parameter_count() const {
    i64 n = 0;
    for (const Tensor& t : parameters()) n += t.numel();
    return n;
}

PreparedModel prepare_model(const CheckpointModel& model, i64 chunksize) {
    model.validate();
    PreparedModel out;
    out.label = model.test_accuracy;
    for (const LayerRecord& layer : model.layers) {
        PreparedLayer pl;
        pl.weights = chunk_layer(layer, StreamTag::weights, chunksize);
        if (layer.bias) pl.bias = chunk_layer(layer, StreamTag::bias, chunksize);
        out.layers.push_back(std::move(pl));
    }
    return out;
}

namespace {

// The chunk encoder over a whole chunk set at once: [q×c] scalars in,
// [q×h] chunk encodings out.
Tensor encode_chunks_batched(const ChunkedLayer& chunked, i64 type_idx, i64 level_idx,
                             const SneParams& p) {
    const SneConfig& cfg = p.config;
    i64 q = static_cast<i64>(chunked.chunks.size());
    if (q < 1) throw ValidationError("encode: empty chunk set");
    i64 c = cfg.chunksize;
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(q * c));
    for (const std::vector<double>& chunk : chunked.chunks) {
        if (static_cast<i64>(chunk.size()) != c)
            throw DimensionError("encode: chunk of length " + std::to_string(chunk.size()) +
                                 " with configured chunksize " + std::to_string(c));
        data.insert(data.end(), chunk.begin(), chunk.end());
    }
    Tensor x({q * c, 1}, std::move(data), false);
    x = reshape(linear(x, p.embed_w, &p.embed_b), {q, c, cfg.h});
    if (cfg.mask_pad) {
        std::vector<double> mask(static_cast<std::size_t>(q * c * cfg.h));
        std::size_t at = 0;
        for (const std::vector<double>& m : chunked.masks)
            for (double mv : m)
                for (i64 j = 0; j < cfg.h; ++j) mask[at++] = mv;
        x = mul(x, Tensor({q, c, cfg.h}, std::move(mask), false));
    }
    x = sab_stack(x, p.phi1);
    if (cfg.pos_enc_type) x = pos_encode(x, type_idx, p.type_table);
    if (cfg.pos_enc_level) x = pos_encode(x, level_idx, p.level_table);
    x = sab_stack(x, p.phi2);
    Tensor pooled = pma_batched(x, p.gamma_alpha);  // [q×1×h]
    return reshape(pooled, {q, cfg.h});
}

i64 type_index(LayerKind kind) { return static_cast<i64>(kind); }

}  // namespace

Tensor encode_chunk(const std::vector<double>& chunk, i64 type_idx, i64 level_idx,
                    const SneParams& params) {
    ChunkedLayer single;
    single.chunksize = params.config.chunksize;
    single.chunks = {chunk};
    single.masks = {std::vector<double>(chunk.size(), 1.0)};
    single.group_sizes = {1};
    Tensor enc = encode_chunks_batched(single, type_idx, level_idx, params);
    return reshape(enc, {params.config.h});
}

Tensor encode_layer_stream(const ChunkedLayer& chunked, const SneParams& params) {
    const SneConfig& cfg = params.config;
    i64 level = chunked.layer_index;
    Tensor chunk_encs = encode_chunks_batched(chunked, type_index(chunked.kind), level, params);
    i64 q = chunk_encs.dim(0);
    Tensor x = reshape(chunk_encs, {1, q, cfg.h});
    x = sab_stack(x, params.phi3);
    if (cfg.pos_enc_level) x = pos_encode(x, level, params.level_table);
    Tensor pooled = pma_batched(x, params.gamma_beta);  // [1×1×h]
    return reshape(pooled, {cfg.h});
}

Tensor encode_layer(const Tensor& weights_enc, const Tensor* bias_enc, const SneParams& params) {
    const SneConfig& cfg = params.config;
    if (weights_enc.ndim() != 1 || weights_enc.numel() != cfg.h)
        throw DimensionError("encode_layer: weight encoding must be length " +
                             std::to_string(cfg.h));
    std::vector<Tensor> rows{add(reshape(weights_enc, {1, cfg.h}),
                                 slice_rows(params.stream_embed, 0, 1))};
    if (bias_enc) {
        if (bias_enc->ndim() != 1 || bias_enc->numel() != cfg.h)
            throw DimensionError("encode_layer: bias encoding must be length " +
                                 std::to_string(cfg.h));
        rows.push_back(add(reshape(*bias_enc, {1, cfg.h}),
                           slice_rows(params.stream_embed, 1, 1)));
    }
    Tensor x = reshape(concat(rows), {1, static_cast<i64>(rows.size()), cfg.h});
    x = sab_stack(x, params.sep_sabs);
    Tensor pooled = pma_batched(x, params.gamma_sep);
    return reshape(pooled, {cfg.h});
}

Tensor encode_prepared(const PreparedModel& model, const SneParams& params) {
    const SneConfig& cfg = params.config;
    i64 layer_count = static_cast<i64>(model.layers.size());
    if (layer_count < 1) throw ValidationError("encode: model has no layers");
    if (layer_count - 1 > cfg.max_level)
        throw ValidationError("encode: model depth " + std::to_string(layer_count) +
                              " exceeds positional-encoding capacity " +
                              std::to_string(cfg.max_level + 1));
    std::vector<Tensor> layer_vecs;
    std::vector<i64> levels;
    for (i64 li = 0; li < layer_count; ++li) {
        const PreparedLayer& pl = model.layers[static_cast<std::size_t>(li)];
        Tensor wenc = encode_layer_stream(pl.weights, params);
        Tensor lvec;
        if (pl.bias) {
            Tensor benc = encode_layer_stream(*pl.bias, params);
            lvec = encode_layer(wenc, &benc, params);
        } else {
            lvec = encode_layer(wenc, nullptr, params);
        }
        layer_vecs.push_back(std::move(lvec));
        levels.push_back(li);
    }
    Tensor x = stack_rows(layer_vecs);  // [L×h]
    if (cfg.pos_enc_level) x = pos_encode_rows(x, levels, params.level_table);
    x = sab_stack(reshape(x, {1, layer_count, cfg.h}), params.phi4);
    Tensor z = reshape(pma_batched(x, params.gamma_gamma), {1, cfg.h});
    if (params.lift_w.defined()) z = linear(z, params.lift_w, &params.lift_b);
    return reshape(z, {z.dim(1)});
}

Tensor encode_network(const CheckpointModel& model, const SneParams& params) {
    return encode_prepared(prepare_model(model, params.config.chunksize), params);
}

}  // namespace sne
