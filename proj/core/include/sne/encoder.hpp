#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sne/checkpoint.hpp"
#include "sne/rng.hpp"
#include "sne/set_blocks.hpp"
#include "sne/tensor.hpp"

namespace sne {

struct SneConfig {
    std::int64_t h = 512;        // SAB hidden size
    std::int64_t H = 1024;       // final network encoding width (PMA seed size)
    std::int64_t heads = 4;
    std::int64_t chunksize = 32;
    std::int64_t sab_blocks = 2;  // SABs per set-to-set stack
    bool use_layer_norm = false;
    bool pos_enc_type = true;
    bool pos_enc_level = true;
    bool mask_pad = false;        // zero padded chunk positions after the scalar lift
    std::int64_t max_level = 63;  // positional-encoding table capacity

    void validate() const;
};

// All learnable parameters of the encoding pipeline. The four Φ stacks are
// set-to-set (stacked SABs); Γα/Γβ/Γγ pool chunk sets, chunk-encoding sets,
// and layer sets respectively; the separated layer encoder combines the
// weight/bias stream encodings of one layer.
struct SneParams {
    SneConfig config;
    Tensor embed_w, embed_b;  // scalar lift 1 -> h
    std::vector<MabParams> phi1, phi2, phi3, phi4;
    PmaParams gamma_alpha, gamma_beta, gamma_gamma;
    std::vector<MabParams> sep_sabs;
    PmaParams gamma_sep;
    Tensor stream_embed;      // [2×h], rows tag the weights / bias streams
    Tensor lift_w, lift_b;    // h -> H, allocated only when h != H
    PosEncTable type_table, level_table;

    static SneParams init(const SneConfig& config, Rng& rng);
    std::vector<Tensor> parameters() const;
    std::int64_t parameter_count() const;
};

// A checkpoint with every stream already flattened, padded and chunked, so
// repeated encodings skip that work.
struct PreparedLayer {
    ChunkedLayer weights;
    std::optional<ChunkedLayer> bias;
};
struct PreparedModel {
    std::vector<PreparedLayer> layers;
    double label = 0.0;  // y, the recorded test accuracy
};

PreparedModel prepare_model(const CheckpointModel& model, std::int64_t chunksize);

// Chunk encoder: lift to c×h, Φ1, type/level encodings, Φ2, pool with Γα.
Tensor encode_chunk(const std::vector<double>& chunk, std::int64_t type_idx,
                    std::int64_t level_idx, const SneParams& params);  // -> [h]
// Layer-stream encoder: all chunks of one stream through the chunk encoder,
// then Φ3, the level encoding again, and Γβ.
Tensor encode_layer_stream(const ChunkedLayer& chunked, const SneParams& params);  // -> [h]
// Separated layer encoder: combine the stream encodings of one layer.
Tensor encode_layer(const Tensor& weights_enc, const Tensor* bias_enc,
                    const SneParams& params);  // -> [h]
// Whole pipeline: per-layer vectors, level encodings, Φ4, Γγ, final lift.
Tensor encode_network(const CheckpointModel& model, const SneParams& params);  // -> [H]
Tensor encode_prepared(const PreparedModel& model, const SneParams& params);   // -> [H]

}  // namespace sne
