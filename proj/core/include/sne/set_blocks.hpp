#pragma once

#include <cstdint>
#include <vector>

#include "sne/ops.hpp"
#include "sne/rng.hpp"
#include "sne/tensor.hpp"

namespace sne {

// One multihead attention block: Q/K/V/output projections, a row-wise
// feedforward (affine-ReLU-affine at width h), and optional layer norms.
// H = X + MultiHead(X, Y, Y); out = H + rFF(H); with use_layer_norm each sum
// passes through its LayerNorm. Width is preserved: inputs and outputs are h.
struct MabParams {
    std::int64_t h = 0;
    std::int64_t heads = 0;
    bool use_layer_norm = false;
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor ff1_w, ff1_b, ff2_w, ff2_b;
    Tensor ln1_gain, ln1_bias, ln2_gain, ln2_bias;  // allocated even when the flag is off

    static MabParams init(std::int64_t h, std::int64_t heads, bool use_layer_norm, Rng& rng);
    std::vector<Tensor> parameters() const;
};

// Pooling by multihead attention with one learnable seed vector:
// PMA(X) = MAB(S, rFF(X)).
struct PmaParams {
    Tensor seed;  // [1×h]
    MabParams mab;
    Tensor ff_w1, ff_b1, ff_w2, ff_b2;  // the rFF applied to the input set

    static PmaParams init(std::int64_t h, std::int64_t heads, bool use_layer_norm, Rng& rng);
    std::vector<Tensor> parameters() const;
};

// Sinusoidal encoding table: row p, column 2i = sin(p / 10000^{2i/width}),
// column 2i+1 = cos of the same argument. Parameter-free and deterministic.
struct PosEncTable {
    enum class Kind { layer_type, layer_level };
    Kind kind = Kind::layer_type;
    std::int64_t max_index = 0;
    std::int64_t width = 0;
    std::vector<double> rows;  // (max_index+1) × width

    static PosEncTable build(Kind kind, std::int64_t max_index, std::int64_t width);
    const double* row(std::int64_t index) const;
};

// 2-D set interfaces (X: [n×h], Y: [m×h]).
Tensor multihead(const Tensor& x, const Tensor& y, const MabParams& p);
Tensor mab(const Tensor& x, const Tensor& y, const MabParams& p);
Tensor sab(const Tensor& x, const MabParams& p);
Tensor pma(const Tensor& x, const PmaParams& p);  // -> [1×h]

// Batched forms over a leading set-batch axis ([B×n×h]); every 2-D call is the
// B=1 special case. These keep the autodiff graph small when a layer has many
// chunks.
Tensor multihead_batched(const Tensor& x, const Tensor& y, const MabParams& p);
Tensor mab_batched(const Tensor& x, const Tensor& y, const MabParams& p);
Tensor sab_batched(const Tensor& x, const MabParams& p);
Tensor pma_batched(const Tensor& x, const PmaParams& p);  // -> [B×1×h]

// Adds the table row for `index` to every row of x (any leading dims, last dim
// = table width).
Tensor pos_encode(const Tensor& x, std::int64_t index, const PosEncTable& table);
// Per-row indices: row i of x gets the table row indices[i] ([n×h] only).
Tensor pos_encode_rows(const Tensor& x, const std::vector<std::int64_t>& indices,
                       const PosEncTable& table);

}  // namespace sne
