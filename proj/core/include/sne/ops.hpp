#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sne/rng.hpp"
#include "sne/tensor.hpp"

namespace sne {

// Raw GEMM kernels on row-major buffers. acc=false overwrites C, acc=true
// adds into it (the form every backward pass needs).
void mm_nn(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
           std::int64_t n, bool acc);  // C[m×n] = A[m×k]·B[k×n]
void mm_nt(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
           std::int64_t n, bool acc);  // C[m×n] = A[m×k]·B[n×k]^T
void mm_tn(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
           std::int64_t n, bool acc);  // C[m×n] = A[k×m]^T·B[k×n]

// --- structure ---
Tensor reshape(const Tensor& x, Shape shape);
Tensor transpose(const Tensor& x);  // 2-D only
Tensor concat(const std::vector<Tensor>& xs);            // 2-D row-wise
std::vector<Tensor> split(const Tensor& x, const std::vector<std::int64_t>& row_counts);
Tensor slice_rows(const Tensor& x, std::int64_t begin, std::int64_t count);
Tensor stack_rows(const std::vector<Tensor>& rows);      // 1-D [h] each -> [n×h]
Tensor expand_batch(const Tensor& x, std::int64_t batch);  // [n×h] -> [B×n×h]
Tensor split_heads(const Tensor& x, std::int64_t heads);   // [B×n×h] -> [B·heads×n×h/heads]
Tensor merge_heads(const Tensor& x, std::int64_t heads);   // inverse of split_heads

// --- arithmetic ---
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& x, double s);
Tensor mul_scalar(const Tensor& x, double s);
Tensor add_rowvec(const Tensor& x, const Tensor& v);  // broadcast v[h] over rows of [...×h]

// --- activations ---
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor sigmoid(const Tensor& x);
Tensor tanh_op(const Tensor& x);
Tensor dropout(const Tensor& x, double p, Rng& rng);  // inverted scaling; p=0 is identity

// --- linear algebra ---
Tensor matmul(const Tensor& a, const Tensor& b);  // [m×k]·[k×n]
// x[rows×in] · W[out×in]^T + b  (b optional)
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor* bias);
Tensor bmm(const Tensor& a, const Tensor& b);     // [B×m×k]·[B×k×n]
Tensor bmm_nt(const Tensor& a, const Tensor& b);  // [B×m×k]·[B×n×k]^T

// --- row-wise / normalization ---
Tensor softmax(const Tensor& x, int axis);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

// --- reductions ---
Tensor reduce_sum(const Tensor& x);
Tensor reduce_mean(const Tensor& x);

// --- losses ---
// Element-wise mean of -[y·log p + (1-y)·log(1-p)], p clamped to [1e-7, 1-1e-7].
Tensor bce_loss(const Tensor& pred, const std::vector<double>& target);
// Mean negative log-likelihood over rows of logits with integer labels.
Tensor cross_entropy_logits(const Tensor& logits, const std::vector<int>& labels);

// --- image ops (trainee CNNs) ---
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor* bias, std::int64_t stride,
              std::int64_t padding);  // x[N×C×H×W], weight[Co×Ci×kh×kw]
Tensor maxpool2d(const Tensor& x, std::int64_t k, std::int64_t stride);
Tensor global_avg_pool(const Tensor& x);  // [N×C×H×W] -> [N×C]

// --- no-grad helpers ---
std::vector<int> argmax_rows(const Tensor& x);  // [N×K] -> N indices

}  // namespace sne
