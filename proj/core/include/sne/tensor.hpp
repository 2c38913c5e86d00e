#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "sne/common.hpp"

namespace sne {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorImpl;
class BackwardCtx;

// Dense row-major float64 tensor with dynamic tape-based reverse-mode
// autodiff. Value semantics: a Tensor is a cheap handle onto a shared node.
//
// Graph policy: a fresh graph is built by every forward pass and stays alive
// as long as some Tensor references it. backward() releases the edges of the
// traversed graph, so it can be called once per forward pass; leaf gradients
// accumulate until zero_grad().
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor from_vector(std::vector<double> data, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const;
    std::int64_t numel() const;
    std::int64_t dim(std::size_t axis) const;
    int ndim() const;
    bool requires_grad() const;

    const std::vector<double>& data() const;
    std::vector<double>& mutable_data();  // only sensible for leaves
    double item() const;
    double at(std::int64_t i) const { return data()[static_cast<std::size_t>(i)]; }

    // Leaf gradient, empty until a backward pass touched this tensor.
    const std::vector<double>& grad() const;
    void zero_grad();

    // Detached copy (no graph, no grad requirement).
    Tensor detach() const;

    TensorImpl* impl() const { return impl_.get(); }
    std::shared_ptr<TensorImpl> impl_ptr() const { return impl_; }

private:
    friend Tensor make_node(Shape shape, std::vector<double> data,
                            std::vector<Tensor> parents,
                            std::function<void(TensorImpl&, BackwardCtx&)> backward_fn,
                            const char* op_name);
    std::shared_ptr<TensorImpl> impl_;
};

struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until needed
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorImpl>> parents;
    std::function<void(TensorImpl&, BackwardCtx&)> backward_fn;  // empty for leaves
    const char* op = "leaf";

    std::int64_t numel() const { return shape_numel(shape); }
    bool is_leaf() const { return !backward_fn; }
};

// Destination for leaf gradients. The default sink writes into the leaf's own
// grad buffer. Training code hands each data-parallel worker its own sink so
// that shared parameters are never written concurrently; the per-model sinks
// are then reduced in model order, which keeps results independent of the
// thread count.
class GradSink {
public:
    virtual ~GradSink() = default;
    // Returns the accumulation buffer for `leaf`, zero-initialized on first use.
    virtual double* buffer_for(TensorImpl* leaf) = 0;
};

class DefaultGradSink : public GradSink {
public:
    double* buffer_for(TensorImpl* leaf) override;
};

class MapGradSink : public GradSink {
public:
    double* buffer_for(TensorImpl* leaf) override;
    const std::unordered_map<TensorImpl*, std::vector<double>>& buffers() const { return buffers_; }
    // Adds every buffer into the corresponding leaf's grad, scaled.
    void reduce_into_leaves(double scale = 1.0);

private:
    std::unordered_map<TensorImpl*, std::vector<double>> buffers_;
};

class BackwardCtx {
public:
    explicit BackwardCtx(GradSink* sink) : sink_(sink) {}
    // Accumulation buffer for any parent node (leaf or interior).
    double* grad_buffer(TensorImpl* node);

private:
    GradSink* sink_;
};

// Reverse-mode sweep from a scalar loss. seed is d(total)/d(loss).
void backward(const Tensor& loss, GradSink* sink = nullptr, double seed = 1.0);

// While a guard is alive, newly built ops record no graph (pure inference).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

// Throws NonFiniteError if any entry is NaN/Inf. Every op output passes
// through this; the op name lands in the message.
void check_finite(const std::vector<double>& values, const char* op);

// Internal helper for op implementations.
Tensor make_node(Shape shape, std::vector<double> data,
                 std::vector<Tensor> parents,
                 std::function<void(TensorImpl&, BackwardCtx&)> backward_fn,
                 const char* op_name);

}  // namespace sne
