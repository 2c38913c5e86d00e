#include "sne/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace sne {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

std::int64_t shape_numel(const Shape& shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
        if (d < 0) throw DimensionError("negative dimension in shape " + shape_str(shape));
        n *= d;
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

void check_finite(const std::vector<double>& values, const char* op) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            std::ostringstream os;
            os << "non-finite value " << values[i] << " at index " << i << " in op '" << op << "'";
            throw NonFiniteError(os.str());
        }
    }
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
    std::int64_t n = shape_numel(shape);
    if (n != static_cast<std::int64_t>(data.size()))
        throw DimensionError("tensor data size " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    check_finite(data, "tensor_init");
    impl_ = std::make_shared<TensorImpl>();
    impl_->shape = std::move(shape);
    impl_->data = std::move(data);
    impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    std::int64_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0),
                  requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    std::int64_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), value),
                  requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor(Shape{}, std::vector<double>{value}, requires_grad);
}

Tensor Tensor::from_vector(std::vector<double> data, bool requires_grad) {
    Shape shape{static_cast<std::int64_t>(data.size())};
    return Tensor(std::move(shape), std::move(data), requires_grad);
}

const Shape& Tensor::shape() const {
    if (!impl_) throw ValidationError("use of undefined tensor");
    return impl_->shape;
}

std::int64_t Tensor::numel() const { return shape_numel(shape()); }

std::int64_t Tensor::dim(std::size_t axis) const {
    const Shape& s = shape();
    if (axis >= s.size())
        throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                             shape_str(s));
    return s[axis];
}

int Tensor::ndim() const { return static_cast<int>(shape().size()); }

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

const std::vector<double>& Tensor::data() const {
    if (!impl_) throw ValidationError("use of undefined tensor");
    return impl_->data;
}

std::vector<double>& Tensor::mutable_data() {
    if (!impl_) throw ValidationError("use of undefined tensor");
    return impl_->data;
}

double Tensor::item() const {
    if (numel() != 1)
        throw DimensionError("item() on tensor of shape " + shape_str(shape()));
    return data()[0];
}

const std::vector<double>& Tensor::grad() const {
    if (!impl_) throw ValidationError("use of undefined tensor");
    return impl_->grad;
}

void Tensor::zero_grad() {
    if (!impl_) return;
    impl_->grad.clear();
}

Tensor Tensor::detach() const {
    if (!impl_) return Tensor();
    return Tensor(impl_->shape, impl_->data, false);
}

double* DefaultGradSink::buffer_for(TensorImpl* leaf) {
    if (leaf->grad.empty()) leaf->grad.assign(static_cast<std::size_t>(leaf->numel()), 0.0);
    return leaf->grad.data();
}

double* MapGradSink::buffer_for(TensorImpl* leaf) {
    auto it = buffers_.find(leaf);
    if (it == buffers_.end())
        it = buffers_.emplace(leaf, std::vector<double>(static_cast<std::size_t>(leaf->numel()), 0.0))
                 .first;
    return it->second.data();
}

void MapGradSink::reduce_into_leaves(double scale) {
    for (auto& [leaf, buf] : buffers_) {
        if (leaf->grad.empty()) leaf->grad.assign(buf.size(), 0.0);
        for (std::size_t i = 0; i < buf.size(); ++i) leaf->grad[i] += scale * buf[i];
    }
}

double* BackwardCtx::grad_buffer(TensorImpl* node) {
    if (node->backward_fn) {
        if (node->grad.empty()) node->grad.assign(static_cast<std::size_t>(node->numel()), 0.0);
        return node->grad.data();
    }
    if (node->requires_grad) return sink_->buffer_for(node);
    return nullptr;
}

void backward(const Tensor& loss, GradSink* sink, double seed) {
    if (!loss.defined()) throw ValidationError("backward: undefined tensor");
    if (loss.numel() != 1)
        throw ValidationError("backward: expected scalar loss, got shape " +
                              shape_str(loss.shape()));
    if (!loss.requires_grad())
        throw ValidationError("backward: loss does not require grad");

    DefaultGradSink default_sink;
    if (!sink) sink = &default_sink;
    BackwardCtx ctx(sink);

    std::shared_ptr<TensorImpl> root = loss.impl_ptr();
    if (!root->backward_fn) {
        // The loss is itself a trainable leaf.
        sink->buffer_for(root.get())[0] += seed;
        return;
    }

    // Post-order over parent edges: every node lands after all of its inputs,
    // so the reverse order runs each node only once all consumers have
    // deposited their gradient. topo holds owning pointers because edges are
    // released as the sweep progresses.
    std::vector<std::shared_ptr<TensorImpl>> topo;
    std::unordered_set<TensorImpl*> visited;
    struct Frame {
        std::shared_ptr<TensorImpl> node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack;
    visited.insert(root.get());
    stack.push_back({root, 0});
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            std::shared_ptr<TensorImpl> p = f.node->parents[f.next_parent++];
            if (p->backward_fn && visited.insert(p.get()).second)
                stack.push_back({std::move(p), 0});
        } else {
            topo.push_back(std::move(f.node));
            stack.pop_back();
        }
    }

    root->grad.assign(1, seed);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        TensorImpl* node = it->get();
        if (!node->grad.empty()) node->backward_fn(*node, ctx);
        node->backward_fn = nullptr;
        node->parents.clear();
        node->grad.clear();
        node->grad.shrink_to_fit();
    }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Tensor make_node(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                 std::function<void(TensorImpl&, BackwardCtx&)> backward_fn,
                 const char* op_name) {
    check_finite(data, op_name);
    std::int64_t n = shape_numel(shape);
    if (n != static_cast<std::int64_t>(data.size()))
        throw DimensionError(std::string("op '") + op_name + "' produced " +
                             std::to_string(data.size()) + " values for shape " +
                             shape_str(shape));
    Tensor out;
    out.impl_ = std::make_shared<TensorImpl>();
    out.impl_->shape = std::move(shape);
    out.impl_->data = std::move(data);
    out.impl_->op = op_name;

    bool needs_grad = false;
    if (grad_enabled()) {
        for (const Tensor& p : parents) {
            if (p.defined() && (p.requires_grad() || (p.impl()->backward_fn != nullptr))) {
                needs_grad = true;
                break;
            }
        }
    }
    if (needs_grad) {
        out.impl_->requires_grad = true;
        out.impl_->parents.reserve(parents.size());
        for (const Tensor& p : parents) out.impl_->parents.push_back(p.impl_ptr());
        out.impl_->backward_fn = std::move(backward_fn);
    }
    return out;
}

}  // namespace sne
