#include "sne/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>

namespace sne {

namespace {

using i64 = std::int64_t;

void require(bool cond, const std::string& msg) {
    if (!cond) throw DimensionError(msg);
}

i64 rows_of(const Shape& s) {
    i64 r = 1;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) r *= s[i];
    return r;
}

i64 last_of(const Shape& s) { return s.empty() ? 1 : s.back(); }

}  // namespace

void mm_nn(const double* a, const double* b, double* c, i64 m, i64 k, i64 n, bool acc) {
    for (i64 i = 0; i < m; ++i) {
        double* crow = c + i * n;
        if (!acc) std::memset(crow, 0, sizeof(double) * static_cast<std::size_t>(n));
        const double* arow = a + i * k;
        for (i64 p = 0; p < k; ++p) {
            double av = arow[p];
            const double* brow = b + p * n;
            for (i64 j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void mm_nt(const double* a, const double* b, double* c, i64 m, i64 k, i64 n, bool acc) {
    for (i64 i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (i64 j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double s = 0.0;
            for (i64 p = 0; p < k; ++p) s += arow[p] * brow[p];
            crow[j] = acc ? crow[j] + s : s;
        }
    }
}

void mm_tn(const double* a, const double* b, double* c, i64 m, i64 k, i64 n, bool acc) {
    if (!acc) std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(m * n));
    for (i64 p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (i64 i = 0; i < m; ++i) {
            double av = arow[i];
            double* crow = c + i * n;
            for (i64 j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// --- structure ---

Tensor reshape(const Tensor& x, Shape shape) {
    i64 n = shape_numel(shape);
    require(n == x.numel(), "reshape: cannot view " + shape_str(x.shape()) + " as " +
                                shape_str(shape));
    TensorImpl* xi = x.impl();
    return make_node(std::move(shape), x.data(), {x},
                     [xi](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
                     },
                     "reshape");
}

Tensor transpose(const Tensor& x) {
    require(x.ndim() == 2, "transpose: expected 2-D, got " + shape_str(x.shape()));
    i64 m = x.dim(0), n = x.dim(1);
    const auto& xd = x.data();
    std::vector<double> out(static_cast<std::size_t>(m * n));
    for (i64 i = 0; i < m; ++i)
        for (i64 j = 0; j < n; ++j) out[static_cast<std::size_t>(j * m + i)] = xd[static_cast<std::size_t>(i * n + j)];
    TensorImpl* xi = x.impl();
    return make_node({n, m}, std::move(out), {x},
                     [xi, m, n](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         for (i64 j = 0; j < n; ++j)
                             for (i64 i = 0; i < m; ++i)
                                 gx[i * n + j] += g[static_cast<std::size_t>(j * m + i)];
                     },
                     "transpose");
}

Tensor concat(const std::vector<Tensor>& xs) {
    require(!xs.empty(), "concat: empty input list");
    i64 cols = xs.front().dim(1);
    i64 total = 0;
    for (const Tensor& t : xs) {
        require(t.ndim() == 2 && t.dim(1) == cols,
                "concat: inconsistent shape " + shape_str(t.shape()));
        total += t.dim(0);
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(total * cols));
    for (const Tensor& t : xs) out.insert(out.end(), t.data().begin(), t.data().end());
    std::vector<TensorImpl*> parents;
    std::vector<i64> counts;
    for (const Tensor& t : xs) {
        parents.push_back(t.impl());
        counts.push_back(t.numel());
    }
    return make_node({total, cols}, std::move(out), xs,
                     [parents, counts](TensorImpl& self, BackwardCtx& ctx) {
                         const auto& g = self.grad;
                         std::size_t off = 0;
                         for (std::size_t p = 0; p < parents.size(); ++p) {
                             double* gp = ctx.grad_buffer(parents[p]);
                             if (gp)
                                 for (i64 i = 0; i < counts[p]; ++i) gp[i] += g[off + static_cast<std::size_t>(i)];
                             off += static_cast<std::size_t>(counts[p]);
                         }
                     },
                     "concat");
}

Tensor slice_rows(const Tensor& x, i64 begin, i64 count) {
    require(x.ndim() == 2, "slice_rows: expected 2-D, got " + shape_str(x.shape()));
    i64 m = x.dim(0), n = x.dim(1);
    require(begin >= 0 && count >= 0 && begin + count <= m,
            "slice_rows: range [" + std::to_string(begin) + "," + std::to_string(begin + count) +
                ") outside " + std::to_string(m) + " rows");
    const auto& xd = x.data();
    std::vector<double> out(xd.begin() + static_cast<std::ptrdiff_t>(begin * n),
                            xd.begin() + static_cast<std::ptrdiff_t>((begin + count) * n));
    TensorImpl* xi = x.impl();
    return make_node({count, n}, std::move(out), {x},
                     [xi, begin, n](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         for (std::size_t i = 0; i < g.size(); ++i)
                             gx[static_cast<std::size_t>(begin * n) + i] += g[i];
                     },
                     "slice_rows");
}

std::vector<Tensor> split(const Tensor& x, const std::vector<i64>& row_counts) {
    i64 total = 0;
    for (i64 c : row_counts) total += c;
    require(x.ndim() == 2 && total == x.dim(0),
            "split: row counts sum to " + std::to_string(total) + " but input has " +
                std::to_string(x.ndim() == 2 ? x.dim(0) : -1) + " rows");
    std::vector<Tensor> out;
    i64 at = 0;
    for (i64 c : row_counts) {
        out.push_back(slice_rows(x, at, c));
        at += c;
    }
    return out;
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
    require(!rows.empty(), "stack_rows: empty input list");
    i64 h = rows.front().numel();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(h) * rows.size());
    std::vector<TensorImpl*> parents;
    for (const Tensor& r : rows) {
        require(r.ndim() == 1 && r.numel() == h,
                "stack_rows: inconsistent row shape " + shape_str(r.shape()));
        out.insert(out.end(), r.data().begin(), r.data().end());
        parents.push_back(r.impl());
    }
    return make_node({static_cast<i64>(rows.size()), h}, std::move(out), rows,
                     [parents, h](TensorImpl& self, BackwardCtx& ctx) {
                         const auto& g = self.grad;
                         for (std::size_t p = 0; p < parents.size(); ++p) {
                             double* gp = ctx.grad_buffer(parents[p]);
                             if (gp)
                                 for (i64 i = 0; i < h; ++i)
                                     gp[i] += g[p * static_cast<std::size_t>(h) + static_cast<std::size_t>(i)];
                         }
                     },
                     "stack_rows");
}

Tensor expand_batch(const Tensor& x, i64 batch) {
    require(x.ndim() == 2, "expand_batch: expected 2-D, got " + shape_str(x.shape()));
    require(batch >= 1, "expand_batch: batch must be >= 1");
    i64 n = x.dim(0), h = x.dim(1);
    const auto& xd = x.data();
    std::vector<double> out(static_cast<std::size_t>(batch * n * h));
    for (i64 b = 0; b < batch; ++b)
        std::copy(xd.begin(), xd.end(), out.begin() + static_cast<std::ptrdiff_t>(b * n * h));
    TensorImpl* xi = x.impl();
    return make_node({batch, n, h}, std::move(out), {x},
                     [xi, batch, n, h](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         i64 block = n * h;
                         for (i64 b = 0; b < batch; ++b)
                             for (i64 i = 0; i < block; ++i)
                                 gx[i] += g[static_cast<std::size_t>(b * block + i)];
                     },
                     "expand_batch");
}

Tensor split_heads(const Tensor& x, i64 heads) {
    require(x.ndim() == 3, "split_heads: expected 3-D, got " + shape_str(x.shape()));
    i64 B = x.dim(0), n = x.dim(1), h = x.dim(2);
    require(heads >= 1 && h % heads == 0,
            "split_heads: width " + std::to_string(h) + " not divisible by " + std::to_string(heads));
    i64 dh = h / heads;
    const auto& xd = x.data();
    std::vector<double> out(xd.size());
    for (i64 b = 0; b < B; ++b)
        for (i64 t = 0; t < heads; ++t)
            for (i64 i = 0; i < n; ++i) {
                const double* src = xd.data() + (b * n + i) * h + t * dh;
                double* dst = out.data() + (((b * heads + t) * n) + i) * dh;
                std::memcpy(dst, src, sizeof(double) * static_cast<std::size_t>(dh));
            }
    TensorImpl* xi = x.impl();
    return make_node({B * heads, n, dh}, std::move(out), {x},
                     [xi, B, n, h, heads, dh](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         for (i64 b = 0; b < B; ++b)
                             for (i64 t = 0; t < heads; ++t)
                                 for (i64 i = 0; i < n; ++i) {
                                     const double* src = g.data() + ((((b * heads + t) * n) + i) * dh);
                                     double* dst = gx + (b * n + i) * h + t * dh;
                                     for (i64 d = 0; d < dh; ++d) dst[d] += src[d];
                                 }
                     },
                     "split_heads");
}

Tensor merge_heads(const Tensor& x, i64 heads) {
    require(x.ndim() == 3, "merge_heads: expected 3-D, got " + shape_str(x.shape()));
    i64 Bh = x.dim(0), n = x.dim(1), dh = x.dim(2);
    require(heads >= 1 && Bh % heads == 0,
            "merge_heads: batch " + std::to_string(Bh) + " not divisible by " + std::to_string(heads));
    i64 B = Bh / heads, h = heads * dh;
    const auto& xd = x.data();
    std::vector<double> out(xd.size());
    for (i64 b = 0; b < B; ++b)
        for (i64 t = 0; t < heads; ++t)
            for (i64 i = 0; i < n; ++i) {
                const double* src = xd.data() + (((b * heads + t) * n) + i) * dh;
                double* dst = out.data() + (b * n + i) * h + t * dh;
                std::memcpy(dst, src, sizeof(double) * static_cast<std::size_t>(dh));
            }
    TensorImpl* xi = x.impl();
    return make_node({B, n, h}, std::move(out), {x},
                     [xi, B, n, h, heads, dh](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         for (i64 b = 0; b < B; ++b)
                             for (i64 t = 0; t < heads; ++t)
                                 for (i64 i = 0; i < n; ++i) {
                                     const double* src = g.data() + ((b * n + i) * h + t * dh);
                                     double* dst = gx + (((b * heads + t) * n) + i) * dh;
                                     for (i64 d = 0; d < dh; ++d) dst[d] += src[d];
                                 }
                     },
                     "merge_heads");
}

// --- arithmetic ---

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* name) {
    require(a.shape() == b.shape(), std::string(name) + ": shape mismatch " +
                                        shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    const auto& ad = a.data();
    const auto& bd = b.data();
    std::vector<double> out(ad.size());
    for (std::size_t i = 0; i < ad.size(); ++i) out[i] = ad[i] + bd[i];
    TensorImpl* ai = a.impl();
    TensorImpl* bi = b.impl();
    return make_node(a.shape(), std::move(out), {a, b},
                     [ai, bi](TensorImpl& self, BackwardCtx& ctx) {
                         double* ga = ctx.grad_buffer(ai);
                         double* gb = ctx.grad_buffer(bi);
                         const auto& g = self.grad;
                         for (std::size_t i = 0; i < g.size(); ++i) {
                             if (ga) ga[i] += g[i];
                             if (gb) gb[i] += g[i];
                         }
                     },
                     "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    const auto& ad = a.data();
    const auto& bd = b.data();
    std::vector<double> out(ad.size());
    for (std::size_t i = 0; i < ad.size(); ++i) out[i] = ad[i] - bd[i];
    TensorImpl* ai = a.impl();
    TensorImpl* bi = b.impl();
    return make_node(a.shape(), std::move(out), {a, b},
                     [ai, bi](TensorImpl& self, BackwardCtx& ctx) {
                         double* ga = ctx.grad_buffer(ai);
                         double* gb = ctx.grad_buffer(bi);
                         const auto& g = self.grad;
                         for (std::size_t i = 0; i < g.size(); ++i) {
                             if (ga) ga[i] += g[i];
                             if (gb) gb[i] -= g[i];
                         }
                     },
                     "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    const auto& ad = a.data();
    const auto& bd = b.data();
    std::vector<double> out(ad.size());
    for (std::size_t i = 0; i < ad.size(); ++i) out[i] = ad[i] * bd[i];
    TensorImpl* ai = a.impl();
    TensorImpl* bi = b.impl();
    return make_node(a.shape(), std::move(out), {a, b},
                     [ai, bi](TensorImpl& self, BackwardCtx& ctx) {
                         double* ga = ctx.grad_buffer(ai);
                         double* gb = ctx.grad_buffer(bi);
                         const auto& g = self.grad;
                         const auto& ad = ai->data;
                         const auto& bd = bi->data;
                         for (std::size_t i = 0; i < g.size(); ++i) {
                             if (ga) ga[i] += g[i] * bd[i];
                             if (gb) gb[i] += g[i] * ad[i];
                         }
                     },
                     "mul");
}

Tensor add_scalar(const Tensor& x, double s) {
    const auto& xd = x.data();
    std::vector<double> out(xd.size());
    for (std::size_t i = 0; i < xd.size(); ++i) out[i] = xd[i] + s;
    TensorImpl* xi = x.impl();
    return make_node(x.shape(), std::move(out), {x},
                     [xi](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
                     },
                     "add_scalar");
}

Tensor mul_scalar(const Tensor& x, double s) {
    const auto& xd = x.data();
    std::vector<double> out(xd.size());
    for (std::size_t i = 0; i < xd.size(); ++i) out[i] = xd[i] * s;
    TensorImpl* xi = x.impl();
    return make_node(x.shape(), std::move(out), {x},
                     [xi, s](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += s * self.grad[i];
                     },
                     "mul_scalar");
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
    i64 h = last_of(x.shape());
    require(v.ndim() == 1 && v.numel() == h,
            "add_rowvec: vector " + shape_str(v.shape()) + " does not match last dim of " +
                shape_str(x.shape()));
    i64 rows = rows_of(x.shape());
    const auto& xd = x.data();
    const auto& vd = v.data();
    std::vector<double> out(xd.size());
    for (i64 r = 0; r < rows; ++r)
        for (i64 j = 0; j < h; ++j)
            out[static_cast<std::size_t>(r * h + j)] = xd[static_cast<std::size_t>(r * h + j)] + vd[static_cast<std::size_t>(j)];
    TensorImpl* xi = x.impl();
    TensorImpl* vi = v.impl();
    return make_node(x.shape(), std::move(out), {x, v},
                     [xi, vi, rows, h](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         double* gv = ctx.grad_buffer(vi);
                         const auto& g = self.grad;
                         if (gx)
                             for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                         if (gv)
                             for (i64 r = 0; r < rows; ++r)
                                 for (i64 j = 0; j < h; ++j) gv[j] += g[static_cast<std::size_t>(r * h + j)];
                     },
                     "add_rowvec");
}

// --- activations ---

Tensor relu(const Tensor& x) {
    const auto& xd = x.data();
    std::vector<double> out(xd.size());
    for (std::size_t i = 0; i < xd.size(); ++i) out[i] = xd[i] > 0.0 ? xd[i] : 0.0;
    TensorImpl* xi = x.impl();
    return make_node(x.shape(), std::move(out), {x},
                     [xi](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         const auto& xd = xi->data;
                         for (std::size_t i = 0; i < g.size(); ++i)
                             if (xd[i] > 0.0) gx[i] += g[i];
                     },
                     "relu");
}

Tensor leaky_relu(const Tensor& x, double slope) {
    const auto& xd = x.data();
    std::vector<double> out(xd.size());
    for (std::size_t i = 0; i < xd.size(); ++i) out[i] = xd[i] > 0.0 ? xd[i] : slope * xd[i];
    TensorImpl* xi = x.impl();
    return make_node(x.shape(), std::move(out), {x},
                     [xi, slope](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         const auto& xd = xi->data;
                         for (std::size_t i = 0; i < g.size(); ++i)
                             gx[i] += (xd[i] > 0.0 ? 1.0 : slope) * g[i];
                     },
                     "leaky_relu");
}

Tensor sigmoid(const Tensor& x) {
    const auto& xd = x.data();
    std::vector<double> out(xd.size());
    for (std::size_t i = 0; i < xd.size(); ++i) {
        double v = xd[i];
        out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    TensorImpl* xi = x.impl();
    return make_node(x.shape(), std::move(out), {x},
                     [xi](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         const auto& y = self.data;
                         for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
                     },
                     "sigmoid");
}

Tensor tanh_op(const Tensor& x) {
    const auto& xd = x.data();
    std::vector<double> out(xd.size());
    for (std::size_t i = 0; i < xd.size(); ++i) out[i] = std::tanh(xd[i]);
    TensorImpl* xi = x.impl();
    return make_node(x.shape(), std::move(out), {x},
                     [xi](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         const auto& y = self.data;
                         for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
                     },
                     "tanh");
}

Tensor dropout(const Tensor& x, double p, Rng& rng) {
    if (p < 0.0 || p >= 1.0)
        throw ValidationError("dropout: rate must be in [0,1), got " + std::to_string(p));
    if (p == 0.0) return x;
    const auto& xd = x.data();
    double scale = 1.0 / (1.0 - p);
    auto mask = std::make_shared<std::vector<double>>(xd.size());
    std::vector<double> out(xd.size());
    for (std::size_t i = 0; i < xd.size(); ++i) {
        double keep = rng.uniform() >= p ? scale : 0.0;
        (*mask)[i] = keep;
        out[i] = xd[i] * keep;
    }
    TensorImpl* xi = x.impl();
    return make_node(x.shape(), std::move(out), {x},
                     [xi, mask](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (*mask)[i];
                     },
                     "dropout");
}

// --- linear algebra ---

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.ndim() == 2 && b.ndim() == 2 && a.dim(1) == b.dim(0),
            "matmul: incompatible shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    i64 m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> out(static_cast<std::size_t>(m * n));
    mm_nn(a.data().data(), b.data().data(), out.data(), m, k, n, false);
    TensorImpl* ai = a.impl();
    TensorImpl* bi = b.impl();
    return make_node({m, n}, std::move(out), {a, b},
                     [ai, bi, m, k, n](TensorImpl& self, BackwardCtx& ctx) {
                         double* ga = ctx.grad_buffer(ai);
                         double* gb = ctx.grad_buffer(bi);
                         const double* g = self.grad.data();
                         if (ga) mm_nt(g, bi->data.data(), ga, m, n, k, true);
                         if (gb) mm_tn(ai->data.data(), g, gb, k, m, n, true);
                     },
                     "matmul");
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor* bias) {
    require(x.ndim() == 2 && weight.ndim() == 2 && x.dim(1) == weight.dim(1),
            "linear: input " + shape_str(x.shape()) + " incompatible with weight " +
                shape_str(weight.shape()));
    i64 rows = x.dim(0), in = x.dim(1), out_dim = weight.dim(0);
    std::vector<double> out(static_cast<std::size_t>(rows * out_dim));
    mm_nt(x.data().data(), weight.data().data(), out.data(), rows, in, out_dim, false);
    std::vector<Tensor> parents{x, weight};
    TensorImpl* bi = nullptr;
    if (bias) {
        require(bias->ndim() == 1 && bias->numel() == out_dim,
                "linear: bias " + shape_str(bias->shape()) + " does not match out dim " +
                    std::to_string(out_dim));
        const auto& bd = bias->data();
        for (i64 r = 0; r < rows; ++r)
            for (i64 j = 0; j < out_dim; ++j) out[static_cast<std::size_t>(r * out_dim + j)] += bd[static_cast<std::size_t>(j)];
        parents.push_back(*bias);
        bi = bias->impl();
    }
    TensorImpl* xi = x.impl();
    TensorImpl* wi = weight.impl();
    return make_node({rows, out_dim}, std::move(out), std::move(parents),
                     [xi, wi, bi, rows, in, out_dim](TensorImpl& self, BackwardCtx& ctx) {
                         const double* g = self.grad.data();
                         double* gx = ctx.grad_buffer(xi);
                         double* gw = ctx.grad_buffer(wi);
                         if (gx) mm_nn(g, wi->data.data(), gx, rows, out_dim, in, true);
                         if (gw) mm_tn(g, xi->data.data(), gw, out_dim, rows, in, true);
                         if (bi) {
                             double* gb = ctx.grad_buffer(bi);
                             if (gb)
                                 for (i64 r = 0; r < rows; ++r)
                                     for (i64 j = 0; j < out_dim; ++j) gb[j] += g[r * out_dim + j];
                         }
                     },
                     "linear");
}

Tensor bmm(const Tensor& a, const Tensor& b) {
    require(a.ndim() == 3 && b.ndim() == 3 && a.dim(0) == b.dim(0) && a.dim(2) == b.dim(1),
            "bmm: incompatible shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    i64 B = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
    std::vector<double> out(static_cast<std::size_t>(B * m * n));
    for (i64 q = 0; q < B; ++q)
        mm_nn(a.data().data() + q * m * k, b.data().data() + q * k * n, out.data() + q * m * n, m,
              k, n, false);
    TensorImpl* ai = a.impl();
    TensorImpl* bi = b.impl();
    return make_node({B, m, n}, std::move(out), {a, b},
                     [ai, bi, B, m, k, n](TensorImpl& self, BackwardCtx& ctx) {
                         double* ga = ctx.grad_buffer(ai);
                         double* gb = ctx.grad_buffer(bi);
                         const double* g = self.grad.data();
                         for (i64 q = 0; q < B; ++q) {
                             if (ga) mm_nt(g + q * m * n, bi->data.data() + q * k * n, ga + q * m * k, m, n, k, true);
                             if (gb) mm_tn(ai->data.data() + q * m * k, g + q * m * n, gb + q * k * n, k, m, n, true);
                         }
                     },
                     "bmm");
}

Tensor bmm_nt(const Tensor& a, const Tensor& b) {
    require(a.ndim() == 3 && b.ndim() == 3 && a.dim(0) == b.dim(0) && a.dim(2) == b.dim(2),
            "bmm_nt: incompatible shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    i64 B = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(1);
    std::vector<double> out(static_cast<std::size_t>(B * m * n));
    for (i64 q = 0; q < B; ++q)
        mm_nt(a.data().data() + q * m * k, b.data().data() + q * n * k, out.data() + q * m * n, m,
              k, n, false);
    TensorImpl* ai = a.impl();
    TensorImpl* bi = b.impl();
    return make_node({B, m, n}, std::move(out), {a, b},
                     [ai, bi, B, m, k, n](TensorImpl& self, BackwardCtx& ctx) {
                         double* ga = ctx.grad_buffer(ai);
                         double* gb = ctx.grad_buffer(bi);
                         const double* g = self.grad.data();
                         for (i64 q = 0; q < B; ++q) {
                             if (ga) mm_nn(g + q * m * n, bi->data.data() + q * n * k, ga + q * m * k, m, n, k, true);
                             if (gb) mm_tn(g + q * m * n, ai->data.data() + q * m * k, gb + q * n * k, n, m, k, true);
                         }
                     },
                     "bmm_nt");
}

// --- row-wise / normalization ---

Tensor softmax(const Tensor& x, int axis) {
    int r = x.ndim();
    require(r >= 1, "softmax: scalar input");
    if (axis < 0) axis += r;
    require(axis >= 0 && axis < r, "softmax: axis out of range for " + shape_str(x.shape()));
    const Shape& s = x.shape();
    i64 n = s[static_cast<std::size_t>(axis)];
    i64 outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= s[static_cast<std::size_t>(i)];
    for (int i = axis + 1; i < r; ++i) inner *= s[static_cast<std::size_t>(i)];
    const auto& xd = x.data();
    std::vector<double> out(xd.size());
    for (i64 o = 0; o < outer; ++o)
        for (i64 in = 0; in < inner; ++in) {
            const double* src = xd.data() + o * n * inner + in;
            double* dst = out.data() + o * n * inner + in;
            double mx = src[0];
            for (i64 j = 1; j < n; ++j) mx = std::max(mx, src[j * inner]);
            double sum = 0.0;
            for (i64 j = 0; j < n; ++j) {
                double e = std::exp(src[j * inner] - mx);
                dst[j * inner] = e;
                sum += e;
            }
            double invs = 1.0 / sum;
            for (i64 j = 0; j < n; ++j) dst[j * inner] *= invs;
        }
    TensorImpl* xi = x.impl();
    return make_node(x.shape(), std::move(out), {x},
                     [xi, outer, n, inner](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         const auto& y = self.data;
                         for (i64 o = 0; o < outer; ++o)
                             for (i64 in = 0; in < inner; ++in) {
                                 i64 base = o * n * inner + in;
                                 double dot = 0.0;
                                 for (i64 j = 0; j < n; ++j)
                                     dot += g[static_cast<std::size_t>(base + j * inner)] * y[static_cast<std::size_t>(base + j * inner)];
                                 for (i64 j = 0; j < n; ++j) {
                                     std::size_t idx = static_cast<std::size_t>(base + j * inner);
                                     gx[idx] += (g[idx] - dot) * y[idx];
                                 }
                             }
                     },
                     "softmax");
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    i64 h = last_of(x.shape());
    require(h >= 1 && gain.ndim() == 1 && gain.numel() == h && bias.ndim() == 1 && bias.numel() == h,
            "layer_norm: gain/bias must be length-" + std::to_string(h) + " vectors");
    i64 rows = rows_of(x.shape());
    const auto& xd = x.data();
    const auto& gd = gain.data();
    const auto& bd = bias.data();
    std::vector<double> out(xd.size());
    for (i64 r = 0; r < rows; ++r) {
        const double* src = xd.data() + r * h;
        double* dst = out.data() + r * h;
        double mean = 0.0;
        for (i64 j = 0; j < h; ++j) mean += src[j];
        mean /= static_cast<double>(h);
        double var = 0.0;
        for (i64 j = 0; j < h; ++j) {
            double d = src[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(h);
        double inv = 1.0 / std::sqrt(var + eps);
        for (i64 j = 0; j < h; ++j) dst[j] = (src[j] - mean) * inv * gd[static_cast<std::size_t>(j)] + bd[static_cast<std::size_t>(j)];
    }
    TensorImpl* xi = x.impl();
    TensorImpl* gi = gain.impl();
    TensorImpl* bi = bias.impl();
    return make_node(x.shape(), std::move(out), {x, gain, bias},
                     [xi, gi, bi, rows, h, eps](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         double* gg = ctx.grad_buffer(gi);
                         double* gb = ctx.grad_buffer(bi);
                         if (!gx && !gg && !gb) return;
                         const auto& g = self.grad;
                         const auto& xd = xi->data;
                         const auto& gd = gi->data;
                         std::vector<double> xhat(static_cast<std::size_t>(h));
                         for (i64 r = 0; r < rows; ++r) {
                             const double* src = xd.data() + r * h;
                             const double* gr = g.data() + r * h;
                             double mean = 0.0;
                             for (i64 j = 0; j < h; ++j) mean += src[j];
                             mean /= static_cast<double>(h);
                             double var = 0.0;
                             for (i64 j = 0; j < h; ++j) {
                                 double d = src[j] - mean;
                                 var += d * d;
                             }
                             var /= static_cast<double>(h);
                             double inv = 1.0 / std::sqrt(var + eps);
                             for (i64 j = 0; j < h; ++j) xhat[static_cast<std::size_t>(j)] = (src[j] - mean) * inv;
                             if (gg || gb) {
                                 for (i64 j = 0; j < h; ++j) {
                                     if (gg) gg[j] += gr[j] * xhat[static_cast<std::size_t>(j)];
                                     if (gb) gb[j] += gr[j];
                                 }
                             }
                             if (gx) {
                                 double m1 = 0.0, m2 = 0.0;
                                 for (i64 j = 0; j < h; ++j) {
                                     double dh = gr[j] * gd[static_cast<std::size_t>(j)];
                                     m1 += dh;
                                     m2 += dh * xhat[static_cast<std::size_t>(j)];
                                 }
                                 m1 /= static_cast<double>(h);
                                 m2 /= static_cast<double>(h);
                                 for (i64 j = 0; j < h; ++j) {
                                     double dh = gr[j] * gd[static_cast<std::size_t>(j)];
                                     gx[r * h + j] += inv * (dh - m1 - xhat[static_cast<std::size_t>(j)] * m2);
                                 }
                             }
                         }
                     },
                     "layer_norm");
}

// --- reductions ---

Tensor reduce_sum(const Tensor& x) {
    const auto& xd = x.data();
    double s = 0.0;
    for (double v : xd) s += v;
    TensorImpl* xi = x.impl();
    return make_node(Shape{}, {s}, {x},
                     [xi](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         double g = self.grad[0];
                         for (i64 i = 0; i < xi->numel(); ++i) gx[i] += g;
                     },
                     "reduce_sum");
}

Tensor reduce_mean(const Tensor& x) {
    i64 n = x.numel();
    require(n >= 1, "reduce_mean: empty tensor");
    const auto& xd = x.data();
    double s = 0.0;
    for (double v : xd) s += v;
    s /= static_cast<double>(n);
    TensorImpl* xi = x.impl();
    return make_node(Shape{}, {s}, {x},
                     [xi, n](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         double g = self.grad[0] / static_cast<double>(n);
                         for (i64 i = 0; i < n; ++i) gx[i] += g;
                     },
                     "reduce_mean");
}

// --- losses ---

Tensor bce_loss(const Tensor& pred, const std::vector<double>& target) {
    i64 n = pred.numel();
    if (n != static_cast<i64>(target.size()))
        throw ValidationError("bce_loss: " + std::to_string(n) + " predictions vs " +
                              std::to_string(target.size()) + " targets");
    require(n >= 1, "bce_loss: empty input");
    constexpr double kLo = 1e-7, kHi = 1.0 - 1e-7;
    const auto& pd = pred.data();
    double total = 0.0;
    for (i64 i = 0; i < n; ++i) {
        double y = target[static_cast<std::size_t>(i)];
        if (y < 0.0 || y > 1.0)
            throw ValidationError("bce_loss: target " + std::to_string(y) + " outside [0,1]");
        double p = std::clamp(pd[static_cast<std::size_t>(i)], kLo, kHi);
        total += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    }
    total /= static_cast<double>(n);
    TensorImpl* pi = pred.impl();
    return make_node(Shape{}, {total}, {pred},
                     [pi, target, n](TensorImpl& self, BackwardCtx& ctx) {
                         double* gp = ctx.grad_buffer(pi);
                         if (!gp) return;
                         constexpr double lo = 1e-7, hi = 1.0 - 1e-7;
                         double g = self.grad[0] / static_cast<double>(n);
                         const auto& pd = pi->data;
                         for (i64 i = 0; i < n; ++i) {
                             double p = pd[static_cast<std::size_t>(i)];
                             if (p < lo || p > hi) continue;  // clamp region is flat
                             double y = target[static_cast<std::size_t>(i)];
                             gp[i] += g * (p - y) / (p * (1.0 - p));
                         }
                     },
                     "bce_loss");
}

Tensor cross_entropy_logits(const Tensor& logits, const std::vector<int>& labels) {
    require(logits.ndim() == 2, "cross_entropy_logits: expected 2-D logits, got " +
                                    shape_str(logits.shape()));
    i64 N = logits.dim(0), K = logits.dim(1);
    if (N != static_cast<i64>(labels.size()))
        throw ValidationError("cross_entropy_logits: " + std::to_string(N) + " rows vs " +
                              std::to_string(labels.size()) + " labels");
    const auto& zd = logits.data();
    double total = 0.0;
    for (i64 i = 0; i < N; ++i) {
        int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= K)
            throw ValidationError("cross_entropy_logits: label " + std::to_string(y) +
                                  " outside [0," + std::to_string(K) + ")");
        const double* row = zd.data() + i * K;
        double mx = row[0];
        for (i64 j = 1; j < K; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (i64 j = 0; j < K; ++j) sum += std::exp(row[j] - mx);
        total += mx + std::log(sum) - row[y];
    }
    total /= static_cast<double>(N);
    TensorImpl* zi = logits.impl();
    return make_node(Shape{}, {total}, {logits},
                     [zi, labels, N, K](TensorImpl& self, BackwardCtx& ctx) {
                         double* gz = ctx.grad_buffer(zi);
                         if (!gz) return;
                         double g = self.grad[0] / static_cast<double>(N);
                         const auto& zd = zi->data;
                         for (i64 i = 0; i < N; ++i) {
                             const double* row = zd.data() + i * K;
                             double mx = row[0];
                             for (i64 j = 1; j < K; ++j) mx = std::max(mx, row[j]);
                             double sum = 0.0;
                             for (i64 j = 0; j < K; ++j) sum += std::exp(row[j] - mx);
                             double inv = 1.0 / sum;
                             int y = labels[static_cast<std::size_t>(i)];
                             for (i64 j = 0; j < K; ++j) {
                                 double p = std::exp(row[j] - mx) * inv;
                                 gz[i * K + j] += g * (p - (j == y ? 1.0 : 0.0));
                             }
                         }
                     },
                     "cross_entropy_logits");
}

// --- image ops ---

namespace {

struct ConvDims {
    i64 N, Ci, H, W, Co, kh, kw, Ho, Wo;
};

ConvDims conv_dims(const Tensor& x, const Tensor& w, i64 stride, i64 padding) {
    require(x.ndim() == 4 && w.ndim() == 4, "conv2d: expected 4-D input and weight, got " +
                                                shape_str(x.shape()) + " and " + shape_str(w.shape()));
    ConvDims d;
    d.N = x.dim(0);
    d.Ci = x.dim(1);
    d.H = x.dim(2);
    d.W = x.dim(3);
    d.Co = w.dim(0);
    d.kh = w.dim(2);
    d.kw = w.dim(3);
    require(w.dim(1) == d.Ci, "conv2d: weight expects " + std::to_string(w.dim(1)) +
                                  " input channels, input has " + std::to_string(d.Ci));
    require(stride >= 1 && padding >= 0, "conv2d: invalid stride/padding");
    d.Ho = (d.H + 2 * padding - d.kh) / stride + 1;
    d.Wo = (d.W + 2 * padding - d.kw) / stride + 1;
    require(d.Ho >= 1 && d.Wo >= 1, "conv2d: kernel larger than padded input");
    return d;
}

// col[(ci*kh+u)*kw+v, (n*Ho+oh)*Wo+ow] = x[n,ci, oh*s-p+u, ow*s-p+v] (0 outside)
void im2col(const double* x, const ConvDims& d, i64 stride, i64 padding, double* col) {
    i64 patch = d.Ci * d.kh * d.kw;
    i64 cols = d.N * d.Ho * d.Wo;
    std::memset(col, 0, sizeof(double) * static_cast<std::size_t>(patch * cols));
    for (i64 n = 0; n < d.N; ++n)
        for (i64 ci = 0; ci < d.Ci; ++ci) {
            const double* plane = x + (n * d.Ci + ci) * d.H * d.W;
            for (i64 u = 0; u < d.kh; ++u)
                for (i64 v = 0; v < d.kw; ++v) {
                    double* crow = col + ((ci * d.kh + u) * d.kw + v) * cols;
                    for (i64 oh = 0; oh < d.Ho; ++oh) {
                        i64 ih = oh * stride - padding + u;
                        if (ih < 0 || ih >= d.H) continue;
                        for (i64 ow = 0; ow < d.Wo; ++ow) {
                            i64 iw = ow * stride - padding + v;
                            if (iw < 0 || iw >= d.W) continue;
                            crow[(n * d.Ho + oh) * d.Wo + ow] = plane[ih * d.W + iw];
                        }
                    }
                }
        }
}

void col2im_add(const double* col, const ConvDims& d, i64 stride, i64 padding, double* gx) {
    i64 cols = d.N * d.Ho * d.Wo;
    for (i64 n = 0; n < d.N; ++n)
        for (i64 ci = 0; ci < d.Ci; ++ci) {
            double* plane = gx + (n * d.Ci + ci) * d.H * d.W;
            for (i64 u = 0; u < d.kh; ++u)
                for (i64 v = 0; v < d.kw; ++v) {
                    const double* crow = col + ((ci * d.kh + u) * d.kw + v) * cols;
                    for (i64 oh = 0; oh < d.Ho; ++oh) {
                        i64 ih = oh * stride - padding + u;
                        if (ih < 0 || ih >= d.H) continue;
                        for (i64 ow = 0; ow < d.Wo; ++ow) {
                            i64 iw = ow * stride - padding + v;
                            if (iw < 0 || iw >= d.W) continue;
                            plane[ih * d.W + iw] += crow[(n * d.Ho + oh) * d.Wo + ow];
                        }
                    }
                }
        }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor* bias, i64 stride, i64 padding) {
    ConvDims d = conv_dims(x, weight, stride, padding);
    i64 patch = d.Ci * d.kh * d.kw;
    i64 cols = d.N * d.Ho * d.Wo;
    std::vector<double> col(static_cast<std::size_t>(patch * cols));
    im2col(x.data().data(), d, stride, padding, col.data());
    // out_mat[co, (n*Ho+oh)*Wo+ow]
    std::vector<double> out_mat(static_cast<std::size_t>(d.Co * cols));
    mm_nn(weight.data().data(), col.data(), out_mat.data(), d.Co, patch, cols, false);
    std::vector<double> out(static_cast<std::size_t>(d.N * d.Co * d.Ho * d.Wo));
    const double* bptr = nullptr;
    if (bias) {
        require(bias->ndim() == 1 && bias->numel() == d.Co,
                "conv2d: bias " + shape_str(bias->shape()) + " does not match " +
                    std::to_string(d.Co) + " output channels");
        bptr = bias->data().data();
    }
    for (i64 n = 0; n < d.N; ++n)
        for (i64 co = 0; co < d.Co; ++co) {
            double bv = bptr ? bptr[co] : 0.0;
            const double* src = out_mat.data() + co * cols + n * d.Ho * d.Wo;
            double* dst = out.data() + (n * d.Co + co) * d.Ho * d.Wo;
            for (i64 i = 0; i < d.Ho * d.Wo; ++i) dst[i] = src[i] + bv;
        }
    std::vector<Tensor> parents{x, weight};
    TensorImpl* bi = nullptr;
    if (bias) {
        parents.push_back(*bias);
        bi = bias->impl();
    }
    TensorImpl* xi = x.impl();
    TensorImpl* wi = weight.impl();
    return make_node({d.N, d.Co, d.Ho, d.Wo}, std::move(out), std::move(parents),
                     [xi, wi, bi, d, stride, padding](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         double* gw = ctx.grad_buffer(wi);
                         double* gb = bi ? ctx.grad_buffer(bi) : nullptr;
                         if (!gx && !gw && !gb) return;
                         i64 patch = d.Ci * d.kh * d.kw;
                         i64 cols = d.N * d.Ho * d.Wo;
                         // regroup grad to [Co × cols]
                         std::vector<double> gmat(static_cast<std::size_t>(d.Co * cols));
                         const auto& g = self.grad;
                         for (i64 n = 0; n < d.N; ++n)
                             for (i64 co = 0; co < d.Co; ++co) {
                                 const double* src = g.data() + (n * d.Co + co) * d.Ho * d.Wo;
                                 double* dst = gmat.data() + co * cols + n * d.Ho * d.Wo;
                                 std::memcpy(dst, src, sizeof(double) * static_cast<std::size_t>(d.Ho * d.Wo));
                             }
                         if (gb)
                             for (i64 co = 0; co < d.Co; ++co) {
                                 const double* row = gmat.data() + co * cols;
                                 double s = 0.0;
                                 for (i64 i = 0; i < cols; ++i) s += row[i];
                                 gb[co] += s;
                             }
                         if (gw) {
                             std::vector<double> col(static_cast<std::size_t>(patch * cols));
                             im2col(xi->data.data(), d, stride, padding, col.data());
                             mm_nt(gmat.data(), col.data(), gw, d.Co, cols, patch, true);
                         }
                         if (gx) {
                             std::vector<double> gcol(static_cast<std::size_t>(patch * cols));
                             mm_tn(wi->data.data(), gmat.data(), gcol.data(), patch, d.Co, cols, false);
                             col2im_add(gcol.data(), d, stride, padding, gx);
                         }
                     },
                     "conv2d");
}

Tensor maxpool2d(const Tensor& x, i64 k, i64 stride) {
    require(x.ndim() == 4, "maxpool2d: expected 4-D input, got " + shape_str(x.shape()));
    require(k >= 1 && stride >= 1, "maxpool2d: invalid window/stride");
    i64 N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    i64 Ho = (H - k) / stride + 1;
    i64 Wo = (W - k) / stride + 1;
    require(Ho >= 1 && Wo >= 1, "maxpool2d: window larger than input");
    const auto& xd = x.data();
    std::vector<double> out(static_cast<std::size_t>(N * C * Ho * Wo));
    auto argmax = std::make_shared<std::vector<i64>>(out.size());
    for (i64 n = 0; n < N; ++n)
        for (i64 c = 0; c < C; ++c) {
            const double* plane = xd.data() + (n * C + c) * H * W;
            i64 pbase = (n * C + c) * H * W;
            for (i64 oh = 0; oh < Ho; ++oh)
                for (i64 ow = 0; ow < Wo; ++ow) {
                    i64 best = -1;
                    double bv = 0.0;
                    for (i64 u = 0; u < k; ++u)
                        for (i64 v = 0; v < k; ++v) {
                            i64 ih = oh * stride + u, iw = ow * stride + v;
                            double val = plane[ih * W + iw];
                            if (best < 0 || val > bv) {
                                best = ih * W + iw;
                                bv = val;
                            }
                        }
                    std::size_t oidx = static_cast<std::size_t>(((n * C + c) * Ho + oh) * Wo + ow);
                    out[oidx] = bv;
                    (*argmax)[oidx] = pbase + best;
                }
        }
    TensorImpl* xi = x.impl();
    return make_node({N, C, Ho, Wo}, std::move(out), {x},
                     [xi, argmax](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         for (std::size_t i = 0; i < g.size(); ++i) gx[(*argmax)[i]] += g[i];
                     },
                     "maxpool2d");
}

Tensor global_avg_pool(const Tensor& x) {
    require(x.ndim() == 4, "global_avg_pool: expected 4-D input, got " + shape_str(x.shape()));
    i64 N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    i64 area = H * W;
    const auto& xd = x.data();
    std::vector<double> out(static_cast<std::size_t>(N * C));
    for (i64 n = 0; n < N; ++n)
        for (i64 c = 0; c < C; ++c) {
            const double* plane = xd.data() + (n * C + c) * area;
            double s = 0.0;
            for (i64 i = 0; i < area; ++i) s += plane[i];
            out[static_cast<std::size_t>(n * C + c)] = s / static_cast<double>(area);
        }
    TensorImpl* xi = x.impl();
    return make_node({N, C}, std::move(out), {x},
                     [xi, N, C, area](TensorImpl& self, BackwardCtx& ctx) {
                         double* gx = ctx.grad_buffer(xi);
                         if (!gx) return;
                         const auto& g = self.grad;
                         for (i64 nc = 0; nc < N * C; ++nc) {
                             double gv = g[static_cast<std::size_t>(nc)] / static_cast<double>(area);
                             double* plane = gx + nc * area;
                             for (i64 i = 0; i < area; ++i) plane[i] += gv;
                         }
                     },
                     "global_avg_pool");
}

std::vector<int> argmax_rows(const Tensor& x) {
    require(x.ndim() == 2, "argmax_rows: expected 2-D input, got " + shape_str(x.shape()));
    i64 N = x.dim(0), K = x.dim(1);
    const auto& xd = x.data();
    std::vector<int> out(static_cast<std::size_t>(N));
    for (i64 i = 0; i < N; ++i) {
        const double* row = xd.data() + i * K;
        int best = 0;
        for (i64 j = 1; j < K; ++j)
            if (row[j] > row[best]) best = static_cast<int>(j);
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

}  // namespace sne
