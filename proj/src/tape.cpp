#include "kanmixer/tape.hpp"

#include <algorithm>
#include <cmath>

namespace kanmixer {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_2d(const Tensor& t, const char* who) {
    if (t.shape.size() != 2)
        throw shape_error(std::string(who) + " expects a 2-d tensor, got " + shape_string(t.shape));
}

}  // namespace

const Tensor& Tape::at(NodeId id) const { return nodes_[id].val; }

NodeId Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::constant(const Tensor& t) {
    Node n;
    n.val = t;
    n.val.grad.clear();
    return push(std::move(n));
}

NodeId Tape::param(Tensor& p) {
    Node n;
    n.val = p;
    n.val.grad.clear();
    n.pbank = &p;
    return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    const Tensor& ta = at(a);
    const Tensor& tb = at(b);
    require_2d(ta, "matmul");
    require_2d(tb, "matmul");
    if (ta.shape[1] != tb.shape[0])
        throw shape_error("matmul inner dimensions differ: " + shape_string(ta.shape) +
                          " vs " + shape_string(tb.shape));
    const std::size_t m = ta.shape[0], k = ta.shape[1], p = tb.shape[1];
    Node n;
    n.op = Op::matmul;
    n.in = {a, b};
    n.val = Tensor({m, p});
    const double* A = ta.data.data();
    const double* B = tb.data.data();
    double* Y = n.val.data.data();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            const double av = A[i * k + l];
            if (av == 0.0) continue;
            const double* brow = B + l * p;
            double* yrow = Y + i * p;
            for (std::size_t j = 0; j < p; ++j) yrow[j] += av * brow[j];
        }
    return push(std::move(n));
}

NodeId Tape::matmul_bt(NodeId a, NodeId b) {
    const Tensor& ta = at(a);
    const Tensor& tb = at(b);
    require_2d(ta, "matmul_bt");
    require_2d(tb, "matmul_bt");
    if (ta.shape[1] != tb.shape[1])
        throw shape_error("matmul_bt inner dimensions differ: " + shape_string(ta.shape) +
                          " vs " + shape_string(tb.shape) + " (transposed)");
    const std::size_t m = ta.shape[0], k = ta.shape[1], p = tb.shape[0];
    Node n;
    n.op = Op::matmul_bt;
    n.in = {a, b};
    n.val = Tensor({m, p});
    const double* A = ta.data.data();
    const double* B = tb.data.data();
    double* Y = n.val.data.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = A + i * k;
        double* yrow = Y + i * p;
        for (std::size_t j = 0; j < p; ++j) {
            const double* brow = B + j * k;
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) acc += arow[l] * brow[l];
            yrow[j] = acc;
        }
    }
    return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor& ta = at(a);
    const Tensor& tb = at(b);
    if (!ta.same_shape(tb))
        throw shape_error("add shape mismatch: " + shape_string(ta.shape) + " vs " +
                          shape_string(tb.shape));
    Node n;
    n.op = Op::add;
    n.in = {a, b};
    n.val = Tensor(ta.shape);
    for (std::size_t i = 0; i < ta.size(); ++i) n.val.data[i] = ta.data[i] + tb.data[i];
    return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    const Tensor& ta = at(a);
    const Tensor& tb = at(b);
    if (!ta.same_shape(tb))
        throw shape_error("sub shape mismatch: " + shape_string(ta.shape) + " vs " +
                          shape_string(tb.shape));
    Node n;
    n.op = Op::sub;
    n.in = {a, b};
    n.val = Tensor(ta.shape);
    for (std::size_t i = 0; i < ta.size(); ++i) n.val.data[i] = ta.data[i] - tb.data[i];
    return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    const Tensor& ta = at(a);
    const Tensor& tb = at(b);
    if (!ta.same_shape(tb))
        throw shape_error("mul shape mismatch: " + shape_string(ta.shape) + " vs " +
                          shape_string(tb.shape));
    Node n;
    n.op = Op::mul;
    n.in = {a, b};
    n.val = Tensor(ta.shape);
    for (std::size_t i = 0; i < ta.size(); ++i) n.val.data[i] = ta.data[i] * tb.data[i];
    return push(std::move(n));
}

NodeId Tape::add_rows(NodeId a, NodeId bias) {
    const Tensor& ta = at(a);
    const Tensor& tb = at(bias);
    require_2d(ta, "add_rows");
    if (tb.shape.size() != 1 || tb.shape[0] != ta.shape[1])
        throw shape_error("add_rows bias " + shape_string(tb.shape) +
                          " does not match columns of " + shape_string(ta.shape));
    Node n;
    n.op = Op::add_rows;
    n.in = {a, bias};
    n.val = Tensor(ta.shape);
    const std::size_t m = ta.shape[0], c = ta.shape[1];
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t j = 0; j < c; ++j)
            n.val.data[r * c + j] = ta.data[r * c + j] + tb.data[j];
    return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double c) {
    const Tensor& ta = at(a);
    Node n;
    n.op = Op::scale;
    n.in = {a, -1};
    n.c = c;
    n.val = Tensor(ta.shape);
    for (std::size_t i = 0; i < ta.size(); ++i) n.val.data[i] = c * ta.data[i];
    return push(std::move(n));
}

NodeId Tape::silu(NodeId a) {
    const Tensor& ta = at(a);
    Node n;
    n.op = Op::silu;
    n.in = {a, -1};
    n.val = Tensor(ta.shape);
    for (std::size_t i = 0; i < ta.size(); ++i) {
        const double x = ta.data[i];
        n.val.data[i] = x * sigmoid(x);
    }
    return push(std::move(n));
}

NodeId Tape::avg_pool1d(NodeId a, int k) {
    const Tensor& ta = at(a);
    if (k <= 0) throw config_error("avg_pool1d kernel must be >= 1, got " + std::to_string(k));
    if (ta.shape.empty()) throw shape_error("avg_pool1d on empty tensor");
    const std::size_t L = ta.shape.back();
    if (L < static_cast<std::size_t>(k))
        throw config_error("avg_pool1d kernel " + std::to_string(k) +
                           " exceeds axis length " + std::to_string(L));
    const std::size_t out_len = L / k;
    std::vector<std::size_t> oshape = ta.shape;
    oshape.back() = out_len;
    Node n;
    n.op = Op::avg_pool;
    n.in = {a, -1};
    n.k = k;
    n.val = Tensor(oshape);
    const std::size_t rows = ta.size() / L;
    const double inv_k = 1.0 / k;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* src = ta.data.data() + r * L;
        double* dst = n.val.data.data() + r * out_len;
        for (std::size_t o = 0; o < out_len; ++o) {
            double acc = 0.0;
            for (int j = 0; j < k; ++j) acc += src[o * k + j];
            dst[o] = acc * inv_k;
        }
    }
    return push(std::move(n));
}

NodeId Tape::reshape(NodeId a, std::vector<std::size_t> shape) {
    const Tensor& ta = at(a);
    if (Tensor::count(shape) != ta.size())
        throw shape_error("reshape to " + shape_string(shape) + " changes element count of " +
                          shape_string(ta.shape));
    Node n;
    n.op = Op::reshape;
    n.in = {a, -1};
    n.val = Tensor(std::move(shape), ta.data);
    return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
    const Tensor& ta = at(a);
    double acc = 0.0;
    for (double v : ta.data) acc += v;
    Node n;
    n.op = Op::sum;
    n.in = {a, -1};
    n.val = Tensor::scalar(acc);
    return push(std::move(n));
}

NodeId Tape::mean(NodeId a) {
    const Tensor& ta = at(a);
    if (ta.size() == 0) throw shape_error("mean of empty tensor");
    double acc = 0.0;
    for (double v : ta.data) acc += v;
    Node n;
    n.op = Op::mean;
    n.in = {a, -1};
    n.val = Tensor::scalar(acc / ta.size());
    return push(std::move(n));
}

NodeId Tape::basis_expand(NodeId a, const BasisSpec& spec) {
    const Tensor& ta = at(a);
    require_2d(ta, "basis_expand");
    const std::size_t m = ta.shape[0], w = ta.shape[1];
    const std::size_t F = static_cast<std::size_t>(spec.num_functions());
    Node n;
    n.op = Op::basis_expand;
    n.in = {a, -1};
    n.spec = &spec;
    n.val = Tensor({m, w * F});
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t i = 0; i < w; ++i)
            spec.eval(ta.data[r * w + i], n.val.data.data() + (r * w + i) * F);
    return push(std::move(n));
}

NodeId Tape::rows_affine(NodeId a, std::vector<double> row_scale, std::vector<double> row_shift) {
    const Tensor& ta = at(a);
    require_2d(ta, "rows_affine");
    const std::size_t m = ta.shape[0], c = ta.shape[1];
    if (row_scale.size() != m || row_shift.size() != m)
        throw shape_error("rows_affine needs one (scale, shift) per row");
    Node n;
    n.op = Op::rows_affine;
    n.in = {a, -1};
    n.val = Tensor(ta.shape);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t j = 0; j < c; ++j)
            n.val.data[r * c + j] = ta.data[r * c + j] * row_scale[r] + row_shift[r];
    n.aux = std::move(row_scale);
    n.aux.insert(n.aux.end(), row_shift.begin(), row_shift.end());
    return push(std::move(n));
}

void Tape::backward(NodeId loss) {
    if (nodes_.empty()) throw contract_error("backward on an empty tape");
    if (loss < 0 || loss >= static_cast<NodeId>(nodes_.size()))
        throw contract_error("backward on an unknown node");
    if (nodes_[loss].val.size() != 1)
        throw contract_error("backward requires a scalar loss, got shape " +
                             shape_string(nodes_[loss].val.shape));

    for (Node& n : nodes_) n.grad.assign(n.val.size(), 0.0);
    nodes_[loss].grad[0] = 1.0;

    for (NodeId id = loss; id >= 0; --id) {
        Node& n = nodes_[id];
        const std::vector<double>& g = n.grad;
        bool any = false;
        for (double v : g)
            if (v != 0.0) { any = true; break; }
        if (!any && n.op != Op::leaf) continue;

        switch (n.op) {
            case Op::leaf:
                break;
            case Op::matmul: {
                Node& na = nodes_[n.in[0]];
                Node& nb = nodes_[n.in[1]];
                const std::size_t m = na.val.shape[0], k = na.val.shape[1], p = nb.val.shape[1];
                // dA = G * B^T ; dB = A^T * G
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t l = 0; l < k; ++l) {
                        const double* grow = g.data() + i * p;
                        const double* brow = nb.val.data.data() + l * p;
                        double acc = 0.0;
                        for (std::size_t j = 0; j < p; ++j) acc += grow[j] * brow[j];
                        na.grad[i * k + l] += acc;
                    }
                for (std::size_t l = 0; l < k; ++l)
                    for (std::size_t i = 0; i < m; ++i) {
                        const double av = na.val.data[i * k + l];
                        if (av == 0.0) continue;
                        const double* grow = g.data() + i * p;
                        double* brow = nb.grad.data() + l * p;
                        for (std::size_t j = 0; j < p; ++j) brow[j] += av * grow[j];
                    }
                break;
            }
            case Op::matmul_bt: {
                Node& na = nodes_[n.in[0]];
                Node& nb = nodes_[n.in[1]];
                const std::size_t m = na.val.shape[0], k = na.val.shape[1], p = nb.val.shape[0];
                // y = A * B^T : dA = G * B ; dB = G^T * A
                for (std::size_t i = 0; i < m; ++i) {
                    const double* grow = g.data() + i * p;
                    double* arow = na.grad.data() + i * k;
                    for (std::size_t j = 0; j < p; ++j) {
                        const double gv = grow[j];
                        if (gv == 0.0) continue;
                        const double* brow = nb.val.data.data() + j * k;
                        for (std::size_t l = 0; l < k; ++l) arow[l] += gv * brow[l];
                    }
                }
                for (std::size_t i = 0; i < m; ++i) {
                    const double* grow = g.data() + i * p;
                    const double* arow = na.val.data.data() + i * k;
                    for (std::size_t j = 0; j < p; ++j) {
                        const double gv = grow[j];
                        if (gv == 0.0) continue;
                        double* brow = nb.grad.data() + j * k;
                        for (std::size_t l = 0; l < k; ++l) brow[l] += gv * arow[l];
                    }
                }
                break;
            }
            case Op::add: {
                Node& na = nodes_[n.in[0]];
                Node& nb = nodes_[n.in[1]];
                for (std::size_t i = 0; i < g.size(); ++i) {
                    na.grad[i] += g[i];
                    nb.grad[i] += g[i];
                }
                break;
            }
            case Op::sub: {
                Node& na = nodes_[n.in[0]];
                Node& nb = nodes_[n.in[1]];
                for (std::size_t i = 0; i < g.size(); ++i) {
                    na.grad[i] += g[i];
                    nb.grad[i] -= g[i];
                }
                break;
            }
            case Op::mul: {
                Node& na = nodes_[n.in[0]];
                Node& nb = nodes_[n.in[1]];
                for (std::size_t i = 0; i < g.size(); ++i) {
                    na.grad[i] += g[i] * nb.val.data[i];
                    nb.grad[i] += g[i] * na.val.data[i];
                }
                break;
            }
            case Op::add_rows: {
                Node& na = nodes_[n.in[0]];
                Node& nb = nodes_[n.in[1]];
                const std::size_t m = na.val.shape[0], c = na.val.shape[1];
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t j = 0; j < c; ++j) {
                        na.grad[r * c + j] += g[r * c + j];
                        nb.grad[j] += g[r * c + j];
                    }
                break;
            }
            case Op::scale: {
                Node& na = nodes_[n.in[0]];
                for (std::size_t i = 0; i < g.size(); ++i) na.grad[i] += n.c * g[i];
                break;
            }
            case Op::silu: {
                Node& na = nodes_[n.in[0]];
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double x = na.val.data[i];
                    const double s = sigmoid(x);
                    na.grad[i] += g[i] * s * (1.0 + x * (1.0 - s));
                }
                break;
            }
            case Op::avg_pool: {
                Node& na = nodes_[n.in[0]];
                const std::size_t L = na.val.shape.back();
                const std::size_t out_len = n.val.shape.back();
                const std::size_t rows = na.val.size() / L;
                const double inv_k = 1.0 / n.k;
                for (std::size_t r = 0; r < rows; ++r) {
                    double* src = na.grad.data() + r * L;
                    const double* gg = g.data() + r * out_len;
                    for (std::size_t o = 0; o < out_len; ++o) {
                        const double share = gg[o] * inv_k;
                        for (int j = 0; j < n.k; ++j) src[o * n.k + j] += share;
                    }
                }
                break;
            }
            case Op::reshape: {
                Node& na = nodes_[n.in[0]];
                for (std::size_t i = 0; i < g.size(); ++i) na.grad[i] += g[i];
                break;
            }
            case Op::sum: {
                Node& na = nodes_[n.in[0]];
                for (std::size_t i = 0; i < na.grad.size(); ++i) na.grad[i] += g[0];
                break;
            }
            case Op::mean: {
                Node& na = nodes_[n.in[0]];
                const double share = g[0] / na.val.size();
                for (std::size_t i = 0; i < na.grad.size(); ++i) na.grad[i] += share;
                break;
            }
            case Op::basis_expand: {
                Node& na = nodes_[n.in[0]];
                const std::size_t m = na.val.shape[0], w = na.val.shape[1];
                const std::size_t F = static_cast<std::size_t>(n.spec->num_functions());
                std::vector<double> d(F);
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t i = 0; i < w; ++i) {
                        const double* gg = g.data() + (r * w + i) * F;
                        bool hit = false;
                        for (std::size_t j = 0; j < F; ++j)
                            if (gg[j] != 0.0) { hit = true; break; }
                        if (!hit) continue;
                        n.spec->deriv(na.val.data[r * w + i], d.data());
                        double acc = 0.0;
                        for (std::size_t j = 0; j < F; ++j) acc += gg[j] * d[j];
                        na.grad[r * w + i] += acc;
                    }
                break;
            }
            case Op::rows_affine: {
                Node& na = nodes_[n.in[0]];
                const std::size_t m = na.val.shape[0], c = na.val.shape[1];
                const double* row_scale = n.aux.data();
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t j = 0; j < c; ++j)
                        na.grad[r * c + j] += g[r * c + j] * row_scale[r];
                break;
            }
        }
    }

    for (Node& n : nodes_) {
        if (n.pbank == nullptr) continue;
        n.pbank->ensure_grad();
        for (std::size_t i = 0; i < n.grad.size(); ++i) n.pbank->grad[i] += n.grad[i];
    }
}

double grad_check(const std::function<NodeId(Tape&)>& f, Tensor& x, double h) {
    if (h <= 0.0) throw contract_error("grad_check requires h > 0");
    x.ensure_grad();
    x.zero_grad();
    {
        Tape tape;
        const NodeId loss = f(tape);
        tape.backward(loss);
    }
    const std::vector<double> analytic = x.grad;

    double max_rel = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double keep = x.data[i];
        x.data[i] = keep + h;
        double fp;
        {
            Tape tape;
            fp = tape.value(f(tape)).data[0];
        }
        x.data[i] = keep - h;
        double fm;
        {
            Tape tape;
            fm = tape.value(f(tape)).data[0];
        }
        x.data[i] = keep;
        const double numeric = (fp - fm) / (2.0 * h);
        const double rel = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
        max_rel = std::max(max_rel, rel);
    }
    x.zero_grad();
    return max_rel;
}

}  // namespace kanmixer
