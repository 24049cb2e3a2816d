#ifndef KANMIXER_TAPE_HPP_
#define KANMIXER_TAPE_HPP_

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "kanmixer/basis.hpp"
#include "kanmixer/tensor.hpp"

namespace kanmixer {

using NodeId = int;

// Define-by-run reverse-mode tape. Each op records its inputs and enough
// attributes to replay the backward rule; backward() walks the nodes in
// reverse creation order (creation order is already topological) and
// accumulates gradients into every registered parameter tensor.
//
// A tape and everything registered on it belong to one thread.
class Tape {
public:
    // Leaf holding a copy of t; no gradient is written back.
    NodeId constant(const Tensor& t);

    // Leaf bound to a parameter. backward() adds dLoss/dp into p.grad
    // (allocating it on first use). p must outlive the tape.
    NodeId param(Tensor& p);

    // y[m x n] = a[m x k] * b[k x n]
    NodeId matmul(NodeId a, NodeId b);
    // y[m x n] = a[m x k] * b[n x k]^T  (the layer-weight orientation)
    NodeId matmul_bt(NodeId a, NodeId b);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    // a[m x n] + bias[n] broadcast over rows
    NodeId add_rows(NodeId a, NodeId bias);
    NodeId scale(NodeId a, double c);
    NodeId silu(NodeId a);

    // Non-overlapping mean pooling over the last axis, stride = k, trailing
    // remainder dropped.
    NodeId avg_pool1d(NodeId a, int k);

    NodeId reshape(NodeId a, std::vector<std::size_t> shape);
    NodeId sum(NodeId a);
    NodeId mean(NodeId a);

    // x[m x n] -> y[m x (n*F)] where y[r, i*F + j] = phi_j(x[r, i]).
    // spec must outlive the tape.
    NodeId basis_expand(NodeId a, const BasisSpec& spec);

    // y[r, c] = a[r, c] * row_scale[r] + row_shift[r], both constants.
    NodeId rows_affine(NodeId a, std::vector<double> row_scale, std::vector<double> row_shift);

    // Reverse pass from a scalar loss. Gradients accumulate additively into
    // parameter tensors; calling twice doubles them.
    void backward(NodeId loss);

    const Tensor& value(NodeId id) const { return nodes_[id].val; }
    std::size_t node_count() const { return nodes_.size(); }

private:
    enum class Op {
        leaf, matmul, matmul_bt, add, sub, mul, add_rows, scale, silu,
        avg_pool, reshape, sum, mean, basis_expand, rows_affine
    };

    struct Node {
        Op op = Op::leaf;
        std::array<NodeId, 2> in{-1, -1};
        Tensor val;
        std::vector<double> grad;
        double c = 0.0;                      // scale factor / pool kernel
        int k = 0;
        const BasisSpec* spec = nullptr;
        std::vector<double> aux;             // rows_affine scale ++ shift
        Tensor* pbank = nullptr;             // parameter write-back target
    };

    NodeId push(Node n);
    const Tensor& at(NodeId id) const;

    std::vector<Node> nodes_;
};

// Max over coordinates of |analytic - central difference| / max(1, |analytic|)
// for a scalar-valued computation f built on a fresh tape. f must register x
// on the tape it is given (via Tape::param) so the analytic gradient lands in
// x.grad; the numeric side re-runs f with per-coordinate bumps of size h.
double grad_check(const std::function<NodeId(Tape&)>& f, Tensor& x, double h);

}  // namespace kanmixer

#endif  // KANMIXER_TAPE_HPP_
