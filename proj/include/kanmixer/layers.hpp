#ifndef KANMIXER_LAYERS_HPP_
#define KANMIXER_LAYERS_HPP_

#include <string>
#include <variant>
#include <vector>

#include "kanmixer/basis.hpp"
#include "kanmixer/rng.hpp"
#include "kanmixer/tape.hpp"
#include "kanmixer/tensor.hpp"

namespace kanmixer {

enum class LayerKind { kan, mlp };

std::string to_string(LayerKind k);
LayerKind layer_kind_from_string(const std::string& s);

// Named handle onto a trainable tensor, used by the optimizer, the
// checkpoint writer and the cost counters. Enumeration order is fixed.
struct ParamRef {
    std::string name;
    Tensor* tensor;
};

// KAN layer: every edge carries base_weight * silu(x) plus a learned
// combination of the basis functions of `spec`.
struct KanLayer {
    int in_dim = 0;
    int out_dim = 0;
    BasisSpec spec;
    Tensor base_weight;    // out x in
    Tensor spline_weight;  // out x in x F

    NodeId forward(Tape& tape, NodeId x);
    std::size_t parameter_count() const {
        return static_cast<std::size_t>(out_dim) * in_dim * (1 + spec.num_functions());
    }
    void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

enum class Activation { identity, silu };

// Affine layer with optional SiLU, the MLP substitution unit of the ablations.
struct MlpLayer {
    int in_dim = 0;
    int out_dim = 0;
    Activation act = Activation::silu;
    Tensor weight;  // out x in
    Tensor bias;    // out

    NodeId forward(Tape& tape, NodeId x);
    std::size_t parameter_count() const {
        return static_cast<std::size_t>(out_dim) * (in_dim + 1);
    }
    void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

using Layer = std::variant<KanLayer, MlpLayer>;

// Weights ~ U(-1/sqrt(in), 1/sqrt(in)); spline weights ~ N(0, 0.1/sqrt(F)).
// Bit-identical for a given rng state.
KanLayer init_kan_layer(int in_dim, int out_dim, const BasisSpec& spec, Rng& rng);
MlpLayer init_mlp_layer(int in_dim, int out_dim, Activation act, Rng& rng);
Layer init_layer(LayerKind kind, int in_dim, int out_dim, const BasisSpec& spec,
                 Activation mlp_act, Rng& rng);

NodeId layer_forward(Layer& layer, Tape& tape, NodeId x);
std::size_t layer_parameter_count(const Layer& layer);
void layer_collect(Layer& layer, const std::string& prefix, std::vector<ParamRef>& out);
int layer_in_dim(const Layer& layer);
int layer_out_dim(const Layer& layer);

}  // namespace kanmixer

#endif  // KANMIXER_LAYERS_HPP_
