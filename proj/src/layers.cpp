#include "kanmixer/layers.hpp"

#include <cmath>

namespace kanmixer {

std::string to_string(LayerKind k) { return k == LayerKind::kan ? "kan" : "mlp"; }

LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "kan") return LayerKind::kan;
    if (s == "mlp") return LayerKind::mlp;
    throw config_error("unknown layer kind '" + s + "'");
}

NodeId KanLayer::forward(Tape& tape, NodeId x) {
    const Tensor& tx = tape.value(x);
    if (tx.shape.size() != 2 || tx.shape[1] != static_cast<std::size_t>(in_dim))
        throw shape_error("kan layer expects [batch x " + std::to_string(in_dim) + "], got " +
                          shape_string(tx.shape));
    const std::size_t F = static_cast<std::size_t>(spec.num_functions());
    const NodeId base = tape.matmul_bt(tape.silu(x), tape.param(base_weight));
    const NodeId phi = tape.basis_expand(x, spec);
    const NodeId ws = tape.reshape(tape.param(spline_weight),
                                   {static_cast<std::size_t>(out_dim),
                                    static_cast<std::size_t>(in_dim) * F});
    return tape.add(base, tape.matmul_bt(phi, ws));
}

void KanLayer::collect(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".base", &base_weight});
    out.push_back({prefix + ".spline", &spline_weight});
}

NodeId MlpLayer::forward(Tape& tape, NodeId x) {
    const Tensor& tx = tape.value(x);
    if (tx.shape.size() != 2 || tx.shape[1] != static_cast<std::size_t>(in_dim))
        throw shape_error("mlp layer expects [batch x " + std::to_string(in_dim) + "], got " +
                          shape_string(tx.shape));
    NodeId y = tape.add_rows(tape.matmul_bt(x, tape.param(weight)), tape.param(bias));
    if (act == Activation::silu) y = tape.silu(y);
    return y;
}

void MlpLayer::collect(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".weight", &weight});
    out.push_back({prefix + ".bias", &bias});
}

KanLayer init_kan_layer(int in_dim, int out_dim, const BasisSpec& spec, Rng& rng) {
    if (in_dim < 1 || out_dim < 1) throw config_error("layer dims must be positive");
    spec.validate();
    KanLayer layer;
    layer.in_dim = in_dim;
    layer.out_dim = out_dim;
    layer.spec = spec;
    const std::size_t o = static_cast<std::size_t>(out_dim);
    const std::size_t i = static_cast<std::size_t>(in_dim);
    const std::size_t F = static_cast<std::size_t>(spec.num_functions());
    const double base_scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    const double spline_std = 0.1 / std::sqrt(static_cast<double>(F));
    layer.base_weight = Tensor({o, i});
    for (double& w : layer.base_weight.data) w = rng.uniform(-base_scale, base_scale);
    layer.spline_weight = Tensor({o, i, F});
    for (double& w : layer.spline_weight.data) w = spline_std * rng.normal();
    return layer;
}

MlpLayer init_mlp_layer(int in_dim, int out_dim, Activation act, Rng& rng) {
    if (in_dim < 1 || out_dim < 1) throw config_error("layer dims must be positive");
    MlpLayer layer;
    layer.in_dim = in_dim;
    layer.out_dim = out_dim;
    layer.act = act;
    const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    layer.weight = Tensor({static_cast<std::size_t>(out_dim), static_cast<std::size_t>(in_dim)});
    for (double& w : layer.weight.data) w = rng.uniform(-scale, scale);
    layer.bias = Tensor({static_cast<std::size_t>(out_dim)});
    return layer;
}

Layer init_layer(LayerKind kind, int in_dim, int out_dim, const BasisSpec& spec,
                 Activation mlp_act, Rng& rng) {
    if (kind == LayerKind::kan) return init_kan_layer(in_dim, out_dim, spec, rng);
    return init_mlp_layer(in_dim, out_dim, mlp_act, rng);
}

NodeId layer_forward(Layer& layer, Tape& tape, NodeId x) {
    return std::visit([&](auto& l) { return l.forward(tape, x); }, layer);
}

std::size_t layer_parameter_count(const Layer& layer) {
    return std::visit([](const auto& l) { return l.parameter_count(); }, layer);
}

void layer_collect(Layer& layer, const std::string& prefix, std::vector<ParamRef>& out) {
    std::visit([&](auto& l) { l.collect(prefix, out); }, layer);
}

int layer_in_dim(const Layer& layer) {
    return std::visit([](const auto& l) { return l.in_dim; }, layer);
}

int layer_out_dim(const Layer& layer) {
    return std::visit([](const auto& l) { return l.out_dim; }, layer);
}

}  // namespace kanmixer
