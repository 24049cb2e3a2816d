#ifndef KANMIXER_MODEL_HPP_
#define KANMIXER_MODEL_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kanmixer/layers.hpp"

namespace kanmixer {

enum class PriorKind { none, dft, ma, no_multiscale };

std::string to_string(PriorKind p);
PriorKind prior_from_string(const std::string& s);

struct ComponentKinds {
    LayerKind embed = LayerKind::kan;
    LayerKind down = LayerKind::kan;
    LayerKind ffn = LayerKind::kan;
    LayerKind head = LayerKind::kan;

    bool all_mlp() const {
        return embed == LayerKind::mlp && down == LayerKind::mlp &&
               ffn == LayerKind::mlp && head == LayerKind::mlp;
    }
    bool any_kan() const { return !all_mlp() || false; }
};

// Narrow widths suit KAN, wider suit the MLP substitutions.
inline int default_d_model(const ComponentKinds& kinds) { return kinds.all_mlp() ? 64 : 16; }

struct MixerConfig {
    int lookback = 96;
    int horizon = 96;
    int d_model = 16;
    bool d_model_explicit = false;  // set when the user pinned the width
    int n_blocks = 3;
    int n_scales = 3;
    int pool_k = 2;
    BasisKind basis = BasisKind::bspline;
    ComponentKinds kinds;
    PriorKind prior = PriorKind::none;
    bool instance_norm = true;

    // no_multiscale collapses the pyramid to the raw series.
    int effective_scales() const { return prior == PriorKind::no_multiscale ? 1 : n_scales; }

    void validate() const;
};

constexpr double kInstanceNormEps = 1e-5;
constexpr int kMovingAverageKernel = 25;

struct NormStats {
    std::vector<double> mean;
    std::vector<double> stdev;
};

// Per-row (per window) centering and scaling; inverted after forecasting.
std::pair<Tensor, NormStats> instance_norm(const Tensor& x);
Tensor instance_denorm(const Tensor& y, const NormStats& stats);

// Trend/residual (ma) or low/high frequency (dft) decomposition of each row.
// The two components reconstruct the input: a + b == x.
std::pair<Tensor, Tensor> apply_prior(const Tensor& x, PriorKind prior);

// Scale 0 is the input; scale i is scale i-1 average-pooled by k.
std::vector<NodeId> build_pyramid(Tape& tape, NodeId x, int k, int m);
std::vector<Tensor> build_pyramid(const Tensor& x, int k, int m);

// One fine-to-coarse mixing block over per-scale latents.
struct MixingBlock {
    std::vector<Layer> down;  // scales 1..M-1, reading the finer neighbor
    std::vector<Layer> ffn;   // all scales

    std::vector<NodeId> forward(Tape& tape, const std::vector<NodeId>& z);
};

struct Trunk {
    std::vector<Layer> embed;  // per scale: len_i -> d_model
    std::vector<MixingBlock> blocks;
    std::vector<Layer> heads;  // per scale: d_model -> horizon

    // Returns the summed forecast; per-scale head outputs land in *scale_heads
    // when given.
    NodeId forward(Tape& tape, NodeId x, int pool_k, int scales,
                   std::vector<NodeId>* scale_heads);
};

// The full architecture: optional reversible per-window normalization, an
// optional structural prior splitting the window into two components (each
// with its own trunk), and per-trunk multi-scale mixing with summed heads.
class MixerModel {
public:
    MixerModel(const MixerConfig& config, std::uint64_t seed);

    const MixerConfig& config() const { return cfg_; }
    const BasisSpec& basis() const { return spec_; }
    int scales() const { return scales_; }

    // Training-path forward over channel-flattened rows [rows x lookback].
    // Output node is [rows x horizon] in the same (globally normalized) space
    // as the input.
    NodeId forward_rows(Tape& tape, const Tensor& rows,
                        std::vector<std::vector<NodeId>>* trunk_scale_heads = nullptr,
                        NodeId* before_denorm = nullptr);

    // Convenience inference over [batch x d x lookback].
    Tensor predict(const Tensor& x);

    struct Detail {
        Tensor output;                                // batch x d x horizon
        Tensor before_denorm;                         // rows x horizon
        std::vector<std::vector<Tensor>> scale_heads; // [trunk][scale], rows x horizon
    };
    Detail predict_detail(const Tensor& x);

    std::vector<ParamRef> parameters();
    std::vector<Trunk>& trunks() { return trunks_; }
    const std::vector<Trunk>& trunks() const { return trunks_; }

private:
    MixerConfig cfg_;
    BasisSpec spec_;
    int scales_ = 1;
    std::vector<Trunk> trunks_;  // 1, or 2 for decomposition priors
};

// Channel-independent layout helpers: [batch x d x L] <-> [(batch*d) x L].
Tensor flatten_channels(const Tensor& x);
Tensor unflatten_channels(const Tensor& rows, std::size_t batch, std::size_t d);

}  // namespace kanmixer

#endif  // KANMIXER_MODEL_HPP_
