#include "kanmixer/model.hpp"

#include <algorithm>
#include <cmath>

namespace kanmixer {

std::string to_string(PriorKind p) {
    switch (p) {
        case PriorKind::none: return "none";
        case PriorKind::dft: return "dft";
        case PriorKind::ma: return "ma";
        case PriorKind::no_multiscale: return "no_ms";
    }
    return "none";
}

PriorKind prior_from_string(const std::string& s) {
    if (s == "none") return PriorKind::none;
    if (s == "dft") return PriorKind::dft;
    if (s == "ma") return PriorKind::ma;
    if (s == "no_ms" || s == "no_multiscale") return PriorKind::no_multiscale;
    throw config_error("unknown prior '" + s + "'");
}

void MixerConfig::validate() const {
    if (lookback < 2) throw config_error("lookback must be >= 2");
    if (horizon < 1) throw config_error("horizon must be >= 1");
    if (d_model < 1) throw config_error("d_model must be >= 1");
    if (n_blocks < 1) throw config_error("n_blocks must be >= 1");
    if (n_scales < 1) throw config_error("n_scales must be >= 1");
    if (pool_k < 1) throw config_error("pool_k must be >= 1");
    int len = lookback;
    for (int i = 1; i < effective_scales(); ++i) {
        if (len < pool_k)
            throw config_error("scale " + std::to_string(i) + " would pool a series of length " +
                               std::to_string(len) + " with kernel " + std::to_string(pool_k));
        len /= pool_k;
    }
    if (len < 4)
        throw config_error("coarsest scale keeps only " + std::to_string(len) +
                           " points; need at least 4");
}

std::pair<Tensor, NormStats> instance_norm(const Tensor& x) {
    if (x.shape.size() != 2 || x.shape[1] < 2)
        throw shape_error("instance_norm expects [rows x L>=2], got " + shape_string(x.shape));
    const std::size_t rows = x.shape[0], L = x.shape[1];
    Tensor out(x.shape);
    NormStats stats;
    stats.mean.resize(rows);
    stats.stdev.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* src = x.data.data() + r * L;
        double mean = 0.0;
        for (std::size_t t = 0; t < L; ++t) mean += src[t];
        mean /= L;
        double var = 0.0;
        for (std::size_t t = 0; t < L; ++t) {
            const double d = src[t] - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / L);
        stats.mean[r] = mean;
        stats.stdev[r] = sd;
        const double inv = 1.0 / (sd + kInstanceNormEps);
        double* dst = out.data.data() + r * L;
        for (std::size_t t = 0; t < L; ++t) dst[t] = (src[t] - mean) * inv;
    }
    return {std::move(out), std::move(stats)};
}

Tensor instance_denorm(const Tensor& y, const NormStats& stats) {
    if (y.shape.size() != 2 || y.shape[0] != stats.mean.size())
        throw shape_error("instance_denorm stats do not match " + shape_string(y.shape));
    const std::size_t rows = y.shape[0], P = y.shape[1];
    Tensor out(y.shape);
    for (std::size_t r = 0; r < rows; ++r) {
        const double s = stats.stdev[r] + kInstanceNormEps;
        const double m = stats.mean[r];
        for (std::size_t t = 0; t < P; ++t) out.data[r * P + t] = y.data[r * P + t] * s + m;
    }
    return out;
}

namespace {

std::pair<Tensor, Tensor> moving_average_split(const Tensor& x) {
    const std::size_t rows = x.shape[0], L = x.shape[1];
    if (L < static_cast<std::size_t>(kMovingAverageKernel))
        throw config_error("moving-average prior needs lookback >= " +
                           std::to_string(kMovingAverageKernel) + ", got " + std::to_string(L));
    Tensor trend(x.shape), residual(x.shape);
    const int radius = kMovingAverageKernel / 2;
    const double inv = 1.0 / kMovingAverageKernel;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* src = x.data.data() + r * L;
        for (std::size_t t = 0; t < L; ++t) {
            double acc = 0.0;
            for (int j = -radius; j <= radius; ++j) {
                const long idx = std::clamp<long>(static_cast<long>(t) + j, 0,
                                                  static_cast<long>(L) - 1);
                acc += src[idx];  // edge replication
            }
            trend.data[r * L + t] = acc * inv;
            residual.data[r * L + t] = src[t] - trend.data[r * L + t];
        }
    }
    return {std::move(trend), std::move(residual)};
}

std::pair<Tensor, Tensor> dft_split(const Tensor& x) {
    const std::size_t rows = x.shape[0], L = x.shape[1];
    const std::size_t cutoff = L / 8;
    Tensor low(x.shape), high(x.shape);
    const double two_pi = 6.283185307179586476925286766559;
    std::vector<double> re(L), im(L);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* src = x.data.data() + r * L;
        for (std::size_t k = 0; k < L; ++k) {
            double sr = 0.0, si = 0.0;
            for (std::size_t t = 0; t < L; ++t) {
                const double a = two_pi * k * t / L;
                sr += src[t] * std::cos(a);
                si -= src[t] * std::sin(a);
            }
            re[k] = sr;
            im[k] = si;
        }
        // Conjugate-symmetric bins share one frequency; a bin is "low" when
        // min(k, L-k) < cutoff.
        for (std::size_t t = 0; t < L; ++t) {
            double lo_acc = 0.0, hi_acc = 0.0;
            for (std::size_t k = 0; k < L; ++k) {
                const double a = two_pi * k * t / L;
                const double term = re[k] * std::cos(a) - im[k] * std::sin(a);
                const std::size_t freq = std::min(k, L - k);
                if (freq < cutoff)
                    lo_acc += term;
                else
                    hi_acc += term;
            }
            low.data[r * L + t] = lo_acc / L;
            high.data[r * L + t] = hi_acc / L;
        }
    }
    return {std::move(low), std::move(high)};
}

}  // namespace

std::pair<Tensor, Tensor> apply_prior(const Tensor& x, PriorKind prior) {
    if (x.shape.size() != 2) throw shape_error("apply_prior expects [rows x L]");
    switch (prior) {
        case PriorKind::ma: return moving_average_split(x);
        case PriorKind::dft: return dft_split(x);
        default: throw config_error("apply_prior requires prior ma or dft");
    }
}

std::vector<NodeId> build_pyramid(Tape& tape, NodeId x, int k, int m) {
    if (m < 1) throw config_error("pyramid needs at least one scale");
    std::vector<NodeId> scales{x};
    for (int i = 1; i < m; ++i) scales.push_back(tape.avg_pool1d(scales.back(), k));
    return scales;
}

std::vector<Tensor> build_pyramid(const Tensor& x, int k, int m) {
    Tape tape;
    const std::vector<NodeId> ids = build_pyramid(tape, tape.constant(x), k, m);
    std::vector<Tensor> out;
    out.reserve(ids.size());
    for (NodeId id : ids) out.push_back(tape.value(id));
    return out;
}

std::vector<NodeId> MixingBlock::forward(Tape& tape, const std::vector<NodeId>& z) {
    if (z.size() != ffn.size())
        throw shape_error("mixing block built for " + std::to_string(ffn.size()) +
                          " scales, got " + std::to_string(z.size()));
    const std::size_t m = z.size();
    // Scale 0 has no finer neighbor; every other scale absorbs the finer
    // representation of this block's input.
    std::vector<NodeId> h(m);
    h[0] = z[0];
    for (std::size_t i = 1; i < m; ++i)
        h[i] = tape.add(z[i], layer_forward(down[i - 1], tape, z[i - 1]));
    std::vector<NodeId> out(m);
    for (std::size_t i = 0; i < m; ++i)
        out[i] = tape.add(h[i], layer_forward(ffn[i], tape, h[i]));
    return out;
}

NodeId Trunk::forward(Tape& tape, NodeId x, int pool_k, int scales,
                      std::vector<NodeId>* scale_heads) {
    const std::vector<NodeId> pyramid = build_pyramid(tape, x, pool_k, scales);
    std::vector<NodeId> z(scales);
    for (int i = 0; i < scales; ++i) z[i] = layer_forward(embed[i], tape, pyramid[i]);
    for (MixingBlock& block : blocks) z = block.forward(tape, z);
    NodeId total = -1;
    for (int i = 0; i < scales; ++i) {
        const NodeId y = layer_forward(heads[i], tape, z[i]);
        if (scale_heads) scale_heads->push_back(y);
        total = (i == 0) ? y : tape.add(total, y);
    }
    return total;
}

MixerModel::MixerModel(const MixerConfig& config, std::uint64_t seed) : cfg_(config) {
    cfg_.validate();
    scales_ = cfg_.effective_scales();
    spec_ = BasisSpec::make(cfg_.basis);

    std::vector<int> lens(scales_);
    lens[0] = cfg_.lookback;
    for (int i = 1; i < scales_; ++i) lens[i] = lens[i - 1] / cfg_.pool_k;

    const int n_trunks = (cfg_.prior == PriorKind::ma || cfg_.prior == PriorKind::dft) ? 2 : 1;
    Rng rng(derive_seed(seed, 0));
    for (int t = 0; t < n_trunks; ++t) {
        Trunk trunk;
        for (int i = 0; i < scales_; ++i)
            trunk.embed.push_back(init_layer(cfg_.kinds.embed, lens[i], cfg_.d_model, spec_,
                                             Activation::silu, rng));
        for (int b = 0; b < cfg_.n_blocks; ++b) {
            MixingBlock block;
            for (int i = 1; i < scales_; ++i)
                block.down.push_back(init_layer(cfg_.kinds.down, cfg_.d_model, cfg_.d_model,
                                                spec_, Activation::silu, rng));
            for (int i = 0; i < scales_; ++i)
                block.ffn.push_back(init_layer(cfg_.kinds.ffn, cfg_.d_model, cfg_.d_model,
                                               spec_, Activation::silu, rng));
            trunk.blocks.push_back(std::move(block));
        }
        for (int i = 0; i < scales_; ++i)
            trunk.heads.push_back(init_layer(cfg_.kinds.head, cfg_.d_model, cfg_.horizon, spec_,
                                             Activation::identity, rng));
        trunks_.push_back(std::move(trunk));
    }
}

NodeId MixerModel::forward_rows(Tape& tape, const Tensor& rows,
                                std::vector<std::vector<NodeId>>* trunk_scale_heads,
                                NodeId* before_denorm) {
    if (rows.shape.size() != 2 || rows.shape[1] != static_cast<std::size_t>(cfg_.lookback))
        throw shape_error("forward expects lookback " + std::to_string(cfg_.lookback) +
                          ", got input " + shape_string(rows.shape));

    Tensor xin = rows;
    NormStats stats;
    if (cfg_.instance_norm) {
        auto normed = instance_norm(rows);
        xin = std::move(normed.first);
        stats = std::move(normed.second);
    }

    std::vector<Tensor> components;
    if (cfg_.prior == PriorKind::ma || cfg_.prior == PriorKind::dft) {
        auto parts = apply_prior(xin, cfg_.prior);
        components.push_back(std::move(parts.first));
        components.push_back(std::move(parts.second));
    } else {
        components.push_back(std::move(xin));
    }

    NodeId total = -1;
    for (std::size_t t = 0; t < trunks_.size(); ++t) {
        std::vector<NodeId> heads;
        const NodeId y = trunks_[t].forward(tape, tape.constant(components[t]), cfg_.pool_k,
                                            scales_, trunk_scale_heads ? &heads : nullptr);
        if (trunk_scale_heads) trunk_scale_heads->push_back(std::move(heads));
        total = (t == 0) ? y : tape.add(total, y);
    }
    if (before_denorm) *before_denorm = total;

    if (cfg_.instance_norm) {
        std::vector<double> scale(stats.stdev.size());
        for (std::size_t r = 0; r < scale.size(); ++r) scale[r] = stats.stdev[r] + kInstanceNormEps;
        total = tape.rows_affine(total, std::move(scale), stats.mean);
    }
    return total;
}

Tensor MixerModel::predict(const Tensor& x) {
    if (x.shape.size() != 3)
        throw shape_error("predict expects [batch x d x L], got " + shape_string(x.shape));
    Tape tape;
    const NodeId out = forward_rows(tape, flatten_channels(x));
    return unflatten_channels(tape.value(out), x.shape[0], x.shape[1]);
}

MixerModel::Detail MixerModel::predict_detail(const Tensor& x) {
    if (x.shape.size() != 3)
        throw shape_error("predict expects [batch x d x L], got " + shape_string(x.shape));
    Tape tape;
    std::vector<std::vector<NodeId>> heads;
    NodeId pre = -1;
    const NodeId out = forward_rows(tape, flatten_channels(x), &heads, &pre);
    Detail detail;
    detail.output = unflatten_channels(tape.value(out), x.shape[0], x.shape[1]);
    detail.before_denorm = tape.value(pre);
    detail.scale_heads.resize(heads.size());
    for (std::size_t t = 0; t < heads.size(); ++t)
        for (NodeId id : heads[t]) detail.scale_heads[t].push_back(tape.value(id));
    return detail;
}

std::vector<ParamRef> MixerModel::parameters() {
    std::vector<ParamRef> out;
    for (std::size_t t = 0; t < trunks_.size(); ++t) {
        const std::string tp = "trunk" + std::to_string(t);
        Trunk& trunk = trunks_[t];
        for (std::size_t i = 0; i < trunk.embed.size(); ++i)
            layer_collect(trunk.embed[i], tp + ".embed" + std::to_string(i), out);
        for (std::size_t b = 0; b < trunk.blocks.size(); ++b) {
            const std::string bp = tp + ".block" + std::to_string(b);
            for (std::size_t i = 0; i < trunk.blocks[b].down.size(); ++i)
                layer_collect(trunk.blocks[b].down[i], bp + ".down" + std::to_string(i + 1), out);
            for (std::size_t i = 0; i < trunk.blocks[b].ffn.size(); ++i)
                layer_collect(trunk.blocks[b].ffn[i], bp + ".ffn" + std::to_string(i), out);
        }
        for (std::size_t i = 0; i < trunk.heads.size(); ++i)
            layer_collect(trunk.heads[i], tp + ".head" + std::to_string(i), out);
    }
    return out;
}

Tensor flatten_channels(const Tensor& x) {
    if (x.shape.size() != 3) throw shape_error("expected [batch x d x L], got " + shape_string(x.shape));
    Tensor out = x;
    out.shape = {x.shape[0] * x.shape[1], x.shape[2]};
    return out;
}

Tensor unflatten_channels(const Tensor& rows, std::size_t batch, std::size_t d) {
    if (rows.shape.size() != 2 || rows.shape[0] != batch * d)
        throw shape_error("cannot unflatten " + shape_string(rows.shape) + " into batch " +
                          std::to_string(batch) + " x " + std::to_string(d));
    Tensor out = rows;
    out.shape = {batch, d, rows.shape[1]};
    return out;
}

}  // namespace kanmixer
