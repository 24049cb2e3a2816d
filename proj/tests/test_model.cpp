#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "kanmixer/model.hpp"
#include "kanmixer/rng.hpp"

using namespace kanmixer;

namespace {

MixerConfig tiny_config() {
    MixerConfig cfg;
    cfg.lookback = 16;
    cfg.horizon = 4;
    cfg.d_model = 4;
    cfg.n_blocks = 1;
    cfg.n_scales = 2;
    cfg.pool_k = 2;
    return cfg;
}

void zero_params(MixerModel& model) {
    for (const ParamRef& p : model.parameters())
        for (double& v : p.tensor->data) v = 0.0;
}

int count_mlp_layers(const MixerModel& model) {
    int n = 0;
    auto scan = [&](const std::vector<Layer>& layers) {
        for (const Layer& l : layers)
            if (std::holds_alternative<MlpLayer>(l)) ++n;
    };
    for (const Trunk& t : model.trunks()) {
        scan(t.embed);
        for (const MixingBlock& b : t.blocks) {
            scan(b.down);
            scan(b.ffn);
        }
        scan(t.heads);
    }
    return n;
}

}  // namespace

TEST_CASE("pyramid lengths and nested means") {
    const Tensor x({1, 8}, {1, 2, 3, 4, 5, 6, 7, 8});
    const std::vector<Tensor> pyr = build_pyramid(x, 2, 3);
    REQUIRE(pyr.size() == 3);
    CHECK(pyr[0].shape.back() == 8);
    CHECK(pyr[1].data == std::vector<double>{1.5, 3.5, 5.5, 7.5});
    CHECK(pyr[2].data == std::vector<double>{2.5, 6.5});

    CHECK(build_pyramid(x, 2, 1).size() == 1);
    CHECK(build_pyramid(x, 2, 1)[0].data == x.data);

    const Tensor c({1, 8}, std::vector<double>(8, 3.25));
    for (const Tensor& s : build_pyramid(c, 2, 3))
        for (double v : s.data) CHECK(v == 3.25);
}

TEST_CASE("instance norm centers, inverts, and survives constant windows") {
    const Tensor x({1, 3}, {1, 2, 3});
    const auto [y, stats] = instance_norm(x);
    CHECK(stats.mean[0] == 2.0);
    double mean = 0.0;
    for (double v : y.data) mean += v;
    CHECK(std::abs(mean / 3.0) < 1e-12);

    const Tensor back = instance_denorm(y, stats);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        CHECK(std::abs(back.data[i] - x.data[i]) < 1e-10);

    const Tensor flat({1, 5}, std::vector<double>(5, 42.0));
    const auto [yf, sf] = instance_norm(flat);
    for (double v : yf.data) CHECK(v == 0.0);
}

TEST_CASE("mixing block: zero weights are the identity") {
    MixerConfig cfg = tiny_config();
    MixerModel model(cfg, 7);
    zero_params(model);

    Tape tape;
    Rng rng(5);
    std::vector<NodeId> z;
    std::vector<Tensor> inputs;
    for (int i = 0; i < model.scales(); ++i) {
        Tensor t({3, 4});
        for (double& v : t.data) v = rng.normal();
        inputs.push_back(t);
        z.push_back(tape.constant(t));
    }
    const std::vector<NodeId> out = model.trunks()[0].blocks[0].forward(tape, z);
    for (int i = 0; i < model.scales(); ++i)
        CHECK(tape.value(out[i]).data == inputs[i].data);
}

TEST_CASE("mixing block: ffn zeroed isolates the cross-scale path") {
    MixerConfig cfg = tiny_config();
    MixerModel model(cfg, 7);
    MixingBlock& block = model.trunks()[0].blocks[0];
    // zero every ffn, keep down
    for (Layer& l : block.ffn) {
        if (std::holds_alternative<KanLayer>(l)) {
            for (double& v : std::get<KanLayer>(l).base_weight.data) v = 0.0;
            for (double& v : std::get<KanLayer>(l).spline_weight.data) v = 0.0;
        } else {
            for (double& v : std::get<MlpLayer>(l).weight.data) v = 0.0;
            for (double& v : std::get<MlpLayer>(l).bias.data) v = 0.0;
        }
    }

    Tape tape;
    Rng rng(6);
    std::vector<NodeId> z;
    std::vector<Tensor> inputs;
    for (int i = 0; i < model.scales(); ++i) {
        Tensor t({2, 4});
        for (double& v : t.data) v = rng.normal();
        inputs.push_back(t);
        z.push_back(tape.constant(t));
    }
    const std::vector<NodeId> out = block.forward(tape, z);

    // scale 0 is untouched
    CHECK(tape.value(out[0]).data == inputs[0].data);
    // scale 1 equals z1 + down(z0), computed independently here
    Tape ref;
    const NodeId down = layer_forward(block.down[0], ref, ref.constant(inputs[0]));
    const Tensor expected = ref.value(ref.add(ref.constant(inputs[1]), down));
    CHECK(tape.value(out[1]).data == expected.data);
}

TEST_CASE("gradients flow through one mixing block") {
    MixerConfig cfg = tiny_config();
    MixerModel model(cfg, 11);
    MixingBlock& block = model.trunks()[0].blocks[0];

    Rng rng(8);
    Tensor z0({2, 4}), z1({2, 4});
    for (double& v : z0.data) v = 0.6 * rng.normal();
    for (double& v : z1.data) v = 0.6 * rng.normal();

    auto f = [&](Tape& t) {
        const std::vector<NodeId> out = block.forward(t, {t.param(z0), t.constant(z1)});
        return t.sum(t.add(out[0], out[1]));
    };
    CHECK(grad_check(f, z0, 1e-6) < 1e-5);
}

TEST_CASE("forward shape contract and wrong lookback error") {
    MixerConfig cfg;
    cfg.lookback = 96;
    cfg.horizon = 96;
    MixerModel model(cfg, 3);
    Tensor x({2, 7, 96});
    Rng rng(12);
    for (double& v : x.data) v = rng.normal();
    const Tensor y = model.predict(x);
    CHECK(y.shape == std::vector<std::size_t>{2, 7, 96});

    Tensor bad({2, 7, 48});
    CHECK_THROWS_WITH_AS(model.predict(bad), doctest::Contains("96"), shape_error);
}

TEST_CASE("channel permutation equivariance is exact") {
    MixerConfig cfg = tiny_config();
    MixerModel model(cfg, 21);
    const std::size_t d = 5;
    Tensor x({2, d, 16});
    Rng rng(13);
    for (double& v : x.data) v = rng.normal();
    const Tensor y = model.predict(x);

    const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
    Tensor xp({2, d, 16});
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t t = 0; t < 16; ++t)
                xp.data[(b * d + c) * 16 + t] = x.data[(b * d + perm[c]) * 16 + t];
    const Tensor yp = model.predict(xp);

    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t t = 0; t < 4; ++t)
                CHECK(yp.data[(b * d + c) * 4 + t] == y.data[(b * d + perm[c]) * 4 + t]);
}

TEST_CASE("zero heads with instance norm forecast the window mean") {
    MixerConfig cfg = tiny_config();
    MixerModel model(cfg, 31);
    for (Layer& l : model.trunks()[0].heads) {
        KanLayer& head = std::get<KanLayer>(l);
        for (double& v : head.base_weight.data) v = 0.0;
        for (double& v : head.spline_weight.data) v = 0.0;
    }
    Tensor x({1, 1, 16});
    for (int t = 0; t < 16; ++t) x.data[t] = 0.5 * t - 3.0;
    double mean = 0.0;
    for (double v : x.data) mean += v;
    mean /= 16.0;
    const Tensor y = model.predict(x);
    for (double v : y.data) CHECK(v == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("moving-average prior: exact reconstruction, constant series") {
    Tensor c({1, 32}, std::vector<double>(32, 5.5));
    const auto [trend, resid] = apply_prior(c, PriorKind::ma);
    for (double v : trend.data) CHECK(v == doctest::Approx(5.5).epsilon(1e-14));
    for (double v : resid.data) CHECK(std::abs(v) < 1e-12);

    Rng rng(14);
    Tensor x({3, 40});
    for (double& v : x.data) v = rng.normal();
    const auto [a, b] = apply_prior(x, PriorKind::ma);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        CHECK(a.data[i] + b.data[i] == doctest::Approx(x.data[i]).epsilon(1e-14));

    Tensor tiny({1, 10});
    CHECK_THROWS_AS(apply_prior(tiny, PriorKind::ma), config_error);
}

TEST_CASE("dft prior: low bin capture and reconstruction") {
    const std::size_t L = 96;
    Tensor x({1, L});
    const double two_pi = 6.283185307179586476925286766559;
    for (std::size_t t = 0; t < L; ++t) x.data[t] = std::sin(two_pi * 3.0 * t / L);
    const auto [low, high] = apply_prior(x, PriorKind::dft);  // cutoff = 96/8 = 12 > 3
    for (double v : high.data) CHECK(std::abs(v) < 1e-9);
    for (std::size_t t = 0; t < L; ++t)
        CHECK(low.data[t] == doctest::Approx(x.data[t]).epsilon(1e-9));

    Rng rng(15);
    Tensor r({2, 64});
    for (double& v : r.data) v = rng.normal();
    const auto [a, b] = apply_prior(r, PriorKind::dft);
    for (std::size_t i = 0; i < r.data.size(); ++i)
        CHECK(std::abs(a.data[i] + b.data[i] - r.data[i]) < 1e-9);
}

TEST_CASE("variant construction contracts") {
    MixerConfig cfg = tiny_config();
    MixerModel base(cfg, 1);
    CHECK(count_mlp_layers(base) == 0);

    MixerConfig noms = cfg;
    noms.prior = PriorKind::no_multiscale;
    MixerModel m2(noms, 1);
    CHECK(m2.scales() == 1);
    const Tensor x({1, 16}, std::vector<double>(16, 1.0));
    CHECK(build_pyramid(x, noms.pool_k, m2.scales()).size() == 1);

    MixerConfig heads = cfg;
    heads.kinds.head = LayerKind::mlp;
    MixerModel m3(heads, 1);
    CHECK(count_mlp_layers(m3) == m3.scales());
    for (const Layer& l : m3.trunks()[0].heads) {
        const MlpLayer& head = std::get<MlpLayer>(l);
        CHECK(head.in_dim == cfg.d_model);
        CHECK(head.out_dim == cfg.horizon);
    }

    MixerConfig bad = cfg;
    bad.n_scales = 4;  // 16 / 2^3 = 2 < 4 coarsest points
    CHECK_THROWS_AS(MixerModel(bad, 1), config_error);
}

TEST_CASE("forecast decomposes into the per-scale head sum") {
    MixerConfig cfg = tiny_config();
    cfg.instance_norm = false;
    MixerModel model(cfg, 77);
    Tensor x({2, 3, 16});
    Rng rng(16);
    for (double& v : x.data) v = rng.normal();

    const MixerModel::Detail detail = model.predict_detail(x);
    REQUIRE(detail.scale_heads.size() == 1);
    REQUIRE(detail.scale_heads[0].size() == static_cast<std::size_t>(model.scales()));

    const std::size_t n = detail.before_denorm.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (const Tensor& head : detail.scale_heads[0]) total += head.data[i];
        CHECK(detail.output.data[i] == total);  // instance_norm off: output == sum
    }

    // with normalization on, the identity holds before denormalization
    cfg.instance_norm = true;
    MixerModel m2(cfg, 77);
    const MixerModel::Detail d2 = m2.predict_detail(x);
    for (std::size_t i = 0; i < d2.before_denorm.data.size(); ++i) {
        double total = 0.0;
        for (const Tensor& head : d2.scale_heads[0]) total += head.data[i];
        CHECK(d2.before_denorm.data[i] == total);
    }
}

TEST_CASE("residual identity: zero-initialized blocks pass scales through") {
    MixerConfig cfg = tiny_config();
    cfg.instance_norm = false;
    MixerModel model(cfg, 99);
    // zero the mixing blocks only; embeddings and heads stay random
    for (MixingBlock& block : model.trunks()[0].blocks) {
        auto zero_layer = [](Layer& l) {
            if (std::holds_alternative<KanLayer>(l)) {
                for (double& v : std::get<KanLayer>(l).base_weight.data) v = 0.0;
                for (double& v : std::get<KanLayer>(l).spline_weight.data) v = 0.0;
            } else {
                for (double& v : std::get<MlpLayer>(l).weight.data) v = 0.0;
                for (double& v : std::get<MlpLayer>(l).bias.data) v = 0.0;
            }
        };
        for (Layer& l : block.down) zero_layer(l);
        for (Layer& l : block.ffn) zero_layer(l);
    }

    // heads applied straight to embeddings must give the same forecast
    Tensor x({1, 2, 16});
    Rng rng(18);
    for (double& v : x.data) v = rng.normal();
    const Tensor with_blocks = model.predict(x);

    Tape tape;
    const Tensor rows = flatten_channels(x);
    const std::vector<NodeId> pyr = build_pyramid(tape, tape.constant(rows), cfg.pool_k,
                                                  model.scales());
    NodeId total = -1;
    Trunk& trunk = model.trunks()[0];
    for (int i = 0; i < model.scales(); ++i) {
        const NodeId z = layer_forward(trunk.embed[i], tape, pyr[i]);
        const NodeId y = layer_forward(trunk.heads[i], tape, z);
        total = i == 0 ? y : tape.add(total, y);
    }
    const Tensor direct = tape.value(total);
    CHECK(flatten_channels(with_blocks).data == direct.data);
}

TEST_CASE("end-to-end gradient check on the miniature model") {
    MixerConfig cfg = tiny_config();
    MixerModel model(cfg, 5);
    Tensor x({2, 1, 16});
    Rng rng(20);
    for (double& v : x.data) v = rng.normal();
    const Tensor rows = flatten_channels(x);

    // spot-check one parameter tensor of each component kind
    std::vector<ParamRef> params = model.parameters();
    auto f = [&](Tape& t) {
        const NodeId out = model.forward_rows(t, rows);
        return t.mean(t.mul(out, out));
    };
    int checked = 0;
    for (const ParamRef& p : params) {
        if (p.name.find("embed0") == std::string::npos &&
            p.name.find("down1") == std::string::npos &&
            p.name.find("ffn0") == std::string::npos &&
            p.name.find("head1") == std::string::npos)
            continue;
        CHECK(grad_check(f, *p.tensor, 1e-6) < 1e-4);
        ++checked;
    }
    CHECK(checked >= 4);
}
