#include "kanmixer/bench.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace kanmixer {

long long basis_eval_macs(const BasisSpec& spec) {
    switch (spec.kind) {
        case BasisKind::bspline: {
            const long long p = spec.grid.degree;
            return p * (p + 1);  // triangular recursion
        }
        case BasisKind::chebyshev: return spec.cheb_degree;
        case BasisKind::fourier: return 2LL * spec.fourier_k;
        case BasisKind::wavelet:
            return 4LL * static_cast<long long>(spec.scales.size() * spec.translations.size());
    }
    return 0;
}

long long layer_macs(const Layer& layer) {
    if (std::holds_alternative<MlpLayer>(layer)) {
        const MlpLayer& l = std::get<MlpLayer>(layer);
        return static_cast<long long>(l.in_dim) * l.out_dim;
    }
    const KanLayer& l = std::get<KanLayer>(layer);
    const long long f = l.spec.num_functions();
    return static_cast<long long>(l.in_dim) * l.out_dim * (1 + f) +
           static_cast<long long>(l.in_dim) * basis_eval_macs(l.spec);
}

std::size_t count_params(MixerModel& model) {
    std::size_t total = 0;
    for (const ParamRef& p : model.parameters()) total += p.tensor->data.size();
    return total;
}

namespace {

CostReport build_report(MixerModel& model) {
    CostReport report;
    auto add_part = [&](const std::string& name, long long macs, std::size_t params) {
        report.parts.push_back({name, macs, params});
        report.macs_per_window += macs;
        report.param_count += params;
    };
    const std::vector<Trunk>& trunks = model.trunks();
    for (std::size_t t = 0; t < trunks.size(); ++t) {
        const std::string tp = trunks.size() > 1 ? "trunk" + std::to_string(t) + "." : "";
        long long macs = 0;
        std::size_t params = 0;
        for (const Layer& l : trunks[t].embed) {
            macs += layer_macs(l);
            params += layer_parameter_count(l);
        }
        add_part(tp + "embedding", macs, params);

        macs = 0;
        params = 0;
        for (const MixingBlock& b : trunks[t].blocks) {
            for (const Layer& l : b.down) {
                macs += layer_macs(l);
                params += layer_parameter_count(l);
            }
            for (const Layer& l : b.ffn) {
                macs += layer_macs(l);
                params += layer_parameter_count(l);
            }
        }
        add_part(tp + "mixing", macs, params);

        macs = 0;
        params = 0;
        for (const Layer& l : trunks[t].heads) {
            macs += layer_macs(l);
            params += layer_parameter_count(l);
        }
        add_part(tp + "heads", macs, params);
    }
    return report;
}

}  // namespace

long long count_macs(const MixerModel& model) {
    return build_report(const_cast<MixerModel&>(model)).macs_per_window;
}

CostReport cost_report(MixerModel& model) { return build_report(model); }

AblationGrid make_grid(const std::string& name, const MixerConfig& base,
                       std::vector<int> horizons) {
    AblationGrid grid;
    grid.name = name;

    auto with_kinds = [&](LayerKind embed, LayerKind down, LayerKind ffn, LayerKind head) {
        MixerConfig cfg = base;
        cfg.kinds = {embed, down, ffn, head};
        if (!base.d_model_explicit) cfg.d_model = default_d_model(cfg.kinds);
        return cfg;
    };
    const auto kan = LayerKind::kan;
    const auto mlp = LayerKind::mlp;

    if (name == "depth") {
        grid.baseline = "KAN-3L";
        for (int depth : {2, 3, 4}) {
            MixerConfig cfg = with_kinds(kan, kan, kan, kan);
            cfg.n_blocks = depth;
            grid.variants.push_back({"KAN-" + std::to_string(depth) + "L", cfg});
        }
        for (int depth : {2, 3, 4}) {
            MixerConfig cfg = with_kinds(mlp, mlp, mlp, mlp);
            cfg.n_blocks = depth;
            grid.variants.push_back({"MLP-" + std::to_string(depth) + "L", cfg});
        }
    } else if (name == "components") {
        grid.baseline = "KANMixer";
        grid.variants.push_back({"KANMixer", with_kinds(kan, kan, kan, kan)});
        grid.variants.push_back({"w/o KAN-FFN", with_kinds(kan, kan, mlp, kan)});
        grid.variants.push_back({"w/o KAN-Mixing", with_kinds(kan, mlp, kan, kan)});
        grid.variants.push_back({"w/o KAN-Prediction", with_kinds(kan, kan, kan, mlp)});
    } else if (name == "priors") {
        grid.baseline = "";  // per family: MLP_* against MLP, KAN_* against KAN
        const std::vector<std::pair<std::string, PriorKind>> priors = {
            {"", PriorKind::none},
            {"_DFT", PriorKind::dft},
            {"_MA", PriorKind::ma},
            {"_NoMS", PriorKind::no_multiscale},
        };
        for (const auto& [suffix, prior] : priors) {
            MixerConfig cfg = with_kinds(mlp, mlp, mlp, mlp);
            cfg.prior = prior;
            grid.variants.push_back({"MLP" + suffix, cfg});
        }
        for (const auto& [suffix, prior] : priors) {
            MixerConfig cfg = with_kinds(kan, kan, kan, kan);
            cfg.prior = prior;
            grid.variants.push_back({"KAN" + suffix, cfg});
        }
    } else if (name == "basis") {
        grid.baseline = "bspline";
        if (horizons.empty()) horizons.push_back(base.horizon);
        for (int horizon : horizons) {
            for (BasisKind basis : {BasisKind::bspline, BasisKind::chebyshev, BasisKind::fourier,
                                    BasisKind::wavelet}) {
                MixerConfig cfg = with_kinds(kan, kan, kan, kan);
                cfg.basis = basis;
                cfg.horizon = horizon;
                grid.variants.push_back({to_string(basis), cfg});
            }
            MixerConfig cfg = with_kinds(mlp, mlp, mlp, mlp);
            cfg.horizon = horizon;
            grid.variants.push_back({"mlp", cfg});
        }
    } else {
        throw config_error("unknown ablation grid '" + name +
                           "' (valid: depth, components, priors, basis)");
    }
    return grid;
}

namespace {

std::string family_baseline(const std::string& variant) {
    return variant.rfind("MLP", 0) == 0 ? "MLP" : "KAN";
}

}  // namespace

AblationResult run_ablation(const AblationGrid& grid, const SeriesTable& normalized_table,
                            const Splits& splits, const TrainConfig& train_cfg,
                            const std::vector<std::uint64_t>& seeds, int workers) {
    if (seeds.empty()) throw config_error("ablation needs at least one seed");
    if (workers < 1) workers = 1;

    AblationResult result;
    result.grid = grid.name;
    const std::size_t n_variants = grid.variants.size();
    const std::size_t n_seeds = seeds.size();

    std::vector<std::vector<double>> mse(n_variants, std::vector<double>(n_seeds));
    std::vector<std::vector<double>> mae(n_variants, std::vector<double>(n_seeds));
    std::vector<std::size_t> params(n_variants, 0);
    std::vector<long long> macs(n_variants, 0);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t job = next.fetch_add(1);
            if (job >= n_variants * n_seeds) return;
            const std::size_t vi = job / n_seeds;
            const std::size_t si = job % n_seeds;
            const MixerConfig& mcfg = grid.variants[vi].config;

            const WindowSet train(normalized_table, splits.train, mcfg.lookback, mcfg.horizon);
            const WindowSet val(normalized_table, splits.val, mcfg.lookback, mcfg.horizon);
            const WindowSet test(normalized_table, splits.test, mcfg.lookback, mcfg.horizon);

            TrainConfig tc = train_cfg;
            tc.seed = seeds[si];
            MixerModel model(mcfg, tc.seed);
            if (si == 0) {
                params[vi] = count_params(model);
                macs[vi] = count_macs(model);
            }
            const RunReport report = fit(model, train, &val, &test, tc);
            const bool ok = report.status == "ok" && std::isfinite(report.test_mse);
            mse[vi][si] = ok ? report.test_mse : std::numeric_limits<double>::quiet_NaN();
            mae[vi][si] = ok ? report.test_mae : std::numeric_limits<double>::quiet_NaN();
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    result.rows.resize(n_variants);
    for (std::size_t vi = 0; vi < n_variants; ++vi) {
        AblationRow& row = result.rows[vi];
        row.variant = grid.variants[vi].name;
        row.horizon = grid.variants[vi].config.horizon;
        row.seed_mse = mse[vi];
        row.seed_mae = mae[vi];
        row.params = params[vi];
        row.macs = macs[vi];
        int finished = 0;
        double mse_sum = 0.0, mae_sum = 0.0;
        for (std::size_t si = 0; si < n_seeds; ++si) {
            if (std::isfinite(mse[vi][si])) {
                ++finished;
                mse_sum += mse[vi][si];
                mae_sum += mae[vi][si];
            }
        }
        if (finished > 0) {
            row.mean_mse = mse_sum / finished;
            row.mean_mae = mae_sum / finished;
        } else {
            row.mean_mse = std::numeric_limits<double>::quiet_NaN();
            row.mean_mae = std::numeric_limits<double>::quiet_NaN();
        }
        row.status = finished == static_cast<int>(n_seeds)
                         ? "ok"
                         : "diverged(" + std::to_string(n_seeds - finished) + "/" +
                               std::to_string(n_seeds) + ")";
    }

    // Delta-MSE against the baseline row (matched on horizon for basis grids).
    for (AblationRow& row : result.rows) {
        const std::string base_name = grid.baseline.empty() ? family_baseline(row.variant)
                                                            : grid.baseline;
        row.delta_mse = std::numeric_limits<double>::quiet_NaN();
        if (row.variant == base_name) continue;
        for (const AblationRow& other : result.rows) {
            if (other.variant == base_name && other.horizon == row.horizon) {
                row.delta_mse = row.mean_mse - other.mean_mse;
                break;
            }
        }
    }
    return result;
}

}  // namespace kanmixer
