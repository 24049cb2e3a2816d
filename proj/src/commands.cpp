#include "kanmixer/commands.hpp"

#include <sys/resource.h>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "kanmixer/bench.hpp"
#include "kanmixer/checkpoint.hpp"
#include "kanmixer/config.hpp"

namespace kanmixer {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string f4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct LoadedData {
    SeriesTable table;  // globally z-scored in place
    Splits splits;
    ColumnStats stats;
};

LoadedData load_and_normalize(const ConfigFile& cfg) {
    LoadedData data;
    data.table = load_csv(cfg.dataset_path());
    data.splits = split(data.table, cfg.split_spec());
    data.stats = zscore(data.table, data.splits.train);
    return data;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream file(path);
    if (!file) throw load_error("cannot write '" + path + "'");
    file << content;
}

double peak_rss_mib() {
    struct rusage usage {};
    if (getrusage(RUSAGE_SELF, &usage) != 0) return 0.0;
    return usage.ru_maxrss / 1024.0;  // ru_maxrss is KiB on Linux
}

}  // namespace

std::string serialize_report(const RunReport& report) {
    std::string out = "KANMIXER-REPORT v1\n";
    for (const auto& [k, v] : report.config_echo) out += "config." + k + "=" + v + "\n";
    out += "seed=" + std::to_string(report.seed) + "\n";
    out += "status=" + report.status + "\n";
    out += "epochs=" + std::to_string(report.train_loss.size()) + "\n";
    for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
        out += "epoch=" + std::to_string(e + 1) + "\ttrain=" + g17(report.train_loss[e]);
        if (e < report.val_loss.size()) out += "\tval=" + g17(report.val_loss[e]);
        out += "\n";
    }
    out += "best_epoch=" + std::to_string(report.best_epoch) + "\n";
    out += "steps=" + std::to_string(report.steps) + "\n";
    out += "test_mse=" + g17(report.test_mse) + "\n";
    out += "test_mae=" + g17(report.test_mae) + "\n";
    out += "params=" + std::to_string(report.param_count) + "\n";
    out += "macs=" + std::to_string(report.macs) + "\n";
    out += "wall_seconds=" + f4(report.wall_seconds) + "\n";
    return out;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override) {
    try {
        ConfigFile cfg = ConfigFile::from_file(config_path);
        if (seed_override) cfg.set("train.seed", std::to_string(*seed_override));
        const MixerConfig mcfg = cfg.mixer();
        const TrainConfig tcfg = cfg.train();

        LoadedData data = load_and_normalize(cfg);
        const WindowSet train_ws(data.table, data.splits.train, mcfg.lookback, mcfg.horizon);
        const WindowSet val_ws(data.table, data.splits.val, mcfg.lookback, mcfg.horizon);
        const WindowSet test_ws(data.table, data.splits.test, mcfg.lookback, mcfg.horizon);

        MixerModel model(mcfg, tcfg.seed);
        RunReport report = fit(model, train_ws, &val_ws, &test_ws, tcfg);
        report.param_count = count_params(model);
        report.macs = count_macs(model);
        for (const auto& [k, v] : cfg.entries()) report.config_echo.push_back({k, v});

        std::filesystem::create_directories(out_dir);
        save_checkpoint(out_dir + "/checkpoint.txt", cfg, model.parameters());
        write_file(out_dir + "/report.txt", serialize_report(report));

        std::cout << "dataset " << data.table.name << ": " << data.table.rows << " rows, "
                  << data.table.d << " variables\n";
        std::cout << "windows train/val/test: " << train_ws.count() << "/" << val_ws.count()
                  << "/" << test_ws.count() << "\n";
        std::cout << "params " << report.param_count << ", macs/window " << report.macs << "\n";
        for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
            std::cout << "epoch " << (e + 1) << ": train " << f4(report.train_loss[e]);
            if (e < report.val_loss.size()) std::cout << ", val " << f4(report.val_loss[e]);
            std::cout << "\n";
        }
        if (report.status != "ok") {
            std::cerr << "error: training " << report.status << "\n";
            return 2;
        }
        std::cout << "best epoch " << report.best_epoch << "\n";
        std::cout << "test MSE " << f4(report.test_mse) << " MAE " << f4(report.test_mae)
                  << " (" << test_ws.count() << " windows)\n";
        std::cout << "checkpoint: " << out_dir << "/checkpoint.txt\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_eval(const std::string& checkpoint_path, const std::string& config_path,
             const std::string& split_name) {
    try {
        if (split_name != "val" && split_name != "test")
            throw config_error("split must be val|test, got '" + split_name + "'");
        const ConfigFile cfg = ConfigFile::from_file(config_path);
        const MixerConfig mcfg = cfg.mixer();
        const TrainConfig tcfg = cfg.train();

        LoadedData data = load_and_normalize(cfg);
        const RowRange range = split_name == "val" ? data.splits.val : data.splits.test;
        const WindowSet windows(data.table, range, mcfg.lookback, mcfg.horizon);

        MixerModel model(mcfg, tcfg.seed);
        load_checkpoint(checkpoint_path, cfg, model.parameters());

        const auto [mse, mae] = evaluate(model, windows, tcfg.batch_size);
        std::cout << split_name << " MSE " << f4(mse) << " MAE " << f4(mae) << " ("
                  << windows.count() << " windows)\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_ablate(const std::string& grid_name, const std::string& config_path,
               const std::string& out_dir, int workers, std::vector<int> horizons,
               std::optional<std::uint64_t> seed_override) {
    try {
        ConfigFile cfg = ConfigFile::from_file(config_path);
        if (seed_override) cfg.set("train.seed", std::to_string(*seed_override));
        const MixerConfig mcfg = cfg.mixer();
        const TrainConfig tcfg = cfg.train();

        const AblationGrid grid = make_grid(grid_name, mcfg, std::move(horizons));
        LoadedData data = load_and_normalize(cfg);

        // Grid runs share the training config and a fixed three-seed set.
        const std::vector<std::uint64_t> seeds = {tcfg.seed, tcfg.seed + 1, tcfg.seed + 2};
        const AblationResult result =
            run_ablation(grid, data.table, data.splits, tcfg, seeds, workers);

        std::string table = "variant\thorizon\tmean_mse\tmean_mae\tdelta_mse\tparams\tmacs\tstatus\n";
        for (const AblationRow& row : result.rows) {
            table += row.variant + "\t" + std::to_string(row.horizon) + "\t" +
                     f4(row.mean_mse) + "\t" + f4(row.mean_mae) + "\t" +
                     (std::isfinite(row.delta_mse) ? f4(row.delta_mse) : std::string("N/A")) +
                     "\t" + std::to_string(row.params) + "\t" + std::to_string(row.macs) + "\t" +
                     row.status + "\n";
        }
        std::filesystem::create_directories(out_dir);
        const std::string table_path = out_dir + "/ablation_" + grid_name + ".tsv";
        write_file(table_path, table);

        if (grid_name == "basis") {
            // Horizon series per variant, ready for an MSE-vs-horizon plot.
            std::string series = "variant\thorizon\tmean_mse\n";
            for (const AblationRow& row : result.rows)
                series += row.variant + "\t" + std::to_string(row.horizon) + "\t" +
                          f4(row.mean_mse) + "\n";
            write_file(out_dir + "/ablation_basis_series.tsv", series);
        }

        std::cout << table;
        std::cout << "table: " << table_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_profile(const std::string& config_path) {
    try {
        const ConfigFile cfg = ConfigFile::from_file(config_path);
        const MixerConfig mcfg = cfg.mixer();
        TrainConfig tcfg = cfg.train();

        MixerModel model(mcfg, tcfg.seed);
        const CostReport cost = cost_report(model);

        std::cout << "params " << cost.param_count << "\n";
        std::cout << "macs_per_window " << cost.macs_per_window
                  << "  # analytic, single channel; activation evaluations excluded\n";
        for (const CostPart& part : cost.parts)
            std::cout << "  " << part.name << ": macs " << part.macs << ", params "
                      << part.params << "\n";

        // One warmup epoch for local wall-time and memory. Falls back to a
        // synthetic series when the configured dataset is absent.
        SeriesTable table;
        bool synthetic = false;
        try {
            table = load_csv(cfg.dataset_path());
        } catch (const std::exception&) {
            table = make_synthetic_series(2000, 7);
            synthetic = true;
        }
        const Splits splits = split(table, cfg.split_spec());
        zscore(table, splits.train);
        const WindowSet train_ws(table, splits.train, mcfg.lookback, mcfg.horizon);
        tcfg.max_epochs = 1;
        tcfg.patience = 0;
        MixerModel warm(mcfg, tcfg.seed);
        const RunReport report = fit(warm, train_ws, nullptr, nullptr, tcfg);

        std::cout << "warmup_epoch_seconds " << f4(report.wall_seconds)
                  << (synthetic ? "  # synthetic stand-in series" : "") << "\n";
        std::cout << "peak_rss_mib " << f4(peak_rss_mib()) << "\n";
        std::cout << "# local hardware measurement; not comparable to published GPU numbers\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace kanmixer
