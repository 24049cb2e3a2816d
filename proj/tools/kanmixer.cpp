#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kanmixer/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"KANMixer long-term time-series forecasting toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string grid_name;
    std::string split = "test";
    int workers = 1;
    std::vector<int> horizons;
    std::optional<std::uint64_t> seed;
    std::string checkpoint_path;

    auto* train = app.add_subcommand("train", "train a model and write checkpoint + report");
    train->add_option("--config", config_path, "config file")->required();
    train->add_option("--out", out_dir, "output directory");
    train->add_option("--seed", seed, "override train.seed");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    eval->add_option("--config", config_path, "config file")->required();
    eval->add_option("--split", split, "val|test");

    auto* ablate = app.add_subcommand("ablate", "run a named ablation grid");
    ablate->add_option("--grid", grid_name, "depth|components|priors|basis")->required();
    ablate->add_option("--config", config_path, "config file")->required();
    ablate->add_option("--out", out_dir, "output directory");
    ablate->add_option("--workers", workers, "parallel training workers");
    ablate->add_option("--horizons", horizons, "horizons for the basis grid");
    ablate->add_option("--seed", seed, "override train.seed");

    auto* profile = app.add_subcommand("profile", "print parameter and MAC accounting");
    profile->add_option("--config", config_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) return kanmixer::cmd_train(config_path, out_dir, seed);
    if (eval->parsed()) return kanmixer::cmd_eval(checkpoint_path, config_path, split);
    if (ablate->parsed())
        return kanmixer::cmd_ablate(grid_name, config_path, out_dir, workers, horizons, seed);
    if (profile->parsed()) return kanmixer::cmd_profile(config_path);
    return 1;
}
