#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kanmixer/bench.hpp"
#include "kanmixer/checkpoint.hpp"
#include "kanmixer/commands.hpp"
#include "kanmixer/config.hpp"

using namespace kanmixer;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    std::string path;
    explicit TempDir(const std::string& name) : path("/tmp/kanmixer_cli_" + name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string write_small_setup(const std::string& dir, int epochs = 2, std::uint64_t seed = 9) {
    write_csv(make_synthetic_series(260, 2), dir + "/data.csv");
    const std::string config_path = dir + "/run.cfg";
    std::ofstream cfg(config_path);
    cfg << "# small harness run\n"
        << "dataset.path = " << dir << "/data.csv\n"
        << "dataset.family = ett\n"
        << "model.lookback = 16\n"
        << "model.horizon = 4\n"
        << "model.d_model = 4\n"
        << "model.n_blocks = 1\n"
        << "model.n_scales = 2\n"
        << "train.epochs = " << epochs << "\n"
        << "train.patience = " << std::min(epochs, 3) << "\n"
        << "train.seed = " << seed << "\n";
    return config_path;
}

}  // namespace

TEST_CASE("config defaults, strict keys, and d_model resolution") {
    const ConfigFile defaults;
    CHECK(defaults.get("model.lookback") == "96");
    CHECK(defaults.get("train.lr") == "0.01");
    CHECK(defaults.mixer().d_model == 16);

    CHECK_THROWS_WITH_AS(ConfigFile::from_text("model.dmodel = 12\n"),
                         doctest::Contains("model.dmodel"), config_error);

    const ConfigFile mlp = ConfigFile::from_text(
        "model.embed = mlp\nmodel.down = mlp\nmodel.ffn = mlp\nmodel.head = mlp\n");
    CHECK(mlp.mixer().d_model == 64);  // all-mlp default width

    const ConfigFile pinned = ConfigFile::from_text(
        "model.embed = mlp\nmodel.down = mlp\nmodel.ffn = mlp\nmodel.head = mlp\n"
        "model.d_model = 24\n");
    CHECK(pinned.mixer().d_model == 24);

    const ConfigFile commented = ConfigFile::from_text("model.horizon = 192  # long horizon\n");
    CHECK(commented.mixer().horizon == 192);
}

TEST_CASE("config echo line parses back to an identical config") {
    ConfigFile cfg;
    cfg.set("model.basis", "fourier");
    cfg.set("train.seed", "42");
    const ConfigFile back = ConfigFile::from_echo_line(cfg.echo_line());
    CHECK(back.serialize() == cfg.serialize());
}

TEST_CASE("checkpoint round-trip is byte-identical") {
    TempDir dir("ckpt");
    ConfigFile cfg;
    cfg.set("model.lookback", "16");
    cfg.set("model.horizon", "4");
    cfg.set("model.d_model", "4");
    cfg.set("model.n_blocks", "1");
    cfg.set("model.n_scales", "2");

    MixerModel model(cfg.mixer(), 77);
    const std::string p1 = dir.path + "/a.ckpt";
    save_checkpoint(p1, cfg, model.parameters());

    MixerModel loaded(cfg.mixer(), 1);  // different init, overwritten by load
    load_checkpoint(p1, cfg, loaded.parameters());
    const std::string p2 = dir.path + "/b.ckpt";
    save_checkpoint(p2, cfg, loaded.parameters());
    CHECK(slurp(p1) == slurp(p2));

    // embedded echo parses as a valid config
    const ConfigFile embedded = read_checkpoint_config(p1);
    CHECK(embedded.get("model.lookback") == "16");

    // mismatched model keys refuse to load
    ConfigFile other = cfg;
    other.set("model.d_model", "8");
    MixerModel wrong(other.mixer(), 1);
    CHECK_THROWS_WITH_AS(load_checkpoint(p1, other, wrong.parameters()),
                         doctest::Contains("model.d_model"), config_error);
}

TEST_CASE("truncated checkpoint parse error names the line") {
    TempDir dir("trunc");
    ConfigFile cfg;
    cfg.set("model.lookback", "16");
    cfg.set("model.horizon", "4");
    cfg.set("model.d_model", "4");
    cfg.set("model.n_blocks", "1");
    cfg.set("model.n_scales", "2");
    MixerModel model(cfg.mixer(), 3);
    const std::string path = dir.path + "/t.ckpt";
    save_checkpoint(path, cfg, model.parameters());

    // chop the file at line 5
    std::ifstream in(path);
    std::string out, line;
    for (int i = 0; i < 5 && std::getline(in, line); ++i) out += line + "\n";
    in.close();
    std::ofstream(path) << out;

    MixerModel fresh(cfg.mixer(), 3);
    CHECK_THROWS_WITH_AS(load_checkpoint(path, cfg, fresh.parameters()),
                         doctest::Contains("line 6"), parse_error);
}

TEST_CASE("cmd_train happy path, then eval reproduces the report") {
    TempDir dir("train");
    const std::string config_path = write_small_setup(dir.path);

    CHECK(cmd_train(config_path, dir.path + "/out") == 0);
    CHECK(std::filesystem::exists(dir.path + "/out/checkpoint.txt"));
    CHECK(std::filesystem::exists(dir.path + "/out/report.txt"));

    // the checkpoint restores to exactly the reported test metrics
    const std::string report = slurp(dir.path + "/out/report.txt");
    const std::size_t at = report.find("test_mse=");
    REQUIRE(at != std::string::npos);
    const double reported = std::strtod(report.c_str() + at + 9, nullptr);

    const ConfigFile cfg = ConfigFile::from_file(config_path);
    SeriesTable table = load_csv(cfg.dataset_path());
    const Splits splits = split(table, cfg.split_spec());
    zscore(table, splits.train);
    const WindowSet test(table, splits.test, cfg.mixer().lookback, cfg.mixer().horizon);
    MixerModel model(cfg.mixer(), 1);
    load_checkpoint(dir.path + "/out/checkpoint.txt", cfg, model.parameters());
    const double recomputed = evaluate(model, test, cfg.train().batch_size).first;
    CHECK(std::abs(recomputed - reported) < 1e-15);

    CHECK(cmd_eval(dir.path + "/out/checkpoint.txt", config_path, "test") == 0);
    CHECK(cmd_eval(dir.path + "/out/checkpoint.txt", config_path, "val") == 0);
    CHECK(cmd_eval(dir.path + "/out/checkpoint.txt", config_path, "nope") != 0);
}

TEST_CASE("cmd_train failure paths exit nonzero") {
    TempDir dir("fail");
    // unknown key
    std::ofstream(dir.path + "/bad.cfg") << "model.dmodel = 2\n";
    CHECK(cmd_train(dir.path + "/bad.cfg", dir.path + "/out") != 0);
    // missing dataset
    std::ofstream(dir.path + "/nodata.cfg") << "dataset.path = /nonexistent.csv\n";
    CHECK(cmd_train(dir.path + "/nodata.cfg", dir.path + "/out") != 0);
}

TEST_CASE("determinism: identical config and seed give identical artifacts") {
    TempDir dir("determ");
    const std::string config_path = write_small_setup(dir.path);
    CHECK(cmd_train(config_path, dir.path + "/run1") == 0);
    CHECK(cmd_train(config_path, dir.path + "/run2") == 0);
    CHECK(slurp(dir.path + "/run1/checkpoint.txt") == slurp(dir.path + "/run2/checkpoint.txt"));

    // reports agree once the wall-clock line is dropped
    auto strip_wall = [](std::string text) {
        const std::size_t at = text.find("wall_seconds=");
        REQUIRE(at != std::string::npos);
        return text.substr(0, at);
    };
    CHECK(strip_wall(slurp(dir.path + "/run1/report.txt")) ==
          strip_wall(slurp(dir.path + "/run2/report.txt")));

    // seed override changes the outcome
    CHECK(cmd_train(config_path, dir.path + "/run3", 12345) == 0);
    CHECK(slurp(dir.path + "/run1/checkpoint.txt") != slurp(dir.path + "/run3/checkpoint.txt"));
}

TEST_CASE("cmd_ablate writes the grid table") {
    TempDir dir("ablate");
    const std::string config_path = write_small_setup(dir.path, 1);
    CHECK(cmd_ablate("components", config_path, dir.path + "/out", 2) == 0);
    const std::string table = slurp(dir.path + "/out/ablation_components.tsv");
    CHECK(table.find("KANMixer") != std::string::npos);
    CHECK(table.find("w/o KAN-Prediction") != std::string::npos);
    CHECK(table.find("delta_mse") != std::string::npos);

    CHECK(cmd_ablate("nope", config_path, dir.path + "/out") != 0);

    CHECK(cmd_ablate("basis", config_path, dir.path + "/out", 2, {4, 8}) == 0);
    const std::string series = slurp(dir.path + "/out/ablation_basis_series.tsv");
    CHECK(series.find("wavelet\t8") != std::string::npos);
}

TEST_CASE("cmd_profile prints analytic counts") {
    TempDir dir("profile");
    const std::string config_path = write_small_setup(dir.path, 1);
    CHECK(cmd_profile(config_path) == 0);
}
