#ifndef KANMIXER_BENCH_HPP_
#define KANMIXER_BENCH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "kanmixer/model.hpp"
#include "kanmixer/train.hpp"

namespace kanmixer {

// Analytic multiply-accumulate cost of evaluating every basis function once.
// Activation evaluations (tanh, trig, exp, silu) are not counted, following
// the MAC convention; the report header states this.
long long basis_eval_macs(const BasisSpec& spec);

// Per-row forward MACs of one layer: dense in*out for MLP (bias adds are not
// multiplies), in*out*(1+F) plus the basis evaluation cost for KAN.
long long layer_macs(const Layer& layer);

struct CostPart {
    std::string name;
    long long macs = 0;
    std::size_t params = 0;
};

struct CostReport {
    long long macs_per_window = 0;  // one forward of a single-channel window
    std::size_t param_count = 0;
    std::vector<CostPart> parts;
};

// Exact count of stored trainable scalars, by enumeration.
std::size_t count_params(MixerModel& model);

// Analytic per-window MAC count summed over embeddings, blocks and heads of
// every scale (and both trunks for decomposition priors).
long long count_macs(const MixerModel& model);

CostReport cost_report(MixerModel& model);

struct Variant {
    std::string name;
    MixerConfig config;
};

struct AblationGrid {
    std::string name;
    std::string baseline;  // empty: per-family baselines (prior grid)
    std::vector<Variant> variants;
};

// Built-in grids: "depth", "components", "priors", "basis". The basis grid
// expands over `horizons` (defaults to the base config's horizon).
AblationGrid make_grid(const std::string& name, const MixerConfig& base,
                       std::vector<int> horizons = {});

struct AblationRow {
    std::string variant;
    int horizon = 0;
    std::vector<double> seed_mse;  // NaN marks a diverged run
    std::vector<double> seed_mae;
    double mean_mse = 0.0;
    double mean_mae = 0.0;
    double delta_mse = 0.0;  // vs the grid baseline; NaN for the baseline itself
    std::size_t params = 0;
    long long macs = 0;
    std::string status;
};

struct AblationResult {
    std::string grid;
    std::vector<AblationRow> rows;
};

// Trains every variant for every seed (optionally on several worker threads;
// each run stays single-threaded and seeded, results merge in grid order) and
// attaches mean metrics plus delta-MSE against the grid's baseline.
AblationResult run_ablation(const AblationGrid& grid, const SeriesTable& normalized_table,
                            const Splits& splits, const TrainConfig& train_cfg,
                            const std::vector<std::uint64_t>& seeds, int workers = 1);

}  // namespace kanmixer

#endif  // KANMIXER_BENCH_HPP_
