#ifndef KANMIXER_TRAIN_HPP_
#define KANMIXER_TRAIN_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kanmixer/data.hpp"
#include "kanmixer/model.hpp"

namespace kanmixer {

struct TrainConfig {
    double lr = 0.01;
    int batch_size = 32;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int max_epochs = 10;
    int patience = 3;  // epochs without validation improvement before stopping
    std::uint64_t seed = 1;
    double clip = 5.0;   // gradient 2-norm ceiling; <= 0 disables
    long max_steps = 0;  // optimizer-step cap; 0 means unlimited

    void validate() const;
};

struct RunReport {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    double test_mse = std::numeric_limits<double>::quiet_NaN();
    double test_mae = std::numeric_limits<double>::quiet_NaN();
    std::size_t param_count = 0;
    long long macs = 0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    int best_epoch = 0;  // 1-based; 0 when no validation ran
    long steps = 0;
    std::string status = "ok";
    std::vector<std::pair<std::string, std::string>> config_echo;
};

// Adam with bias correction over a fixed parameter list. State is keyed by
// position, so the list must not change between steps.
class Adam {
public:
    Adam(std::vector<ParamRef> params, const TrainConfig& cfg);

    // Applies one update from the accumulated gradients. Throws contract_error
    // naming the parameter if a gradient is not finite.
    void step();

    void zero_grad();
    long t() const { return t_; }

private:
    std::vector<ParamRef> params_;
    std::vector<std::vector<double>> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

// Mean squared / mean absolute error over identically shaped tensors, summed
// in storage (window-major) order.
std::pair<double, double> mse_mae(const Tensor& pred, const Tensor& truth);

// Scales all gradients so their global 2-norm is at most max_norm.
// Returns the pre-clip norm.
double clip_gradients(const std::vector<ParamRef>& params, double max_norm);

// Forward-only evaluation over every window of the set, fixed order.
std::pair<double, double> evaluate(MixerModel& model, const WindowSet& windows, int batch_size);

// Full training loop: seeded shuffling, early stopping on validation MSE,
// best-checkpoint restoration, one test evaluation. val/test may be null.
RunReport fit(MixerModel& model, const WindowSet& train, const WindowSet* val,
              const WindowSet* test, const TrainConfig& cfg);

}  // namespace kanmixer

#endif  // KANMIXER_TRAIN_HPP_
