#include "kanmixer/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "kanmixer/rng.hpp"

namespace kanmixer {

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw config_error("learning rate must be positive");
    if (batch_size < 1) throw config_error("batch size must be >= 1");
    if (max_epochs < 1) throw config_error("max_epochs must be >= 1");
    if (patience < 0) throw config_error("patience must be >= 0");
    if (patience > max_epochs) throw config_error("patience must be <= max_epochs");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
        throw config_error("betas must lie in [0,1)");
    if (!(eps > 0.0)) throw config_error("eps must be positive");
}

Adam::Adam(std::vector<ParamRef> params, const TrainConfig& cfg)
    : params_(std::move(params)), lr_(cfg.lr), beta1_(cfg.beta1), beta2_(cfg.beta2),
      eps_(cfg.eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const ParamRef& p : params_) {
        m_.emplace_back(p.tensor->data.size(), 0.0);
        v_.emplace_back(p.tensor->data.size(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = *params_[pi].tensor;
        p.ensure_grad();
        std::vector<double>& m = m_[pi];
        std::vector<double>& v = v_[pi];
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            const double g = p.grad[i];
            if (!std::isfinite(g))
                throw contract_error("non-finite gradient in parameter '" + params_[pi].name +
                                     "' at step " + std::to_string(t_));
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void Adam::zero_grad() {
    for (const ParamRef& p : params_) {
        p.tensor->ensure_grad();
        p.tensor->zero_grad();
    }
}

std::pair<double, double> mse_mae(const Tensor& pred, const Tensor& truth) {
    if (!pred.same_shape(truth))
        throw shape_error("metric shapes differ: " + shape_string(pred.shape) + " vs " +
                          shape_string(truth.shape));
    double se = 0.0, ae = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double d = pred.data[i] - truth.data[i];
        se += d * d;
        ae += std::abs(d);
    }
    const double n = static_cast<double>(pred.data.size());
    return {se / n, ae / n};
}

double clip_gradients(const std::vector<ParamRef>& params, double max_norm) {
    double sq = 0.0;
    for (const ParamRef& p : params)
        for (double g : p.tensor->grad) sq += g * g;
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        for (const ParamRef& p : params)
            for (double& g : p.tensor->grad) g *= scale;
    }
    return norm;
}

std::pair<double, double> evaluate(MixerModel& model, const WindowSet& windows, int batch_size) {
    double se = 0.0, ae = 0.0;
    std::size_t elems = 0;
    Tensor x, y;
    for (std::size_t w0 = 0; w0 < windows.count(); w0 += batch_size) {
        const std::size_t w1 = std::min(windows.count(), w0 + batch_size);
        windows.gather_range(w0, w1, x, y);
        const Tensor pred = model.predict(x);
        for (std::size_t i = 0; i < pred.data.size(); ++i) {
            const double d = pred.data[i] - y.data[i];
            se += d * d;
            ae += std::abs(d);
        }
        elems += pred.data.size();
    }
    return {se / elems, ae / elems};
}

namespace {

std::vector<std::vector<double>> snapshot(const std::vector<ParamRef>& params) {
    std::vector<std::vector<double>> snap;
    snap.reserve(params.size());
    for (const ParamRef& p : params) snap.push_back(p.tensor->data);
    return snap;
}

void restore(const std::vector<ParamRef>& params, const std::vector<std::vector<double>>& snap) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i].tensor->data = snap[i];
}

}  // namespace

RunReport fit(MixerModel& model, const WindowSet& train, const WindowSet* val,
              const WindowSet* test, const TrainConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    RunReport report;
    report.seed = cfg.seed;

    std::vector<ParamRef> params = model.parameters();
    Adam adam(params, cfg);
    Rng shuffle_rng(derive_seed(cfg.seed, 1));

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_params = snapshot(params);
    int best_epoch = 0;
    long steps = 0;
    bool stop = false;

    Tensor x, y;
    for (int epoch = 1; epoch <= cfg.max_epochs && !stop; ++epoch) {
        const std::vector<std::size_t> perm = shuffle_rng.permutation(train.count());
        double loss_sum = 0.0;
        std::size_t loss_windows = 0;

        for (std::size_t i0 = 0; i0 < perm.size(); i0 += cfg.batch_size) {
            const std::size_t i1 = std::min(perm.size(), i0 + cfg.batch_size);
            train.gather(perm, i0, i1, x, y);

            Tape tape;
            const NodeId out = model.forward_rows(tape, flatten_channels(x));
            const NodeId target = tape.constant(flatten_channels(y));
            const NodeId diff = tape.sub(out, target);
            const NodeId loss = tape.mean(tape.mul(diff, diff));
            const double loss_value = tape.value(loss).data[0];
            if (!std::isfinite(loss_value)) {
                report.status = "diverged";
                stop = true;
                break;
            }
            loss_sum += loss_value * (i1 - i0);
            loss_windows += i1 - i0;

            adam.zero_grad();
            tape.backward(loss);
            clip_gradients(params, cfg.clip);
            try {
                adam.step();
            } catch (const contract_error&) {
                report.status = "diverged";
                stop = true;
                break;
            }
            ++steps;
            if (cfg.max_steps > 0 && steps >= cfg.max_steps) {
                stop = true;
                break;
            }
        }
        if (report.status != "ok" || loss_windows == 0) break;
        report.train_loss.push_back(loss_sum / loss_windows);

        if (val != nullptr && val->count() > 0) {
            const double val_mse = evaluate(model, *val, cfg.batch_size).first;
            report.val_loss.push_back(val_mse);
            if (val_mse < best_val) {
                best_val = val_mse;
                best_epoch = epoch;
                best_params = snapshot(params);
            }
            if (epoch - best_epoch >= cfg.patience) stop = true;
        } else {
            best_params = snapshot(params);
            best_epoch = epoch;
        }
    }

    restore(params, best_params);
    report.best_epoch = best_epoch;
    report.steps = steps;

    if (test != nullptr && test->count() > 0 && report.status == "ok") {
        const auto metrics = evaluate(model, *test, cfg.batch_size);
        report.test_mse = metrics.first;
        report.test_mae = metrics.second;
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace kanmixer
