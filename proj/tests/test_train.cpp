#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "kanmixer/train.hpp"
#include "oracles.hpp"

using namespace kanmixer;

namespace {

MixerConfig small_config() {
    MixerConfig cfg;
    cfg.lookback = 16;
    cfg.horizon = 4;
    cfg.d_model = 4;
    cfg.n_blocks = 1;
    cfg.n_scales = 2;
    return cfg;
}

}  // namespace

TEST_CASE("adam first step with bias correction") {
    Tensor theta({1}, {1.0});
    theta.ensure_grad();
    theta.grad[0] = 1.0;
    TrainConfig cfg;
    Adam adam({{"theta", &theta}}, cfg);
    adam.step();
    // m-hat = v-hat = 1 after bias correction, so the update is lr/(1 + eps)
    CHECK(theta.data[0] == doctest::Approx(1.0 - 0.01 / (1.0 + 1e-8)).epsilon(1e-15));
}

TEST_CASE("zero gradient leaves parameters unchanged") {
    Tensor theta({3}, {1.0, -2.0, 0.5});
    theta.ensure_grad();
    TrainConfig cfg;
    Adam adam({{"theta", &theta}}, cfg);
    adam.step();
    CHECK(theta.data == std::vector<double>{1.0, -2.0, 0.5});
}

TEST_CASE("adam matches the straight-line reference over 100 random steps") {
    Rng rng(31);
    const std::size_t n = 17;
    Tensor theta({n});
    for (double& v : theta.data) v = rng.normal();
    std::vector<double> ref_theta = theta.data;

    TrainConfig cfg;
    Adam adam({{"theta", &theta}}, cfg);
    oracle::AdamRef ref(n, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);

    theta.ensure_grad();
    for (int step = 0; step < 100; ++step) {
        std::vector<double> g(n);
        for (double& v : g) v = rng.normal();
        theta.grad = g;
        adam.step();
        ref.step(ref_theta, g);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(theta.data[i] - ref_theta[i]) < 1e-12);
    }
}

TEST_CASE("adam aborts on non-finite gradients, naming the parameter") {
    Tensor theta({2}, {1.0, 2.0});
    theta.ensure_grad();
    theta.grad = {0.0, std::numeric_limits<double>::quiet_NaN()};
    TrainConfig cfg;
    Adam adam({{"block0.ffn1.spline", &theta}}, cfg);
    CHECK_THROWS_WITH_AS(adam.step(), doctest::Contains("block0.ffn1.spline"), contract_error);
}

TEST_CASE("mse and mae hand values") {
    const Tensor pred({1, 1, 2}, {1, 3});
    const Tensor truth({1, 1, 2}, {1, 2});
    const auto [mse, mae] = mse_mae(pred, truth);
    CHECK(mse == 0.5);
    CHECK(mae == 0.5);

    const auto [z1, z2] = mse_mae(truth, truth);
    CHECK(z1 == 0.0);
    CHECK(z2 == 0.0);

    Tensor shifted = truth;
    for (double& v : shifted.data) v += 0.25;
    const auto [cmse, cmae] = mse_mae(shifted, truth);
    CHECK(cmse == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(cmae == doctest::Approx(0.25).epsilon(1e-15));

    Tensor wrong({1, 1, 3});
    CHECK_THROWS_AS(mse_mae(pred, wrong), shape_error);
}

TEST_CASE("gradient clipping caps the global norm") {
    Tensor a({2}, {0.0, 0.0});
    Tensor b({1}, {0.0});
    a.ensure_grad();
    b.ensure_grad();
    a.grad = {3.0, 0.0};
    b.grad = {4.0};
    const std::vector<ParamRef> params = {{"a", &a}, {"b", &b}};
    const double norm = clip_gradients(params, 1.0);
    CHECK(norm == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(a.grad[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(b.grad[0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("patience zero runs exactly one epoch") {
    const SeriesTable table = make_synthetic_series(120, 1);
    SeriesTable norm = table;
    const Splits splits = split(norm, SplitSpec::ett());
    zscore(norm, splits.train);
    const WindowSet train(norm, splits.train, 16, 4);
    const WindowSet val(norm, splits.val, 16, 4);

    MixerModel model(small_config(), 3);
    TrainConfig cfg;
    cfg.patience = 0;
    cfg.max_epochs = 10;
    const RunReport report = fit(model, train, &val, nullptr, cfg);
    CHECK(report.train_loss.size() == 1);
    CHECK(report.best_epoch == 1);
}

TEST_CASE("same seed twice gives identical loss trajectories") {
    const SeriesTable table = make_synthetic_series(160, 2);
    SeriesTable norm = table;
    const Splits splits = split(norm, SplitSpec::ett());
    zscore(norm, splits.train);
    const WindowSet train(norm, splits.train, 16, 4);
    const WindowSet val(norm, splits.val, 16, 4);
    const WindowSet test(norm, splits.test, 16, 4);

    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.patience = 3;
    cfg.seed = 12345;

    MixerModel m1(small_config(), cfg.seed);
    const RunReport r1 = fit(m1, train, &val, &test, cfg);
    MixerModel m2(small_config(), cfg.seed);
    const RunReport r2 = fit(m2, train, &val, &test, cfg);

    CHECK(r1.train_loss == r2.train_loss);  // bit-identical
    CHECK(r1.val_loss == r2.val_loss);
    CHECK(r1.test_mse == r2.test_mse);
    CHECK(r1.test_mae == r2.test_mae);

    // and the restored parameters agree bitwise
    std::vector<ParamRef> p1 = m1.parameters(), p2 = m2.parameters();
    for (std::size_t i = 0; i < p1.size(); ++i)
        CHECK(p1[i].tensor->data == p2[i].tensor->data);
}

TEST_CASE("early stopping restores the best-validation parameters") {
    const SeriesTable table = make_synthetic_series(200, 1);
    SeriesTable norm = table;
    const Splits splits = split(norm, SplitSpec::ett());
    zscore(norm, splits.train);
    const WindowSet train(norm, splits.train, 16, 4);
    const WindowSet val(norm, splits.val, 16, 4);

    MixerModel model(small_config(), 8);
    TrainConfig cfg;
    cfg.max_epochs = 6;
    cfg.patience = 6;  // never trip early so every epoch is recorded
    const RunReport report = fit(model, train, &val, nullptr, cfg);

    REQUIRE(!report.val_loss.empty());
    int argmin = 0;
    for (std::size_t e = 1; e < report.val_loss.size(); ++e)
        if (report.val_loss[e] < report.val_loss[argmin]) argmin = static_cast<int>(e);
    CHECK(report.best_epoch == argmin + 1);

    // restored parameters reproduce exactly the best validation MSE
    const double val_mse = evaluate(model, val, cfg.batch_size).first;
    CHECK(val_mse == report.val_loss[argmin]);
}

TEST_CASE("divergence aborts with the finished epochs kept") {
    SeriesTable bad = make_synthetic_series(120, 1);
    bad.values[10] = std::numeric_limits<double>::infinity();
    const Splits splits = split(bad, SplitSpec::ett());
    const WindowSet train(bad, splits.train, 16, 4);

    MixerModel model(small_config(), 5);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.patience = 3;
    const RunReport report = fit(model, train, nullptr, nullptr, cfg);
    CHECK(report.status == "diverged");
    for (double loss : report.train_loss) CHECK(std::isfinite(loss));
}
