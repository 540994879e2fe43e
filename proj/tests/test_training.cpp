#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "dstp/train.hpp"
#include "test_util.hpp"

using namespace dstp;
using dstp::testing::close;

namespace {

std::string temp_path(const std::string& stem) {
    return (std::filesystem::temp_directory_path() / stem).string();
}

std::vector<WindowSample> small_windows(std::size_t n, std::size_t rows, std::size_t T,
                                        std::size_t tau, std::uint64_t seed = 1) {
    SyntheticResult s = synthesize(n, rows, 1, seed);
    return make_windows(s.table, T, tau);
}

ModelConfig small_config(const std::string& arch, std::size_t n, std::size_t T,
                         std::size_t tau) {
    ModelConfig c;
    c.arch = arch_from_string(arch);
    c.n = n;
    c.T = T;
    c.horizon = tau;
    c.m = c.q = c.p = 4;
    return c;
}

}  // namespace

TEST_CASE("mse_loss values and failures") {
    CHECK(mse_loss({{1.0}, {1.0}}, {{0.0}, {0.0}}) == 1.0);
    CHECK(mse_loss({{1.0, 2.0}}, {{0.0, 0.0}}) == 5.0);  // squared L2 per sample
    CHECK(close(mse_loss({{1.0, 2.0}, {0.0, 0.0}}, {{0.0, 0.0}, {1.0, 0.0}}), 3.0, 1e-15));
    CHECK_THROWS_AS(mse_loss({}, {}), DimensionError);
    CHECK_THROWS_AS(mse_loss({{1.0}}, {{1.0}, {2.0}}), DimensionError);
    CHECK_THROWS_AS(mse_loss({{1.0}}, {{1.0, 2.0}}), DimensionError);
}

TEST_CASE("train config validation") {
    TrainConfig tc;
    CHECK_NOTHROW(tc.validate());
    tc.batch_size = 0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = TrainConfig{};
    tc.learning_rate = 0.0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = TrainConfig{};
    tc.val_fraction = 0.5;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
}

TEST_CASE("adam leaves parameters alone when gradients are zero") {
    ParameterStore store;
    store.add("w", Array::vec({1.0, -2.0, 3.0}));
    store.zero_grads();
    TrainConfig tc;
    Adam adam(tc);
    adam.step(store);
    adam.step(store);
    CHECK(store.at("w").value.data == std::vector<double>{1.0, -2.0, 3.0});
    CHECK(adam.steps() == 2);
}

TEST_CASE("first adam step moves by about the learning rate against the gradient sign") {
    ParameterStore store;
    store.add("w", Array::vec({1.0, 1.0}));
    store.zero_grads();
    store.at("w").grad.data = {0.5, -2.0};
    TrainConfig tc;
    Adam adam(tc);
    adam.step(store);
    CHECK(close(store.at("w").value.data[0], 1.0 - tc.learning_rate, 1e-6));
    CHECK(close(store.at("w").value.data[1], 1.0 + tc.learning_rate, 1e-6));
}

TEST_CASE("gradients above the clip norm are rescaled before the update") {
    ParameterStore store;
    store.add("w", Array::vec({0.0, 0.0}));
    store.zero_grads();
    store.at("w").grad.data = {30.0, 40.0};  // norm 50, clip 5 -> {3, 4}
    TrainConfig tc;
    Adam adam(tc);
    adam.step(store);
    CHECK(close(store.at("w").moment1.data[0], (1.0 - tc.beta1) * 3.0, 1e-12));
    CHECK(close(store.at("w").moment1.data[1], (1.0 - tc.beta1) * 4.0, 1e-12));
    CHECK(close(store.at("w").moment2.data[0], (1.0 - tc.beta2) * 9.0, 1e-12));
}

TEST_CASE("adam drives a quadratic strictly downhill") {
    ParameterStore store;
    store.add("w", Array::scalar(1.0));
    TrainConfig tc;
    tc.learning_rate = 0.05;
    Adam adam(tc);
    double prev = 1.0;
    for (int i = 0; i < 10; ++i) {
        double w = store.at("w").value.data[0];
        store.zero_grads();
        store.at("w").grad.data[0] = 2.0 * w;
        adam.step(store);
        double loss = store.at("w").value.data[0] * store.at("w").value.data[0];
        CHECK(loss < prev);
        prev = loss;
    }
}

TEST_CASE("patience zero trains exactly one epoch") {
    auto windows = small_windows(2, 60, 4, 2);
    TrainConfig tc;
    tc.batch_size = 8;
    tc.max_epochs = 50;
    tc.patience = 0;
    TrainResult r = train(small_config("lstm", 2, 4, 2), windows, tc);
    CHECK(r.history.size() == 1);
    CHECK(r.checkpoint.best_epoch == 1);
}

TEST_CASE("training is deterministic in the seed") {
    auto windows = small_windows(2, 60, 4, 2);
    TrainConfig tc;
    tc.batch_size = 8;
    tc.max_epochs = 3;
    tc.patience = 10;
    auto run = [&](std::uint64_t seed) {
        TrainConfig c = tc;
        c.seed = seed;
        return train(small_config("gru", 2, 4, 2), windows, c);
    };
    TrainResult a = run(2019);
    TrainResult b = run(2019);
    CHECK(a.history == b.history);
    REQUIRE(a.checkpoint.parameters.size() == b.checkpoint.parameters.size());
    for (std::size_t i = 0; i < a.checkpoint.parameters.size(); ++i)
        CHECK(a.checkpoint.parameters[i].second.data == b.checkpoint.parameters[i].second.data);

    TrainResult c = run(7);
    CHECK(a.history != c.history);
}

TEST_CASE("training reduces the loss on a learnable problem") {
    auto windows = small_windows(3, 120, 4, 1, 5);
    TrainConfig tc;
    tc.batch_size = 16;
    tc.max_epochs = 15;
    tc.patience = 15;
    tc.learning_rate = 0.01;
    TrainResult r = train(small_config("lstm", 3, 4, 1), windows, tc);
    CHECK(r.history.back()[0] < r.history.front()[0]);
    CHECK(r.steps > 0);
    CHECK(r.checkpoint.best_epoch >= 1);
}

TEST_CASE("a batch bigger than the training set is rejected") {
    auto windows = small_windows(2, 20, 4, 2);
    TrainConfig tc;
    tc.batch_size = 1000;
    CHECK_THROWS_AS(train(small_config("lstm", 2, 4, 2), windows, tc), ContractError);
}

TEST_CASE("non-finite losses abort with the epoch and batch named") {
    auto windows = small_windows(2, 60, 4, 2);
    windows[3].future[0] = std::numeric_limits<double>::quiet_NaN();
    TrainConfig tc;
    tc.batch_size = 8;
    tc.max_epochs = 3;
    tc.seed = 2019;
    try {
        train(small_config("lstm", 2, 4, 2), windows, tc);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
        CHECK(std::string(e.what()).find("batch") != std::string::npos);
        CHECK(e.epoch == 1);
    }
}

TEST_CASE("checkpoint round trip is bit exact") {
    ModelConfig mc = small_config("dstp", 3, 4, 2);
    mc.seed = 99;
    Model model(mc);
    Checkpoint ck = Checkpoint::from_model(model);
    ck.stats.mean = {1.5, 2.5, 3.5, 4.5};
    ck.stats.stddev = {0.1, 0.2, 0.3, 0.4};
    ck.stats.target_index = 3;
    ck.best_epoch = 17;
    ck.best_val_loss = 0.0625;

    std::string path = temp_path("dstp_ckpt_test.ckpt");
    ck.save(path);
    Checkpoint back = Checkpoint::load(path);
    std::remove(path.c_str());

    CHECK(arch_name(back.config.arch) == "dstp");
    CHECK(back.config.n == 3);
    CHECK(back.config.T == 4);
    CHECK(back.config.horizon == 2);
    CHECK(back.config.seed == 99);
    CHECK(back.stats.mean == ck.stats.mean);
    CHECK(back.stats.stddev == ck.stats.stddev);
    CHECK(back.stats.target_index == 3);
    CHECK(back.best_epoch == 17);
    CHECK(back.best_val_loss == 0.0625);
    REQUIRE(back.parameters.size() == ck.parameters.size());
    for (std::size_t i = 0; i < ck.parameters.size(); ++i) {
        CHECK(back.parameters[i].first == ck.parameters[i].first);
        CHECK(back.parameters[i].second.shape == ck.parameters[i].second.shape);
        CHECK(back.parameters[i].second.data == ck.parameters[i].second.data);
    }

    // restored model predicts bit-identically
    Model restored = back.to_model();
    std::mt19937_64 rng(4);
    Array X = dstp::testing::random_array({3, 4}, rng);
    Array Y = dstp::testing::random_array({4}, rng);
    CHECK(restored.forward(X, Y).prediction == model.forward(X, Y).prediction);
}

TEST_CASE("checkpoint loading failures") {
    CHECK_THROWS_AS(Checkpoint::load("/nonexistent.ckpt"), DataError);
    std::string path = temp_path("dstp_ckpt_bogus.ckpt");
    {
        std::ofstream out(path, std::ios::binary);
        out << "this is not a checkpoint at all";
    }
    CHECK_THROWS_AS(Checkpoint::load(path), DataError);
    std::remove(path.c_str());
}

TEST_CASE("trained checkpoint survives a save/load round trip") {
    auto windows = small_windows(2, 60, 4, 2);
    TrainConfig tc;
    tc.batch_size = 8;
    tc.max_epochs = 2;
    tc.patience = 10;
    TrainResult r = train(small_config("darnn", 2, 4, 2), windows, tc);
    std::string path = temp_path("dstp_ckpt_trained.ckpt");
    r.checkpoint.save(path);
    Checkpoint back = Checkpoint::load(path);
    std::remove(path.c_str());
    for (std::size_t i = 0; i < back.parameters.size(); ++i)
        CHECK(back.parameters[i].second.data == r.checkpoint.parameters[i].second.data);
    CHECK(back.best_val_loss == r.checkpoint.best_val_loss);
}
