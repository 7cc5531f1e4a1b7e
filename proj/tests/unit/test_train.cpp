#include <doctest.h>

#include <algorithm>

#include "declinecast/errors.hpp"
#include "declinecast/nn/train.hpp"
#include "test_util.hpp"

using namespace declinecast;
using namespace declinecast::nn;

namespace {

struct Fixture {
    Dataset fit;
    Dataset val;
    NetworkModel model;
};

Fixture make_fixture(std::uint64_t seed, std::size_t wells = 30, std::size_t months = 24,
                     std::size_t n_input = 6) {
    Rng rng(seed);
    auto all = synth_generate(testutil::single_county("C", wells, months, 0.02), rng).data;
    auto parts = validation_split(all, 0.2, rng);
    auto model = build_network(n_input, months - n_input, rng);
    model.scaler = fit_scaler(parts.first);
    return {std::move(parts.first), std::move(parts.second), std::move(model)};
}

}  // namespace

TEST_CASE("patience arithmetic with an injected validation metric") {
    auto f = make_fixture(1);
    TrainConfig cfg;
    cfg.max_epochs = 50;
    cfg.patience = 10;

    SUBCASE("constant from epoch 1 stops at 1 + patience") {
        const auto r = train(f.model, f.fit, f.val, 6, cfg, [](const NetworkModel&, int) { return 1.0; });
        CHECK(r.history.epochs() == 11);
        CHECK(r.history.best_epoch == 1);
        CHECK(r.history.stopped_early);
    }
    SUBCASE("strictly decreasing never triggers") {
        const auto r = train(f.model, f.fit, f.val, 6, cfg,
                             [](const NetworkModel&, int e) { return 1.0 / e; });
        CHECK(r.history.epochs() == 50);
        CHECK(r.history.best_epoch == 50);
        CHECK_FALSE(r.history.stopped_early);
    }
    SUBCASE("constant after epoch e restores the epoch-e weights") {
        const int e = 7;
        std::vector<DenseLayer> at_e;
        const auto r = train(f.model, f.fit, f.val, 6, cfg, [&](const NetworkModel& m, int epoch) {
            if (epoch == e) at_e = m.layers;
            return epoch <= e ? 10.0 - epoch : 10.0 - e;
        });
        CHECK(r.history.epochs() == e + cfg.patience);
        CHECK(r.history.best_epoch == e);
        CHECK(r.model.layers == at_e);
    }
    SUBCASE("patience 0 disables early stopping") {
        cfg.patience = 0;
        cfg.max_epochs = 15;
        const auto r = train(f.model, f.fit, f.val, 6, cfg, [](const NetworkModel&, int) { return 1.0; });
        CHECK(r.history.epochs() == 15);
        CHECK_FALSE(r.history.stopped_early);
    }
}

TEST_CASE("training returns the best validation weights") {
    auto f = make_fixture(2);
    TrainConfig cfg;
    cfg.max_epochs = 80;
    cfg.patience = 5;
    const auto r = train(f.model, f.fit, f.val, 6, cfg);
    const auto& h = r.history;
    CHECK(h.epochs() <= h.best_epoch + cfg.patience);
    const double min_val = *std::min_element(h.val_loss.begin(), h.val_loss.end());
    CHECK(h.val_loss[h.best_epoch - 1] == min_val);
    const double again = evaluate_mae(r.model, make_windows(f.val, 6, *r.model.scaler));
    CHECK(std::abs(again - min_val) <= 1e-12);
    CHECK(h.train_loss.size() == h.val_loss.size());
}

TEST_CASE("training is deterministic per seed") {
    auto f = make_fixture(3);
    TrainConfig cfg;
    cfg.max_epochs = 20;
    cfg.seed = 77;
    const auto a = train(f.model, f.fit, f.val, 6, cfg);
    const auto b = train(f.model, f.fit, f.val, 6, cfg);
    CHECK(a.history.val_loss == b.history.val_loss);
    CHECK(a.history.train_loss == b.history.train_loss);
    CHECK(a.model.layers == b.model.layers);
    cfg.seed = 78;
    const auto c = train(f.model, f.fit, f.val, 6, cfg);
    CHECK_FALSE(c.model.layers == a.model.layers);
}

TEST_CASE("frozen layers are untouched by training") {
    auto f = make_fixture(4);
    f.model.layers[0].trainable = false;
    f.model.layers[2].trainable = false;
    TrainConfig cfg;
    cfg.max_epochs = 10;
    const auto r = train(f.model, f.fit, f.val, 6, cfg);
    CHECK(r.model.layers[0] == f.model.layers[0]);
    CHECK(r.model.layers[2] == f.model.layers[2]);
    CHECK_FALSE(r.model.layers[3] == f.model.layers[3]);
}

TEST_CASE("training preconditions") {
    auto f = make_fixture(5);
    TrainConfig cfg;
    CHECK_THROWS_AS(train(f.model, Dataset({}, 24), f.val, 6, cfg), DataError);
    CHECK_THROWS_AS(train(f.model, f.fit, f.val, 5, cfg), ConfigError);
    auto unscaled = f.model;
    unscaled.scaler.reset();
    CHECK_THROWS_AS(train(unscaled, f.fit, f.val, 6, cfg), ConfigError);
    cfg.patience = 300;
    CHECK_THROWS_AS(train(f.model, f.fit, f.val, 6, cfg), ConfigError);
}

TEST_CASE("training reduces the loss on a small decline set") {
    auto f = make_fixture(6, 60, 30);
    TrainConfig cfg;
    cfg.max_epochs = 150;
    const auto data = make_windows(f.val, 6, *f.model.scaler);
    const double before = evaluate_mae(f.model, data);
    const auto r = train(f.model, f.fit, f.val, 6, cfg);
    CHECK(evaluate_mae(r.model, data) < 0.5 * before);
}
