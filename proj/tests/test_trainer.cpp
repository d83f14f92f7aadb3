#include "iel/trainer.hpp"

#include "iel/data_io.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace iel;

namespace {

// a small corpus shared by the trainer tests; 16x16 keeps epochs fast
struct Corpus {
    Dataset train;
    Dataset val;
    Corpus() {
        train = gen_synthetic(6, 16, 2, 21, "train");
        NoiseSpec spec{2, 0.15f, 2, 21};
        inject_dataset_noise(train, spec);
        val = gen_synthetic(3, 16, 2, 22, "val");
    }
};

const Corpus& corpus() {
    static Corpus c;
    return c;
}

}  // namespace

TEST_CASE("lr=0 leaves the parameters at their init") {
    ExperimentConfig cfg;
    cfg.epochs = 2;
    cfg.lr = 0.0f;
    cfg.seed = 5;
    cfg.track_train_metrics = false;
    TrainResult r = train(cfg, corpus().train, corpus().val);
    ModelParams init = init_params(5, 2);
    for (std::size_t l = 0; l < init.layers.size(); ++l) {
        CHECK(r.params.layers[l].filters.values == init.layers[l].filters.values);
        CHECK(r.params.layers[l].bias.values == init.layers[l].bias.values);
    }
}

TEST_CASE("training is deterministic per config") {
    ExperimentConfig cfg;
    cfg.epochs = 2;
    cfg.lr = 1e-3f;
    cfg.seed = 17;
    TrainResult a = train(cfg, corpus().train, corpus().val);
    TrainResult b = train(cfg, corpus().train, corpus().val);
    CHECK(metrics_csv_string(a.history) == metrics_csv_string(b.history));
    for (std::size_t l = 0; l < a.params.layers.size(); ++l)
        CHECK(a.params.layers[l].filters.values == b.params.layers[l].filters.values);
}

TEST_CASE("loss decreases over the first epochs at a small lr") {
    ExperimentConfig cfg;
    cfg.epochs = 2;
    cfg.lr = 5e-4f;
    cfg.seed = 7;
    TrainResult r = train(cfg, corpus().train, corpus().val);
    double loss0 = -1.0, loss1 = -1.0;
    for (const MetricsRow& row : r.history) {
        if (row.split == "train" && row.epoch == 0) loss0 = row.loss;
        if (row.split == "train" && row.epoch == 1) loss1 = row.loss;
    }
    REQUIRE(loss0 >= 0.0);
    REQUIRE(loss1 >= 0.0);
    CHECK(loss1 <= loss0);
}

TEST_CASE("history layout: one val row per epoch, variant named") {
    ExperimentConfig cfg;
    cfg.epochs = 3;
    cfg.lr = 1e-3f;
    cfg.variant = LossVariant::iel_heat(DiffusionConfig{0.1f, 2, 1.0f});
    cfg.track_train_metrics = false;
    TrainResult r = train(cfg, corpus().train, corpus().val);
    int val_rows = 0;
    for (const MetricsRow& row : r.history)
        if (row.split == "val") {
            ++val_rows;
            CHECK(row.variant == "iel-heat");
        }
    CHECK(val_rows == 3);
}

TEST_CASE("evaluation is variant-independent for trained parameters") {
    ExperimentConfig cfg;
    cfg.epochs = 1;
    cfg.lr = 1e-3f;
    TrainResult r = train(cfg, corpus().train, corpus().val);

    MetricsRecord plain = evaluate(r.params, corpus().val, LossVariant::plain());
    MetricsRecord iel =
        evaluate(r.params, corpus().val, LossVariant::iel_heat(DiffusionConfig{0.1f, 10, 1.0f}));
    MetricsRecord curve = evaluate(r.params, corpus().val, LossVariant::curve_iel({}));
    CHECK(plain.mean_dice == iel.mean_dice);
    CHECK(plain.loss == iel.loss);
    CHECK(plain.mean_dice == curve.mean_dice);
    CHECK(plain.loss == curve.loss);

    MetricsRecord fel =
        evaluate(r.params, corpus().val, LossVariant::fel_heat(DiffusionConfig{0.1f, 10, 1.0f}));
    CHECK(fel.loss != plain.loss);  // forward layers stay on at eval time

    Dataset empty;
    CHECK_THROWS_AS(evaluate(r.params, empty, LossVariant::plain()), std::invalid_argument);
}

TEST_CASE("penalty variants train without blowing up") {
    for (LossVariant v : {LossVariant::grad_penalty(1.0f), LossVariant::weight_decay(0.1f)}) {
        ExperimentConfig cfg;
        cfg.epochs = 1;
        cfg.lr = 1e-3f;
        cfg.variant = v;
        cfg.track_train_metrics = false;
        TrainResult r = train(cfg, corpus().train, corpus().val);
        CHECK(r.history.size() >= 1);
        for (const auto& l : r.params.layers) CHECK(l.filters.all_finite());
    }
}

TEST_CASE("config validation") {
    ExperimentConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.epochs = 1;
    cfg.batch = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
