#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "pae/baselines.hpp"
#include "pae/errors.hpp"
#include "pae/eval.hpp"

using namespace pae;

namespace {

ProductAeSpec identity_spec() {
    ProductAeSpec s;
    s.n1 = s.k1 = 4;
    s.n2 = s.k2 = 4;
    s.iterations = 1;
    s.feature_size = 1;
    s.encoder1_net = s.encoder2_net = {0, 0};
    s.decoder_net = s.last_decoder_net = {0, 0};
    return s;
}

// affine identity stack: a perfect rate-1 codec over BPSK
ProductAeModel identity_model() {
    ProductAeModel model(identity_spec(), nullptr);
    auto set_identity = [](Mlp& net) {
        auto params = net.parameters();
        Tensor w({net.output_dim(), net.input_dim()});
        for (std::size_t i = 0; i < net.output_dim(); ++i) w.at(i, i) = 1.0;
        params[0]->value = w;
    };
    set_identity(model.encoder1());
    set_identity(model.encoder2());
    set_identity(model.decoder2(0));
    set_identity(model.decoder1(0));
    return model;
}

}  // namespace

TEST_CASE("error stats arithmetic") {
    ErrorStats s;
    s.trials = 2000;
    s.bit_errors = 60;
    s.block_errors = 50;
    s.message_bits = 10;
    CHECK(s.ber() == doctest::Approx(60.0 / 20000.0));
    CHECK(s.bler() == doctest::Approx(50.0 / 2000.0));
    CHECK(s.bler() >= s.ber());
    CHECK(s.ber_half_width() == doctest::Approx(1.96 * std::sqrt(s.ber() * (1 - s.ber()) / 20000.0)));
    CHECK(s.bler_half_width() > s.ber_half_width());
}

TEST_CASE("a perfect codec on a noiseless channel measures zero error") {
    const ProductAeModel model = identity_model();
    const NeuralCodec codec(model);
    CHECK(codec.message_bits() == 16);
    CHECK(codec.coded_symbols() == 16);
    const StopRule stop{10, 500};
    const auto result =
        monte_carlo_sweep(codec, ChannelKind::Awgn, {std::numeric_limits<double>::infinity()}, stop, 7);
    REQUIRE(result.points.size() == 1);
    CHECK(result.points[0].stats.ber() == 0.0);
    CHECK(result.points[0].stats.bler() == 0.0);
    CHECK(result.points[0].capped);  // the error target is unreachable
    CHECK(result.points[0].stats.trials == 500);
}

TEST_CASE("uncoded BPSK at 0 dB matches the Q-function oracle") {
    const UncodedBpskCodec codec(100);
    const StopRule stop{1000000, 10000};  // 10^6 bits, cap-bound
    const auto result = monte_carlo_sweep(codec, ChannelKind::Awgn, {0.0}, stop, 11);
    const double ber = result.points[0].stats.ber();
    const double expect = uncoded_bpsk_ber(0.0);
    const double se = std::sqrt(expect * (1 - expect) / 1e6);
    INFO("ber ", ber, " expect ", expect, " se ", se);
    CHECK(std::fabs(ber - expect) < 3.0 * se);
}

TEST_CASE("measured BER is non-increasing across the grid (within noise)") {
    const UncodedBpskCodec codec(50);
    const StopRule stop{400, 20000};
    const auto result = monte_carlo_sweep(codec, ChannelKind::Awgn, {0.0, 1.0, 2.0, 3.0, 4.0}, stop, 13);
    for (std::size_t i = 1; i < result.points.size(); ++i) {
        const auto& prev = result.points[i - 1].stats;
        const auto& cur = result.points[i].stats;
        CHECK(cur.ber() <= prev.ber() + 3.0 * (prev.ber_half_width() + cur.ber_half_width()) / 1.96);
    }
}

TEST_CASE("stop rule semantics") {
    const UncodedBpskCodec codec(20);
    SUBCASE("error target reached before the cap") {
        const auto result = monte_carlo_sweep(codec, ChannelKind::Awgn, {0.0}, StopRule{50, 100000}, 17);
        CHECK_FALSE(result.points[0].capped);
        CHECK(result.points[0].stats.block_errors >= 50);
        CHECK(result.points[0].stats.trials < 100000);
    }
    SUBCASE("cap reached first is flagged") {
        const auto result = monte_carlo_sweep(codec, ChannelKind::Awgn, {12.0}, StopRule{1000, 300}, 17);
        CHECK(result.points[0].capped);
        CHECK(result.points[0].stats.trials == 300);
    }
}

TEST_CASE("sweeps are deterministic given seed and shard count") {
    const UncodedBpskCodec codec(32);
    const StopRule stop{100, 5000};
    const auto a = monte_carlo_sweep(codec, ChannelKind::RayleighFast, {2.0, 4.0}, stop, 19, 2);
    const auto b = monte_carlo_sweep(codec, ChannelKind::RayleighFast, {2.0, 4.0}, stop, 19, 2);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].stats.trials == b.points[i].stats.trials);
        CHECK(a.points[i].stats.bit_errors == b.points[i].stats.bit_errors);
        CHECK(a.points[i].stats.block_errors == b.points[i].stats.block_errors);
    }
}

TEST_CASE("sweep rejects bad grids") {
    const UncodedBpskCodec codec(8);
    CHECK_THROWS_AS(monte_carlo_sweep(codec, ChannelKind::Awgn, {}, StopRule{}, 1), ConfigError);
    CHECK_THROWS_AS(monte_carlo_sweep(codec, ChannelKind::Awgn, {1.0, 1.0}, StopRule{}, 1), ConfigError);
    CHECK_THROWS_AS(monte_carlo_sweep(codec, ChannelKind::Awgn, {2.0, 1.0}, StopRule{}, 1), ConfigError);
}

TEST_CASE("polar codec round-trips inside a sweep") {
    PolarSpec spec;
    spec.mother_length = 8;
    spec.block_length = 8;
    spec.dimension = 4;
    spec.info_set = {3, 5, 6, 7};
    const PolarCodec codec(spec);
    const auto result = monte_carlo_sweep(codec, ChannelKind::Awgn, {8.0}, StopRule{100, 4000}, 23);
    // at 8 dB the (8,4) polar code under SC is essentially error free
    CHECK(result.points[0].stats.ber() < 0.01);
}

TEST_CASE("fading degrades a real codec at equal SNR") {
    const ProductAeModel model = identity_model();
    const NeuralCodec codec(model);
    const StopRule stop{300, 20000};
    const std::vector<double> grid{2.0, 4.0};
    const auto awgn = monte_carlo_sweep(codec, ChannelKind::Awgn, grid, stop, 29);
    const auto fading = monte_carlo_sweep(codec, ChannelKind::RayleighFast, grid, stop, 29);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double se =
            (awgn.points[i].stats.ber_half_width() + fading.points[i].stats.ber_half_width()) / 1.96;
        CHECK(fading.points[i].stats.ber() >= awgn.points[i].stats.ber() - 3.0 * se);
        CHECK(fading.points[i].stats.ber() > awgn.points[i].stats.ber());
    }
}

TEST_CASE("robustness driver") {
    const ProductAeModel model = identity_model();
    TrainConfig cfg = TrainConfig::with_encoder_snr(2.0);
    cfg.batch_size = 64;
    cfg.t_dec = 1;
    cfg.t_enc = 1;
    cfg.seed = 31;
    const StopRule stop{50, 2000};
    const std::vector<double> grid{2.0, 4.0};

    SUBCASE("test channel equal to train channel reduces to a plain sweep") {
        const auto result = robustness_experiment(model, cfg, ChannelKind::Awgn, ChannelKind::Awgn, grid, stop, 37,
                                                  RobustnessOptions{});
        const auto direct = monte_carlo_sweep(NeuralCodec(model), ChannelKind::Awgn, grid, stop, 37);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(result.base_on_train_channel.points[i].stats.bit_errors == direct.points[i].stats.bit_errors);
            CHECK(result.base_on_test_channel.points[i].stats.bit_errors == direct.points[i].stats.bit_errors);
        }
        CHECK_FALSE(result.tuned_on_train_channel.has_value());
    }
    SUBCASE("wider-SNR fine-tune arm produces both tuned sweeps") {
        RobustnessOptions opts;
        opts.finetune_epochs = 1;
        const auto result = robustness_experiment(model, cfg, ChannelKind::Awgn, ChannelKind::RayleighFast, grid,
                                                  stop, 37, opts);
        REQUIRE(result.tuned_on_train_channel.has_value());
        REQUIRE(result.tuned_on_test_channel.has_value());
        CHECK(result.tuned_on_train_channel->points.size() == grid.size());
        // the default recipe shifts the encoder point up by 2.75 dB
        CHECK(default_robustness_encoder_snr(cfg.encoder_snr).point_db() == doctest::Approx(4.75));
        const SnrPolicy dec = default_robustness_decoder_snr(SnrPolicy::point(4.75));
        CHECK(dec.lo_db() == doctest::Approx(1.75));
        CHECK(dec.hi_db() == doctest::Approx(6.75));
    }
}

TEST_CASE("adaptivity driver") {
    const ProductAeModel model = identity_model();
    TrainConfig cfg = TrainConfig::with_encoder_snr(2.0);
    cfg.batch_size = 64;
    cfg.seed = 41;
    const StopRule stop{50, 2000};
    const std::vector<double> grid{2.0, 4.0};

    SUBCASE("epochs must be at least one") {
        CHECK_THROWS_AS(adaptivity_experiment(model, cfg, ChannelKind::Awgn, ChannelKind::RayleighFast, 0, grid,
                                              stop, 43),
                        ConfigError);
    }
    SUBCASE("zero-iteration epochs adapt nothing: before equals after bit-exactly") {
        cfg.t_dec = 0;
        cfg.t_enc = 0;
        const auto result =
            adaptivity_experiment(model, cfg, ChannelKind::Awgn, ChannelKind::RayleighFast, 1, grid, stop, 43);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(result.before_on_new_channel.points[i].stats.bit_errors ==
                  result.after_on_new_channel.points[i].stats.bit_errors);
            CHECK(result.before_on_new_channel.points[i].stats.block_errors ==
                  result.after_on_new_channel.points[i].stats.block_errors);
        }
        const auto ref = model.parameter_values();
        const auto adapted = result.adapted_model.parameter_values();
        REQUIRE(ref.size() == adapted.size());
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(ref[i].values() == adapted[i].values());
    }
    SUBCASE("a full retraining reference run is producible with a fresh model") {
        Rng rng(47);
        ProductAeSpec spec = identity_spec();
        spec.encoder1_net = spec.encoder2_net = {1, 8};
        spec.decoder_net = spec.last_decoder_net = {1, 8};
        ProductAeModel fresh(spec, &rng);
        TrainConfig retrain = cfg;
        retrain.t_dec = 2;
        retrain.t_enc = 1;
        retrain.epochs = 1;
        Trainer trainer(fresh, retrain, ChannelKind::RayleighFast);
        trainer.train();
        const auto sweep = monte_carlo_sweep(NeuralCodec(fresh), ChannelKind::RayleighFast, grid, stop, 47);
        CHECK(sweep.points.size() == grid.size());
    }
}
