#include "pae/eval.hpp"

#include <algorithm>
#include <cmath>

#include "pae/errors.hpp"

namespace pae {

namespace {

constexpr std::size_t kSweepChunk = 256;

double half_width_95(double p, double n) {
    if (n <= 0.0) return 0.0;
    return 1.96 * std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
}

std::vector<std::uint8_t> row_bits(const Tensor& t, std::size_t row) {
    const std::size_t width = t.dim(1);
    std::vector<std::uint8_t> out(width);
    const double* p = t.data() + row * width;
    for (std::size_t i = 0; i < width; ++i) out[i] = p[i] != 0.0 ? 1 : 0;
    return out;
}

}  // namespace

double ErrorStats::ber() const {
    return trials == 0 ? 0.0
                       : static_cast<double>(bit_errors) /
                             (static_cast<double>(trials) * static_cast<double>(message_bits));
}

double ErrorStats::bler() const {
    return trials == 0 ? 0.0 : static_cast<double>(block_errors) / static_cast<double>(trials);
}

double ErrorStats::ber_half_width() const {
    return half_width_95(ber(), static_cast<double>(trials) * static_cast<double>(message_bits));
}

double ErrorStats::bler_half_width() const { return half_width_95(bler(), static_cast<double>(trials)); }

std::string NeuralCodec::name() const {
    const ProductAeSpec& s = model_.spec();
    return "productae-(" + std::to_string(s.n1) + "," + std::to_string(s.k1) + ")x(" + std::to_string(s.n2) + "," +
           std::to_string(s.k2) + ")";
}

Tensor NeuralCodec::decode_batch(const Tensor& received, std::span<const double>) const {
    return hard_decision(decode_tensor(model_, received));
}

Tensor UncodedBpskCodec::decode_batch(const Tensor& received, std::span<const double>) const {
    return hard_decision(received);
}

std::string PolarCodec::name() const {
    return "polar-(" + std::to_string(spec_.block_length) + "," + std::to_string(spec_.dimension) + ")-sc";
}

Tensor PolarCodec::encode_batch(const Tensor& messages) const {
    const std::size_t batch = messages.dim(0);
    Tensor out({batch, spec_.block_length});
    for (std::size_t r = 0; r < batch; ++r) {
        const auto symbols = polar_encode(row_bits(messages, r), spec_);
        double* dst = out.data() + r * spec_.block_length;
        for (std::size_t i = 0; i < symbols.size(); ++i) dst[i] = symbols[i];
    }
    return out;
}

Tensor PolarCodec::decode_batch(const Tensor& received, std::span<const double> row_sigma) const {
    const std::size_t batch = received.dim(0);
    if (row_sigma.size() != batch) throw ShapeError("PolarCodec::decode_batch: row_sigma size mismatch");
    Tensor out({batch, spec_.dimension});
    std::vector<double> llrs(spec_.block_length);
    for (std::size_t r = 0; r < batch; ++r) {
        const double sigma = row_sigma[r];
        if (sigma <= 0.0) throw UsageError("PolarCodec::decode_batch: needs a positive noise sigma for LLRs");
        const double scale = 2.0 / (sigma * sigma);
        const double* y = received.data() + r * spec_.block_length;
        for (std::size_t i = 0; i < spec_.block_length; ++i) llrs[i] = scale * y[i];
        const auto full = expand_punctured_llrs(llrs, spec_);
        const auto info = polar_sc_decode(full, spec_);
        double* dst = out.data() + r * spec_.dimension;
        for (std::size_t i = 0; i < info.size(); ++i) dst[i] = info[i];
    }
    return out;
}

MlCodec::MlCodec(std::string name, std::size_t message_bits,
                 std::function<std::vector<double>(std::span<const std::uint8_t>)> encode_fn)
    : name_(std::move(name)), k_(message_bits), encode_fn_(std::move(encode_fn)) {
    if (k_ > 16) throw ConfigError("MlCodec: k must be <= 16 for exhaustive decoding");
    const std::vector<std::uint8_t> zero(k_, 0);
    n_ = encode_fn_(zero).size();
}

Tensor MlCodec::encode_batch(const Tensor& messages) const {
    const std::size_t batch = messages.dim(0);
    Tensor out({batch, n_});
    for (std::size_t r = 0; r < batch; ++r) {
        const auto symbols = encode_fn_(row_bits(messages, r));
        double* dst = out.data() + r * n_;
        for (std::size_t i = 0; i < n_; ++i) dst[i] = symbols[i];
    }
    return out;
}

Tensor MlCodec::decode_batch(const Tensor& received, std::span<const double>) const {
    const std::size_t batch = received.dim(0);
    Tensor out({batch, k_});
    for (std::size_t r = 0; r < batch; ++r) {
        const std::span<const double> y(received.data() + r * n_, n_);
        const auto decided = ml_decode_bruteforce(y, k_, encode_fn_);
        double* dst = out.data() + r * k_;
        for (std::size_t i = 0; i < k_; ++i) dst[i] = decided[i];
    }
    return out;
}

MlCodec make_product_ml_codec(const LinearCodeSpec& c1, const LinearCodeSpec& c2, const std::string& name) {
    const std::size_t k = c1.k() * c2.k();
    if (k > 16) throw ConfigError("product ML baseline: k1*k2 must be <= 16 for exhaustive decoding");
    auto encode_fn = [c1, c2](std::span<const std::uint8_t> message) {
        const BitMatrix coded = product_encode(message, c1, c2);
        std::vector<double> symbols(coded.bits().size());
        for (std::size_t i = 0; i < symbols.size(); ++i) symbols[i] = 2.0 * coded.bits()[i] - 1.0;
        return symbols;
    };
    return MlCodec(name, k, std::move(encode_fn));
}

SweepResult monte_carlo_sweep(const Codec& codec, ChannelKind channel, const std::vector<double>& snr_grid_db,
                              const StopRule& stop, std::uint64_t seed, std::size_t shards) {
    if (snr_grid_db.empty()) throw ConfigError("monte_carlo_sweep: SNR grid must be non-empty");
    for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
        if (!(snr_grid_db[i] > snr_grid_db[i - 1]))
            throw ConfigError("monte_carlo_sweep: SNR grid must be strictly increasing");
    if (shards == 0) throw ConfigError("monte_carlo_sweep: shard count must be positive");
    if (stop.max_blocks == 0) throw ConfigError("monte_carlo_sweep: max_blocks must be positive");

    const std::size_t k = codec.message_bits();
    const std::size_t n = codec.coded_symbols();
    const Rng root(seed);

    SweepResult result;
    result.codec_name = codec.name();
    result.channel = channel;
    result.seed = seed;

    for (std::size_t pi = 0; pi < snr_grid_db.size(); ++pi) {
        const SnrPolicy point = SnrPolicy::point(snr_grid_db[pi]);
        ErrorStats stats;
        stats.message_bits = k;
        for (std::size_t shard = 0; shard < shards; ++shard) {
            Rng msgs = root.substream("sweep.msgs", pi * shards + shard);
            Rng noise = root.substream("sweep.noise", pi * shards + shard);
            // fixed per-shard quotas keep sharded totals order-independent
            const std::uint64_t quota = stop.max_blocks / shards + (shard < stop.max_blocks % shards ? 1 : 0);
            const std::uint64_t error_target = (stop.min_block_errors + shards - 1) / shards;
            std::uint64_t done = 0, shard_block_errors = 0;
            while (done < quota && shard_block_errors < error_target) {
                const std::size_t chunk = static_cast<std::size_t>(std::min<std::uint64_t>(kSweepChunk, quota - done));
                const Tensor messages = random_messages(chunk, k, msgs);
                const Tensor coded = codec.encode_batch(messages);
                const ChannelDraw draw = draw_channel(channel, point, chunk, n, noise);
                const Tensor received = apply_channel(coded, draw);
                const Tensor decided = codec.decode_batch(received, draw.row_sigma);
                for (std::size_t r = 0; r < chunk; ++r) {
                    std::uint64_t row_errors = 0;
                    const double* d = decided.data() + r * k;
                    const double* u = messages.data() + r * k;
                    for (std::size_t i = 0; i < k; ++i) row_errors += d[i] != u[i];
                    stats.bit_errors += row_errors;
                    if (row_errors) {
                        stats.block_errors += 1;
                        shard_block_errors += 1;
                    }
                }
                done += chunk;
            }
            stats.trials += done;
        }
        SweepPoint sp;
        sp.snr_db = snr_grid_db[pi];
        sp.capped = stats.block_errors < stop.min_block_errors;
        sp.stats = stats;
        result.points.push_back(sp);
    }
    return result;
}

SnrPolicy default_robustness_encoder_snr(const SnrPolicy& base_encoder) {
    const double base = base_encoder.is_point() ? base_encoder.point_db()
                                                : 0.5 * (base_encoder.lo_db() + base_encoder.hi_db());
    return SnrPolicy::point(base + 2.75);
}

SnrPolicy default_robustness_decoder_snr(const SnrPolicy& tuned_encoder) {
    const double g = tuned_encoder.is_point() ? tuned_encoder.point_db()
                                              : 0.5 * (tuned_encoder.lo_db() + tuned_encoder.hi_db());
    return SnrPolicy::range(g - 3.0, g + 2.0);
}

RobustnessResult robustness_experiment(const ProductAeModel& model, const TrainConfig& cfg, ChannelKind train_channel,
                                       ChannelKind test_channel, const std::vector<double>& snr_grid_db,
                                       const StopRule& stop, std::uint64_t eval_seed, const RobustnessOptions& opts) {
    RobustnessResult result;
    {
        const NeuralCodec codec(model);
        result.base_on_train_channel = monte_carlo_sweep(codec, train_channel, snr_grid_db, stop, eval_seed);
        result.base_on_test_channel = monte_carlo_sweep(codec, test_channel, snr_grid_db, stop, eval_seed);
    }
    if (opts.finetune_epochs > 0) {
        ProductAeModel tuned = model.clone();
        TrainConfig tuned_cfg = cfg;
        tuned_cfg.encoder_snr = opts.tuned_encoder_snr.value_or(default_robustness_encoder_snr(cfg.encoder_snr));
        tuned_cfg.decoder_snr =
            opts.tuned_decoder_snr.value_or(default_robustness_decoder_snr(tuned_cfg.encoder_snr));
        tuned_cfg.epochs = opts.finetune_epochs;
        Trainer trainer(tuned, tuned_cfg, train_channel);
        trainer.train();
        const NeuralCodec codec(tuned);
        result.tuned_on_train_channel = monte_carlo_sweep(codec, train_channel, snr_grid_db, stop, eval_seed);
        result.tuned_on_test_channel = monte_carlo_sweep(codec, test_channel, snr_grid_db, stop, eval_seed);
    }
    return result;
}

AdaptivityResult adaptivity_experiment(const ProductAeModel& model, const TrainConfig& cfg, ChannelKind old_channel,
                                       ChannelKind new_channel, std::size_t epochs,
                                       const std::vector<double>& snr_grid_db, const StopRule& stop,
                                       std::uint64_t eval_seed) {
    if (epochs < 1) throw ConfigError("adaptivity_experiment: fine-tune epochs must be >= 1");
    SweepResult before = monte_carlo_sweep(NeuralCodec(model), new_channel, snr_grid_db, stop, eval_seed);

    ProductAeModel adapted = model.clone();
    TrainConfig adapt_cfg = cfg;
    adapt_cfg.epochs = epochs;
    Trainer trainer(adapted, adapt_cfg, new_channel);
    trainer.train();

    const NeuralCodec codec(adapted);
    SweepResult after_new = monte_carlo_sweep(codec, new_channel, snr_grid_db, stop, eval_seed);
    SweepResult after_old = monte_carlo_sweep(codec, old_channel, snr_grid_db, stop, eval_seed);
    return AdaptivityResult{std::move(before), std::move(after_new), std::move(after_old), std::move(adapted)};
}

}  // namespace pae
