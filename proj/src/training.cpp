#include "pae/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "pae/errors.hpp"

namespace pae {

namespace {

constexpr std::size_t kValidationChunk = 256;

Tensor slice_rows(const Tensor& t, std::size_t first, std::size_t count) {
    const std::size_t width = t.size() / t.dim(0);
    Shape shape = t.shape();
    shape[0] = count;
    std::vector<double> data(t.data() + first * width, t.data() + (first + count) * width);
    return Tensor(std::move(shape), std::move(data));
}

void tally_errors(const Tensor& decided, const Tensor& reference, std::uint64_t& bit_errors,
                  std::uint64_t& block_errors) {
    const std::size_t batch = decided.dim(0);
    const std::size_t width = decided.dim(1);
    for (std::size_t r = 0; r < batch; ++r) {
        std::uint64_t row_errors = 0;
        const double* d = decided.data() + r * width;
        const double* u = reference.data() + r * width;
        for (std::size_t i = 0; i < width; ++i) row_errors += d[i] != u[i];
        bit_errors += row_errors;
        block_errors += row_errors != 0;
    }
}

}  // namespace

TrainConfig TrainConfig::with_encoder_snr(double gamma_e_db) {
    TrainConfig cfg;
    cfg.encoder_snr = SnrPolicy::point(gamma_e_db);
    cfg.decoder_snr = SnrPolicy::range(gamma_e_db - 2.5, gamma_e_db + 1.0);
    return cfg;
}

std::vector<ValidationPoint> validate(const ProductAeModel& model, const std::vector<double>& snr_grid_db,
                                      std::size_t words, ChannelKind channel, std::uint64_t seed) {
    if (words == 0) throw ConfigError("validate: word budget must be >= 1");
    const std::size_t k = model.spec().k();
    const std::size_t n = model.spec().n();
    const Rng root(seed);
    std::vector<ValidationPoint> out;
    out.reserve(snr_grid_db.size());
    for (std::size_t pi = 0; pi < snr_grid_db.size(); ++pi) {
        Rng msgs = root.substream("val.msgs", pi);
        Rng noise = root.substream("val.noise", pi);
        const SnrPolicy point = SnrPolicy::point(snr_grid_db[pi]);
        std::uint64_t bit_errors = 0, block_errors = 0;
        std::size_t remaining = words;
        while (remaining > 0) {
            const std::size_t b = std::min(kValidationChunk, remaining);
            const Tensor batch = random_messages(b, k, msgs);
            const Tensor coded = encode_tensor(model, batch);
            const ChannelDraw draw = draw_channel(channel, point, b, n, noise);
            const Tensor received = apply_channel(coded, draw);
            const Tensor decided = hard_decision(decode_tensor(model, received));
            tally_errors(decided, batch, bit_errors, block_errors);
            remaining -= b;
        }
        ValidationPoint vp;
        vp.snr_db = snr_grid_db[pi];
        vp.ber = static_cast<double>(bit_errors) / (static_cast<double>(words) * static_cast<double>(k));
        vp.bler = static_cast<double>(block_errors) / static_cast<double>(words);
        out.push_back(vp);
    }
    return out;
}

const Checkpoint& select_checkpoint(const std::vector<Checkpoint>& checkpoints, double criterion_snr_db) {
    if (checkpoints.empty()) throw UsageError("select_checkpoint: no checkpoints");
    const Checkpoint* best = nullptr;
    double best_ber = 0.0;
    for (const Checkpoint& cp : checkpoints) {
        const ValidationPoint* found = nullptr;
        for (const ValidationPoint& vp : cp.validation)
            if (std::fabs(vp.snr_db - criterion_snr_db) < 1e-9) found = &vp;
        if (!found)
            throw ConfigError("select_checkpoint: criterion SNR " + std::to_string(criterion_snr_db) +
                              " dB absent from the validation grid");
        if (!best || found->ber < best_ber) {  // strict: ties keep the earliest epoch
            best = &cp;
            best_ber = found->ber;
        }
    }
    return *best;
}

Trainer::Trainer(ProductAeModel& model, TrainConfig cfg, ChannelKind channel)
    : model_(model),
      cfg_(std::move(cfg)),
      channel_(channel),
      enc_params_(model.encoder_parameters()),
      dec_params_(model.decoder_parameters()),
      all_params_(model.all_parameters()),
      enc_opt_(enc_params_, AdamConfig{cfg_.lr_enc, 0.9, 0.999, 1e-8}),
      dec_opt_(dec_params_, AdamConfig{cfg_.lr_dec, 0.9, 0.999, 1e-8}) {
    if (cfg_.batch_size == 0) throw ConfigError("TrainConfig: batch size must be positive");
}

std::vector<std::size_t> Trainer::per_pair_iterations() const {
    const std::size_t pairs = model_.spec().iterations;
    if (cfg_.t_dec_per_pair.empty())
        throw ConfigError("multi-schedule training requires t_dec_per_pair (one count, or one per decoder pair)");
    if (cfg_.t_dec_per_pair.size() == 1) return std::vector<std::size_t>(pairs, cfg_.t_dec_per_pair[0]);
    if (cfg_.t_dec_per_pair.size() != pairs)
        throw ConfigError("t_dec_per_pair must have exactly one entry per decoder pair (" + std::to_string(pairs) +
                          ")");
    return cfg_.t_dec_per_pair;
}

Var Trainer::forward_loss(const Tensor& messages, const SnrPolicy& snr, bool encoder_side, Rng& noise_rng) {
    const Var coded = encode(model_, messages);
    const ChannelDraw draw = draw_channel(channel_, snr, messages.dim(0), model_.spec().n(), noise_rng);
    const Var received = apply_channel(coded, draw);
    const Var logits = decode(model_, received);
    Var loss = bce_with_logits(logits, messages);
    if (encoder_side && cfg_.l2_coefficient > 0.0) {
        Var penalty;
        for (const Var& w : model_.encoder_weight_parameters()) {
            Var term = sum_squares(w);
            penalty = penalty ? add(penalty, term) : term;
        }
        loss = add(loss, scale(penalty, cfg_.l2_coefficient));
    }
    return loss;
}

double Trainer::run_iteration(const std::vector<Var>& step_params, Adam& opt, const SnrPolicy& snr, bool encoder_side,
                              const Tensor& messages, Rng& noise_rng, std::size_t epoch, const char* schedule,
                              std::size_t iteration) {
    const Var loss = forward_loss(messages, snr, encoder_side, noise_rng);
    const double value = loss->value[0];
    if (!std::isfinite(value))
        throw TrainingError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", " + schedule +
                            " iteration " + std::to_string(iteration));
    zero_grads(all_params_);
    backward(loss);
    opt.step(step_params);
    return value;
}

double Trainer::run_virtual_iteration(const std::vector<Var>& step_params, Adam& opt, const SnrPolicy& snr,
                                      bool encoder_side, const Tensor& messages, std::size_t sub_batch_count,
                                      std::size_t sub_batch_size, Rng& noise_rng, std::size_t epoch,
                                      const char* schedule, std::size_t iteration) {
    GradientAccumulator acc(all_params_, sub_batch_count, sub_batch_size);
    double loss_sum = 0.0;
    for (std::size_t l = 0; l < sub_batch_count; ++l) {
        const Tensor sub = slice_rows(messages, l * sub_batch_size, sub_batch_size);
        const Var loss = forward_loss(sub, snr, encoder_side, noise_rng);
        const double value = loss->value[0];
        if (!std::isfinite(value))
            throw TrainingError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", " +
                                schedule + " iteration " + std::to_string(iteration) + ", sub-batch " +
                                std::to_string(l));
        loss_sum += value;
        acc.accumulate(loss, sub_batch_size);
    }
    acc.publish_and_reset();
    opt.step(step_params);
    return loss_sum / static_cast<double>(sub_batch_count);
}

void Trainer::run_epoch_schedules(std::size_t epoch, bool large_batch, std::size_t sub_batch_count,
                                  std::size_t sub_batch_size, EpochStats& stats) {
    Rng msgs_rng = Rng(cfg_.seed).substream("train.msgs", epoch);
    Rng noise_rng = Rng(cfg_.seed).substream("train.noise", epoch);
    const std::size_t k = model_.spec().k();
    const std::size_t batch_rows = large_batch ? sub_batch_count * sub_batch_size : cfg_.batch_size;

    Tensor epoch_batch;
    if (cfg_.batch_policy == BatchPolicy::FreshPerEpoch) epoch_batch = random_messages(batch_rows, k, msgs_rng);
    auto next_batch = [&]() -> Tensor {
        if (cfg_.batch_policy == BatchPolicy::FreshPerEpoch) return epoch_batch;
        return random_messages(batch_rows, k, msgs_rng);
    };

    auto run_block = [&](const std::vector<Var>& step_params, Adam& opt, const SnrPolicy& snr, bool encoder_side,
                         std::size_t count, const char* schedule) {
        for (std::size_t it = 1; it <= count; ++it) {
            const Tensor messages = next_batch();
            const double loss =
                large_batch
                    ? run_virtual_iteration(step_params, opt, snr, encoder_side, messages, sub_batch_count,
                                            sub_batch_size, noise_rng, epoch, schedule, it)
                    : run_iteration(step_params, opt, snr, encoder_side, messages, noise_rng, epoch, schedule, it);
            stats.loss_sum += loss;
            stats.iterations += 1;
            (encoder_side ? stats.encoder_iterations : stats.decoder_iterations) += 1;
        }
    };

    switch (cfg_.scheme) {
        case ScheduleScheme::Joint:
            run_block(dec_params_, dec_opt_, cfg_.decoder_snr, false, cfg_.t_dec, "decoder");
            break;
        case ScheduleScheme::SchemeI:
        case ScheduleScheme::SchemeII:
        case ScheduleScheme::SchemeIII: {
            if (cfg_.scheme != ScheduleScheme::SchemeI)
                run_block(dec_params_, dec_opt_, cfg_.decoder_snr, false, cfg_.t_dec_start, "decoder(full-start)");
            const auto per_pair = per_pair_iterations();
            for (std::size_t i = 0; i < per_pair.size(); ++i) {
                const std::string name = "decoder(pair " + std::to_string(i + 1) + ")";
                run_block(model_.decoder_pair_parameters(i), dec_opt_, cfg_.decoder_snr, false, per_pair[i],
                          name.c_str());
            }
            if (cfg_.scheme == ScheduleScheme::SchemeIII)
                run_block(dec_params_, dec_opt_, cfg_.decoder_snr, false, cfg_.t_dec_end, "decoder(full-end)");
            break;
        }
    }
    run_block(enc_params_, enc_opt_, cfg_.encoder_snr, true, cfg_.t_enc, "encoder");
}

Checkpoint Trainer::make_checkpoint(std::size_t epoch, bool with_optimizer) {
    Checkpoint cp;
    cp.epoch = epoch;
    cp.parameters = model_.parameter_values();
    if (with_optimizer) cp.optimizer = optimizer_snapshot();
    if (cfg_.validation.words > 0 && !cfg_.validation.snr_grid_db.empty())
        cp.validation = validate(model_, cfg_.validation.snr_grid_db, cfg_.validation.words, channel_, cfg_.seed);
    cp.config_fingerprint = fingerprint_;
    return cp;
}

TrainResult Trainer::run_epochs(std::size_t count, bool large_batch, std::size_t sub_batch_count,
                                std::size_t sub_batch_size) {
    TrainResult result;
    auto emit = [&](Checkpoint cp, EpochRecord rec) {
        rec.validation = cp.validation;
        result.history.epochs.push_back(std::move(rec));
        if (sink_) sink_(cp);
        result.checkpoints.push_back(std::move(cp));
    };

    if (!initial_checkpoint_emitted_) {
        initial_checkpoint_emitted_ = true;
        const auto t0 = std::chrono::steady_clock::now();
        Checkpoint cp = make_checkpoint(0, capture_optimizer_ || count == 0);
        EpochRecord rec;
        rec.epoch = 0;
        rec.mean_loss = std::numeric_limits<double>::quiet_NaN();
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        emit(std::move(cp), std::move(rec));
        next_epoch_ = 1;
    }

    for (std::size_t e = 0; e < count; ++e) {
        const std::size_t epoch = next_epoch_++;
        const auto t0 = std::chrono::steady_clock::now();
        EpochStats stats;
        run_epoch_schedules(epoch, large_batch, sub_batch_count, sub_batch_size, stats);
        Checkpoint cp = make_checkpoint(epoch, capture_optimizer_ || e + 1 == count);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.mean_loss = stats.iterations ? stats.loss_sum / static_cast<double>(stats.iterations)
                                         : std::numeric_limits<double>::quiet_NaN();
        rec.decoder_iterations = stats.decoder_iterations;
        rec.encoder_iterations = stats.encoder_iterations;
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        emit(std::move(cp), std::move(rec));
    }
    return result;
}

TrainResult Trainer::train() { return run_epochs(cfg_.epochs, false, 1, cfg_.batch_size); }

TrainResult Trainer::fine_tune(std::size_t epochs, std::size_t sub_batch_count, std::size_t sub_batch_size) {
    if (sub_batch_count == 0 || sub_batch_size == 0)
        throw ConfigError("fine_tune: sub-batch plan must be positive (L, B_s)");
    if (cfg_.reset_adam_on_finetune) {
        enc_opt_.reset_state();
        dec_opt_.reset_state();
    }
    return run_epochs(epochs, true, sub_batch_count, sub_batch_size);
}

TrainResult Trainer::fine_tune() {
    const std::size_t bs = cfg_.finetune.sub_batch_size ? cfg_.finetune.sub_batch_size : cfg_.batch_size;
    return fine_tune(cfg_.finetune.epochs, cfg_.finetune.sub_batch_count, bs);
}

OptimizerSnapshot Trainer::optimizer_snapshot() const {
    OptimizerSnapshot snap;
    snap.slots.reserve(all_params_.size());
    for (const Var& p : enc_params_) snap.slots.push_back(enc_opt_.state_for(p));
    for (const Var& p : dec_params_) snap.slots.push_back(dec_opt_.state_for(p));
    return snap;
}

void Trainer::restore_optimizer(const OptimizerSnapshot& snapshot) {
    if (snapshot.slots.size() != all_params_.size())
        throw ShapeError("restore_optimizer: slot count mismatch");
    std::size_t i = 0;
    for (const Var& p : enc_params_) enc_opt_.state_for(p) = snapshot.slots[i++];
    for (const Var& p : dec_params_) dec_opt_.state_for(p) = snapshot.slots[i++];
}

}  // namespace pae
