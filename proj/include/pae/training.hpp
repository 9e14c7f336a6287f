#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pae/channel.hpp"
#include "pae/codec.hpp"
#include "pae/optim.hpp"

namespace pae {

enum class ScheduleScheme { Joint, SchemeI, SchemeII, SchemeIII };
enum class BatchPolicy { FreshPerIteration, FreshPerEpoch };

/// Large-batch fine-tuning plan: L sub-batches of B_s samples form one
/// virtual batch per optimizer step.
struct FineTunePlan {
    std::size_t sub_batch_count = 1;  // L
    std::size_t sub_batch_size = 0;   // B_s; 0 means "use batch_size"
    std::size_t epochs = 0;
};

struct ValidationConfig {
    std::vector<double> snr_grid_db;
    std::size_t words = 0;  // 0 disables validation
};

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 5000;
    std::size_t t_enc = 100;
    std::size_t t_dec = 500;
    SnrPolicy encoder_snr = SnrPolicy::point(3.0);
    SnrPolicy decoder_snr = SnrPolicy::range(0.5, 4.0);
    double lr_enc = 2e-4;
    double lr_dec = 2e-4;
    ScheduleScheme scheme = ScheduleScheme::Joint;
    std::vector<std::size_t> t_dec_per_pair;  // schemes I-III; size 1 broadcasts
    std::size_t t_dec_start = 0;              // scheme II/III prefix schedule
    std::size_t t_dec_end = 0;                // scheme III suffix schedule
    BatchPolicy batch_policy = BatchPolicy::FreshPerIteration;
    FineTunePlan finetune;
    double l2_coefficient = 0.0;  // encoder schedule only
    ValidationConfig validation;
    double checkpoint_snr_db = 3.0;
    std::uint64_t seed = 1;
    bool reset_adam_on_finetune = false;

    /// Paper-style derived policies: encoder trains at a single point gamma_e,
    /// decoder on the range [gamma_e - 2.5, gamma_e + 1] dB.
    static TrainConfig with_encoder_snr(double gamma_e_db);
};

struct ValidationPoint {
    double snr_db = 0.0;
    double ber = 0.0;
    double bler = 0.0;
};

/// Per-parameter Adam snapshot in canonical model order.
struct OptimizerSnapshot {
    std::vector<AdamState> slots;
};

struct Checkpoint {
    std::size_t epoch = 0;
    std::vector<Tensor> parameters;  // canonical order
    std::optional<OptimizerSnapshot> optimizer;
    std::vector<ValidationPoint> validation;
    std::uint64_t config_fingerprint = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    std::size_t decoder_iterations = 0;
    std::size_t encoder_iterations = 0;
    std::vector<ValidationPoint> validation;
    double wall_seconds = 0.0;  // in-memory only, never serialized
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    TrainHistory history;
    std::vector<Checkpoint> checkpoints;
};

/// Monte-Carlo BER/BLER on a frozen validation set: messages and channel
/// realizations depend only on (seed, grid point), so per-epoch metrics are
/// paired.
std::vector<ValidationPoint> validate(const ProductAeModel& model, const std::vector<double>& snr_grid_db,
                                      std::size_t words, ChannelKind channel, std::uint64_t seed);

/// Checkpoint minimizing validation BER at the criterion SNR; ties break to
/// the earliest epoch. Throws if the SNR is absent from the stored grid.
const Checkpoint& select_checkpoint(const std::vector<Checkpoint>& checkpoints, double criterion_snr_db);

/// Runs the alternating decoder/encoder schedules over a model it does not
/// own. Encoder and decoder have separate Adam optimizers; per-parameter
/// moments and step counts survive across train() and fine_tune() calls.
class Trainer {
  public:
    Trainer(ProductAeModel& model, TrainConfig cfg, ChannelKind channel);

    /// cfg.epochs epochs of the configured scheme. The initial model is
    /// checkpointed as epoch 0 on the first call.
    TrainResult train();

    /// Large-batch fine-tuning: every iteration accumulates gradients over
    /// plan L sub-batches of size B_s before one optimizer step.
    TrainResult fine_tune(std::size_t epochs, std::size_t sub_batch_count, std::size_t sub_batch_size);
    TrainResult fine_tune();  // plan from cfg.finetune

    ProductAeModel& model() { return model_; }
    const TrainConfig& config() const { return cfg_; }
    ChannelKind channel() const { return channel_; }

    Adam& encoder_optimizer() { return enc_opt_; }
    Adam& decoder_optimizer() { return dec_opt_; }

    OptimizerSnapshot optimizer_snapshot() const;
    void restore_optimizer(const OptimizerSnapshot& snapshot);

    void set_config_fingerprint(std::uint64_t fp) { fingerprint_ = fp; }
    /// Called after every epoch's checkpoint is built (CLI file sink).
    void set_checkpoint_sink(std::function<void(const Checkpoint&)> sink) { sink_ = std::move(sink); }
    /// Keep Adam moments in every in-memory checkpoint (default: final only).
    void set_capture_optimizer_in_checkpoints(bool v) { capture_optimizer_ = v; }

  private:
    struct EpochStats {
        double loss_sum = 0.0;
        std::size_t iterations = 0;
        std::size_t decoder_iterations = 0;
        std::size_t encoder_iterations = 0;
    };

    TrainResult run_epochs(std::size_t count, bool large_batch, std::size_t sub_batch_count,
                           std::size_t sub_batch_size);
    void run_epoch_schedules(std::size_t epoch, bool large_batch, std::size_t sub_batch_count,
                             std::size_t sub_batch_size, EpochStats& stats);
    double run_iteration(const std::vector<Var>& step_params, Adam& opt, const SnrPolicy& snr, bool encoder_side,
                         const Tensor& messages, Rng& noise_rng, std::size_t epoch, const char* schedule,
                         std::size_t iteration);
    double run_virtual_iteration(const std::vector<Var>& step_params, Adam& opt, const SnrPolicy& snr,
                                 bool encoder_side, const Tensor& messages, std::size_t sub_batch_count,
                                 std::size_t sub_batch_size, Rng& noise_rng, std::size_t epoch, const char* schedule,
                                 std::size_t iteration);
    Var forward_loss(const Tensor& messages, const SnrPolicy& snr, bool encoder_side, Rng& noise_rng);
    Checkpoint make_checkpoint(std::size_t epoch, bool with_optimizer);
    std::vector<std::size_t> per_pair_iterations() const;

    ProductAeModel& model_;
    TrainConfig cfg_;
    ChannelKind channel_;
    std::vector<Var> enc_params_, dec_params_, all_params_;
    Adam enc_opt_, dec_opt_;
    std::uint64_t fingerprint_ = 0;
    std::function<void(const Checkpoint&)> sink_;
    bool capture_optimizer_ = false;
    std::size_t next_epoch_ = 0;
    bool initial_checkpoint_emitted_ = false;
};

}  // namespace pae
