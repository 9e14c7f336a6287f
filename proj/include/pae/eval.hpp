#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pae/baselines.hpp"
#include "pae/channel.hpp"
#include "pae/codec.hpp"
#include "pae/training.hpp"

namespace pae {

/// Monte-Carlo error tallies for one SNR point.
struct ErrorStats {
    std::uint64_t trials = 0;  // blocks simulated
    std::uint64_t bit_errors = 0;
    std::uint64_t block_errors = 0;
    std::size_t message_bits = 0;  // k

    double ber() const;
    double bler() const;
    /// 95% normal-approximation half-widths.
    double ber_half_width() const;
    double bler_half_width() const;
};

struct SweepPoint {
    double snr_db = 0.0;
    ErrorStats stats;
    bool capped = false;  // max-trial cap hit before the error target
};

struct SweepResult {
    std::string codec_name;
    ChannelKind channel = ChannelKind::Awgn;
    std::uint64_t seed = 0;
    std::vector<SweepPoint> points;  // strictly increasing SNR
};

/// Per-point stopping rule: stop at min_block_errors, or flag the point as
/// capped once max_blocks have been simulated.
struct StopRule {
    std::uint64_t min_block_errors = 100;
    std::uint64_t max_blocks = 1'000'000;
};

/// Uniform encode/decode surface for sweeps. decode_batch receives the
/// realized per-row noise standard deviations (LLR-based decoders need them).
class Codec {
  public:
    virtual ~Codec() = default;
    virtual std::string name() const = 0;
    virtual std::size_t message_bits() const = 0;
    virtual std::size_t coded_symbols() const = 0;
    virtual Tensor encode_batch(const Tensor& messages) const = 0;
    virtual Tensor decode_batch(const Tensor& received, std::span<const double> row_sigma) const = 0;
};

class NeuralCodec final : public Codec {
  public:
    explicit NeuralCodec(const ProductAeModel& model) : model_(model) {}
    std::string name() const override;
    std::size_t message_bits() const override { return model_.spec().k(); }
    std::size_t coded_symbols() const override { return model_.spec().n(); }
    Tensor encode_batch(const Tensor& messages) const override { return encode_tensor(model_, messages); }
    Tensor decode_batch(const Tensor& received, std::span<const double>) const override;

  private:
    const ProductAeModel& model_;
};

class UncodedBpskCodec final : public Codec {
  public:
    explicit UncodedBpskCodec(std::size_t bits_per_block) : k_(bits_per_block) {}
    std::string name() const override { return "uncoded-bpsk"; }
    std::size_t message_bits() const override { return k_; }
    std::size_t coded_symbols() const override { return k_; }
    Tensor encode_batch(const Tensor& messages) const override { return bits_to_symbols(messages); }
    Tensor decode_batch(const Tensor& received, std::span<const double>) const override;

  private:
    std::size_t k_;
};

/// Polar code under SC decoding; channel LLRs are 2y/sigma^2 with zeros at
/// punctured positions. AWGN only (no CSI model for fading).
class PolarCodec final : public Codec {
  public:
    explicit PolarCodec(PolarSpec spec) : spec_(std::move(spec)) {}
    std::string name() const override;
    std::size_t message_bits() const override { return spec_.dimension; }
    std::size_t coded_symbols() const override { return spec_.block_length; }
    Tensor encode_batch(const Tensor& messages) const override;
    Tensor decode_batch(const Tensor& received, std::span<const double> row_sigma) const override;
    const PolarSpec& spec() const { return spec_; }

  private:
    PolarSpec spec_;
};

/// Brute-force maximum-likelihood decoding of any enumerable encoder
/// (k <= 16); the reference decoder for tiny codes.
class MlCodec final : public Codec {
  public:
    MlCodec(std::string name, std::size_t message_bits,
            std::function<std::vector<double>(std::span<const std::uint8_t>)> encode_fn);
    std::string name() const override { return name_; }
    std::size_t message_bits() const override { return k_; }
    std::size_t coded_symbols() const override { return n_; }
    Tensor encode_batch(const Tensor& messages) const override;
    Tensor decode_batch(const Tensor& received, std::span<const double>) const override;

  private:
    std::string name_;
    std::size_t k_;
    std::size_t n_;
    std::function<std::vector<double>(std::span<const std::uint8_t>)> encode_fn_;
};

/// Classical product code with ML decoding (k <= 16).
MlCodec make_product_ml_codec(const LinearCodeSpec& c1, const LinearCodeSpec& c2, const std::string& name);

/// Simulate each grid point until the stop rule fires. Deterministic given
/// (seed, shard count); shards run sequentially over independent substreams
/// with fixed per-shard quotas, so aggregation is order-independent.
SweepResult monte_carlo_sweep(const Codec& codec, ChannelKind channel, const std::vector<double>& snr_grid_db,
                              const StopRule& stop, std::uint64_t seed, std::size_t shards = 1);

// ---- experiment drivers -----------------------------------------------------

struct ExperimentPlan {
    enum class Kind { Sweep, Robustness, Adaptivity };
    Kind kind = Kind::Sweep;
    ChannelKind train_channel = ChannelKind::Awgn;
    ChannelKind test_channel = ChannelKind::RayleighFast;
    std::size_t finetune_epochs = 0;  // adaptivity requires >= 1
    std::vector<double> snr_grid_db;
    StopRule stop;
    std::uint64_t eval_seed = 1;
};

struct RobustnessOptions {
    std::size_t finetune_epochs = 0;  // 0 skips the wider-SNR fine-tune arm
    std::optional<SnrPolicy> tuned_encoder_snr;
    std::optional<SnrPolicy> tuned_decoder_snr;
};

/// Wider-SNR recipe applied when the options leave the policies unset:
/// encoder point moves up 2.75 dB, decoder range becomes [g-3, g+2] around
/// the new point.
SnrPolicy default_robustness_encoder_snr(const SnrPolicy& base_encoder);
SnrPolicy default_robustness_decoder_snr(const SnrPolicy& tuned_encoder);

struct RobustnessResult {
    SweepResult base_on_train_channel;
    SweepResult base_on_test_channel;
    std::optional<SweepResult> tuned_on_train_channel;
    std::optional<SweepResult> tuned_on_test_channel;
};

/// Evaluates the unmodified model on its training channel and on a different
/// test channel; optionally fine-tunes a copy on the training channel with
/// wider SNRs and re-evaluates both.
RobustnessResult robustness_experiment(const ProductAeModel& model, const TrainConfig& cfg, ChannelKind train_channel,
                                       ChannelKind test_channel, const std::vector<double>& snr_grid_db,
                                       const StopRule& stop, std::uint64_t eval_seed, const RobustnessOptions& opts);

struct AdaptivityResult {
    SweepResult before_on_new_channel;
    SweepResult after_on_new_channel;
    SweepResult after_on_old_channel;
    ProductAeModel adapted_model;
};

/// Fine-tunes a copy of the model on the new channel for the given epochs
/// (>= 1) and reports performance on both channels.
AdaptivityResult adaptivity_experiment(const ProductAeModel& model, const TrainConfig& cfg, ChannelKind old_channel,
                                       ChannelKind new_channel, std::size_t epochs,
                                       const std::vector<double>& snr_grid_db, const StopRule& stop,
                                       std::uint64_t eval_seed);

}  // namespace pae
