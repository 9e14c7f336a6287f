#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pae/autodiff.hpp"
#include "pae/nn.hpp"
#include "pae/rng.hpp"
#include "pae/tensor.hpp"

namespace pae {

struct MlpConfig {
    std::size_t hidden_count = 0;
    std::size_t hidden_width = 0;
    bool operator==(const MlpConfig&) const = default;
};

/// Static description of a 2D product autoencoder: two component dimensions,
/// I decoder iterations (one network pair each), feature size F, and the
/// network shapes. Overall n = n1*n2, k = k1*k2, rate k/n.
struct ProductAeSpec {
    std::size_t n1 = 0, k1 = 0;
    std::size_t n2 = 0, k2 = 0;
    std::size_t iterations = 1;    // I >= 1
    std::size_t feature_size = 1;  // F >= 1
    MlpConfig encoder1_net;
    MlpConfig encoder2_net;
    MlpConfig decoder_net;       // pairs 1..I-1
    MlpConfig last_decoder_net;  // pair I (may differ)
    bool normalize_after_first_encoder = false;

    std::size_t n() const { return n1 * n2; }
    std::size_t k() const { return k1 * k2; }
    double rate() const { return static_cast<double>(k()) / static_cast<double>(n()); }

    void validate() const;
    bool operator==(const ProductAeSpec&) const = default;
};

/// Input/output widths of the networks at decoding iteration i (1-based).
struct DecoderIoSize {
    std::size_t d2_in = 0, d2_out = 0;
    std::size_t d1_in = 0, d1_out = 0;
    bool operator==(const DecoderIoSize&) const = default;
};

/// The exact shape table implied by the decoder's reshape/concatenate
/// algebra, including the I == 1 special case.
std::vector<DecoderIoSize> decoder_io_sizes(const ProductAeSpec& spec);

/// Two encoder networks and 2I decoder networks with the shape contract of
/// decoder_io_sizes. Immutable during inference; training owns mutation.
class ProductAeModel {
  public:
    /// Freshly initialized model; weights drawn from per-network substreams
    /// of rng. A null rng zero-initializes (for checkpoint loading).
    explicit ProductAeModel(ProductAeSpec spec, Rng* rng = nullptr);

    const ProductAeSpec& spec() const { return spec_; }

    Mlp& encoder1() { return encoder1_; }
    Mlp& encoder2() { return encoder2_; }
    const Mlp& encoder1() const { return encoder1_; }
    const Mlp& encoder2() const { return encoder2_; }

    /// Decoder networks for iteration i in [0, I).
    Mlp& decoder2(std::size_t i) { return decoder2_.at(i); }
    Mlp& decoder1(std::size_t i) { return decoder1_.at(i); }
    const Mlp& decoder2(std::size_t i) const { return decoder2_.at(i); }
    const Mlp& decoder1(std::size_t i) const { return decoder1_.at(i); }

    /// Canonical parameter order: E1 layers (weights then bias each), E2,
    /// then D2^(1), D1^(1), ..., D2^(I), D1^(I).
    std::vector<Var> encoder_parameters() const;
    std::vector<Var> decoder_parameters() const;
    std::vector<Var> decoder_pair_parameters(std::size_t i) const;
    std::vector<Var> all_parameters() const;
    std::vector<Var> encoder_weight_parameters() const;

    std::vector<Tensor> parameter_values() const;
    void set_parameter_values(const std::vector<Tensor>& values);

    ProductAeModel clone() const;

  private:
    ProductAeSpec spec_;
    Mlp encoder1_, encoder2_;
    std::vector<Mlp> decoder2_, decoder1_;
};

/// {0,1} -> {-1,+1} via 2u - 1. Rejects non-binary entries.
Tensor bits_to_symbols(const Tensor& bits);

/// Elementwise threshold at 0 (ties decode to 0).
Tensor hard_decision(const Tensor& logits);

/// Alg. 2: reshape (B, k2, k1), E1 on the k1 axis, E2 on the k2 axis,
/// canonical (B, n1, n2) layout, flatten, per-codeword power normalization.
Var encode(const ProductAeModel& model, const Tensor& message_bits);
Tensor encode_tensor(const ProductAeModel& model, const Tensor& message_bits);

/// Alg. 3: I iterations of (D2, D1) with channel-output injection, feature
/// size F and soft-information subtraction. Returns raw logits (B, k1*k2);
/// the loss applies the sigmoid.
Var decode(const ProductAeModel& model, const Var& noisy);
Tensor decode_tensor(const ProductAeModel& model, const Tensor& noisy);

/// Per-codeword Eq.-style normalization of a plain (B, n) tensor.
Tensor power_normalize_tensor(const Tensor& codewords);

/// Uniform random message batch (B, k) of {0,1}.
Tensor random_messages(std::size_t batch, std::size_t width, Rng& rng);

}  // namespace pae
