#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pae/rng.hpp"

namespace pae {

/// Dense GF(2) matrix; entries stored as 0/1 bytes, arithmetic is explicit XOR.
class BitMatrix {
  public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols);
    BitMatrix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits);

    static BitMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::uint8_t& at(std::size_t r, std::size_t c) { return bits_[r * cols_ + c]; }
    std::uint8_t at(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c]; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }

    bool operator==(const BitMatrix& other) const = default;

    /// row vector (length rows()) times this matrix, over GF(2)
    std::vector<std::uint8_t> encode_row(std::span<const std::uint8_t> u) const;

    std::size_t rank() const;

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Standard Kronecker product: block (i,j) of the result is a[i,j] * b.
BitMatrix kronecker(const BitMatrix& a, const BitMatrix& b);

/// (n, k) linear block code given by a full-row-rank generator matrix.
struct LinearCodeSpec {
    BitMatrix generator;  // k x n

    std::size_t n() const { return generator.cols(); }
    std::size_t k() const { return generator.rows(); }
    double rate() const { return static_cast<double>(k()) / static_cast<double>(n()); }

    static LinearCodeSpec from_generator(BitMatrix g);  // validates rank
    std::vector<std::uint8_t> encode(std::span<const std::uint8_t> message) const;
};

// canned component codes
LinearCodeSpec hamming74();
LinearCodeSpec single_parity_check(std::size_t n);  // (n, n-1)
LinearCodeSpec repetition(std::size_t n);           // (n, 1)
LinearCodeSpec identity_code(std::size_t n);        // (n, n)
std::optional<LinearCodeSpec> named_component_code(const std::string& name);

/// Iterated product of M >= 1 component codes; parameters multiply and the
/// generator is the Kronecker product of the component generators.
struct ProductCodeSpec {
    std::vector<LinearCodeSpec> components;

    std::size_t n() const;
    std::size_t k() const;
    double rate() const;
    BitMatrix generator() const;
};

struct ProductParams {
    std::size_t n = 0;
    std::size_t k = 0;
    double rate = 0.0;
    std::optional<std::size_t> min_distance;  // exhaustive, only when k <= 20
};

ProductParams product_params(const std::vector<LinearCodeSpec>& components);

/// 2D product encoding: reshape the k1*k2 message to k2 x k1, encode rows
/// with c1, then columns with c2. Returns the n2 x n1 code matrix.
BitMatrix product_encode(std::span<const std::uint8_t> message, const LinearCodeSpec& c1, const LinearCodeSpec& c2);

// ---- polar codes -----------------------------------------------------------

struct PolarConstructionRecord {
    double design_snr_db = 0.0;
    std::uint64_t trials = 0;
    std::vector<double> bit_channel_ber;  // size N, genie-aided estimates
};

struct PolarSpec {
    std::size_t mother_length = 0;              // N = 2^m0
    std::size_t block_length = 0;               // n <= N after puncturing
    std::size_t dimension = 0;                  // k
    std::vector<std::size_t> info_set;          // sorted, size k
    std::vector<std::size_t> puncture_pattern;  // sorted coded positions, size N - n
    PolarConstructionRecord construction;
};

/// Uniformly random (N-n)-subset of coded positions, sorted, fixed by seed.
std::vector<std::size_t> random_puncture(std::size_t mother_length, std::size_t block_length, std::uint64_t seed);

/// x = u * F^{(x)m} over GF(2), F = [[1,0],[1,1]] (natural order, in place
/// butterfly). Self-inverse.
std::vector<std::uint8_t> polar_transform(std::vector<std::uint8_t> u);

/// Mother-domain coded bits before puncturing/mapping (frozen bits zero).
std::vector<std::uint8_t> polar_encode_bits(std::span<const std::uint8_t> info_bits, const PolarSpec& spec);

/// BPSK symbols of the punctured codeword: surviving coded bits mapped with
/// 0 -> +1, 1 -> -1 (so llr = 2y/sigma^2 is log p0/p1).
std::vector<double> polar_encode(std::span<const std::uint8_t> info_bits, const PolarSpec& spec);

/// Successive cancellation on mother-domain LLRs (length N, zeros pre-filled
/// at punctured positions). Exact boxplus f in stable form, frozen bits
/// decided 0. Returns the k info bits.
std::vector<std::uint8_t> polar_sc_decode(std::span<const double> llrs, const PolarSpec& spec);

/// Genie-aided Monte-Carlo bit-channel BER estimates at design_snr with the
/// puncture pattern applied.
std::vector<double> polar_bit_channel_ber(std::size_t mother_length, std::span<const std::size_t> puncture_pattern,
                                          double design_snr_db, std::uint64_t trials, Rng& rng);

/// Pick the k bit-channels with the smallest estimated BERs (ties broken by
/// smaller index). Returns the sorted information set.
std::vector<std::size_t> polar_construct(std::size_t mother_length, std::size_t dimension, double design_snr_db,
                                         std::uint64_t trials, std::uint64_t seed,
                                         std::span<const std::size_t> puncture_pattern = {});

/// Full pipeline: mother length 2^ceil(log2 n), random puncturing, genie
/// construction on the punctured channel.
PolarSpec make_polar_spec(std::size_t block_length, std::size_t dimension, double design_snr_db, std::uint64_t trials,
                          std::uint64_t seed);

/// Expand length-n channel LLRs into the mother domain with zeros at
/// punctured positions.
std::vector<double> expand_punctured_llrs(std::span<const double> llrs_n, const PolarSpec& spec);

// ---- reference decoders / curves -------------------------------------------

/// Exhaustive minimum-Euclidean-distance decoding. `encode` maps a message
/// (LSB-first bits of the message index) to its transmitted symbols. Ties
/// resolve to the smallest message index. Requires k <= 16.
std::vector<std::uint8_t> ml_decode_bruteforce(
    std::span<const double> received, std::size_t message_bits,
    const std::function<std::vector<double>(std::span<const std::uint8_t>)>& encode);

/// Theoretical uncoded BPSK bit error rate Q(1/sigma).
double uncoded_bpsk_ber(double snr_db);

/// Standard Gaussian tail probability.
double q_function(double x);

}  // namespace pae
