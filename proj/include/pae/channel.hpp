#pragma once

#include <cstdint>
#include <vector>

#include "pae/autodiff.hpp"
#include "pae/rng.hpp"
#include "pae/tensor.hpp"

namespace pae {

enum class ChannelKind { Awgn, RayleighFast };

/// Training/test SNR policy: a single point, or per-codeword draws uniform
/// in dB over [lo, hi]. A range with lo == hi collapses to the point policy
/// (bit-identical noise).
class SnrPolicy {
  public:
    static SnrPolicy point(double db);
    static SnrPolicy range(double lo_db, double hi_db);

    bool is_point() const { return point_; }
    double point_db() const { return lo_; }
    double lo_db() const { return lo_; }
    double hi_db() const { return hi_; }

    bool operator==(const SnrPolicy& other) const = default;

  private:
    SnrPolicy(bool point, double lo, double hi) : point_(point), lo_(lo), hi_(hi) {}
    bool point_ = true;
    double lo_ = 0.0;
    double hi_ = 0.0;
};

/// Channel identity: identical (spec, seed) implies identical realizations.
struct ChannelSpec {
    ChannelKind kind = ChannelKind::Awgn;
    SnrPolicy snr = SnrPolicy::point(0.0);
    std::uint64_t seed = 0;
};

/// SNR = 1/sigma^2, so sigma = 10^(-snr_db/20).
double snr_db_to_sigma(double snr_db);

/// One sampled channel realization for a (batch x block) transmission.
/// Fading gains and noise are constants with respect to the autodiff graph.
struct ChannelDraw {
    Tensor gain;                     // empty for AWGN; else per-symbol Rayleigh amplitudes
    Tensor noise;                    // additive term, sigma already applied
    std::vector<double> row_snr_db;  // realized per-codeword SNR
    std::vector<double> row_sigma;   // realized per-codeword noise std dev

    bool has_gain() const { return !gain.empty(); }
};

/// Draw order is fixed for reproducibility: per-row SNRs first (row 0 first,
/// only under a true range), then Rayleigh gains row-major (two normals per
/// symbol), then noise row-major.
ChannelDraw draw_channel(ChannelKind kind, const SnrPolicy& policy, std::size_t batch, std::size_t block, Rng& rng);

Tensor apply_channel(const Tensor& codewords, const ChannelDraw& draw);
Var apply_channel(const Var& codewords, const ChannelDraw& draw);

/// y = c + n with n i.i.d. zero-mean Gaussian per the policy.
Tensor awgn_transmit(const Tensor& codewords, const SnrPolicy& policy, Rng& rng);

/// y = a o c + n with one independent Rayleigh amplitude per coded symbol
/// (fast fading, Omega = E[a^2] = 1), then AWGN per the policy.
Tensor rayleigh_transmit(const Tensor& codewords, const SnrPolicy& policy, Rng& rng);

/// Fresh Rng from spec.seed each call: same spec + batch -> identical output.
Tensor transmit(const ChannelSpec& spec, const Tensor& codewords);

const char* channel_kind_name(ChannelKind kind);

}  // namespace pae
