#include "pae/channel.hpp"

#include <cmath>

#include "pae/errors.hpp"

namespace pae {

SnrPolicy SnrPolicy::point(double db) { return SnrPolicy(true, db, db); }

SnrPolicy SnrPolicy::range(double lo_db, double hi_db) {
    if (!(lo_db <= hi_db)) throw ConfigError("SnrPolicy::range requires lo <= hi");
    if (lo_db == hi_db) return point(lo_db);
    return SnrPolicy(false, lo_db, hi_db);
}

double snr_db_to_sigma(double snr_db) { return std::pow(10.0, -snr_db / 20.0); }

ChannelDraw draw_channel(ChannelKind kind, const SnrPolicy& policy, std::size_t batch, std::size_t block, Rng& rng) {
    ChannelDraw draw;
    draw.row_snr_db.resize(batch);
    draw.row_sigma.resize(batch);
    if (policy.is_point()) {
        const double sigma = snr_db_to_sigma(policy.point_db());
        for (std::size_t r = 0; r < batch; ++r) {
            draw.row_snr_db[r] = policy.point_db();
            draw.row_sigma[r] = sigma;
        }
    } else {
        for (std::size_t r = 0; r < batch; ++r) {
            draw.row_snr_db[r] = rng.uniform(policy.lo_db(), policy.hi_db());
            draw.row_sigma[r] = snr_db_to_sigma(draw.row_snr_db[r]);
        }
    }

    if (kind == ChannelKind::RayleighFast) {
        // amplitude of a complex Gaussian with per-component variance 1/2,
        // giving E[a^2] = 1
        draw.gain = Tensor({batch, block});
        const double comp_sigma = std::sqrt(0.5);
        for (std::size_t i = 0, e = batch * block; i < e; ++i) {
            const double u = rng.normal(0.0, comp_sigma);
            const double v = rng.normal(0.0, comp_sigma);
            draw.gain[i] = std::sqrt(u * u + v * v);
        }
    }

    draw.noise = Tensor({batch, block});
    for (std::size_t r = 0; r < batch; ++r) {
        const double sigma = draw.row_sigma[r];
        double* row = draw.noise.data() + r * block;
        for (std::size_t i = 0; i < block; ++i) row[i] = sigma * rng.normal();
    }
    return draw;
}

Tensor apply_channel(const Tensor& codewords, const ChannelDraw& draw) {
    if (codewords.shape() != draw.noise.shape()) throw ShapeError("apply_channel: draw shape mismatch");
    Tensor y(codewords.shape());
    if (draw.has_gain()) {
        for (std::size_t i = 0, e = y.size(); i < e; ++i) y[i] = draw.gain[i] * codewords[i] + draw.noise[i];
    } else {
        for (std::size_t i = 0, e = y.size(); i < e; ++i) y[i] = codewords[i] + draw.noise[i];
    }
    return y;
}

Var apply_channel(const Var& codewords, const ChannelDraw& draw) {
    Var y = codewords;
    if (draw.has_gain()) y = cmul(y, draw.gain);
    return cadd(y, draw.noise);
}

Tensor awgn_transmit(const Tensor& codewords, const SnrPolicy& policy, Rng& rng) {
    if (codewords.rank() != 2) throw ShapeError("awgn_transmit: expected (batch, block) codewords");
    return apply_channel(codewords, draw_channel(ChannelKind::Awgn, policy, codewords.dim(0), codewords.dim(1), rng));
}

Tensor rayleigh_transmit(const Tensor& codewords, const SnrPolicy& policy, Rng& rng) {
    if (codewords.rank() != 2) throw ShapeError("rayleigh_transmit: expected (batch, block) codewords");
    return apply_channel(codewords,
                         draw_channel(ChannelKind::RayleighFast, policy, codewords.dim(0), codewords.dim(1), rng));
}

Tensor transmit(const ChannelSpec& spec, const Tensor& codewords) {
    Rng rng(spec.seed);
    return spec.kind == ChannelKind::Awgn ? awgn_transmit(codewords, spec.snr, rng)
                                          : rayleigh_transmit(codewords, spec.snr, rng);
}

const char* channel_kind_name(ChannelKind kind) {
    return kind == ChannelKind::Awgn ? "awgn" : "rayleigh";
}

}  // namespace pae
