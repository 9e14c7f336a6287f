#include "pae/codec.hpp"

#include <cmath>

#include "pae/errors.hpp"

namespace pae {

void ProductAeSpec::validate() const {
    if (n1 == 0 || k1 == 0 || n2 == 0 || k2 == 0) throw ConfigError("ProductAeSpec: dims must be positive");
    if (k1 > n1 || k2 > n2) throw ConfigError("ProductAeSpec: component dimension exceeds blocklength");
    if (iterations < 1) throw ConfigError("ProductAeSpec: iterations must be >= 1");
    if (feature_size < 1) throw ConfigError("ProductAeSpec: feature size must be >= 1");
}

std::vector<DecoderIoSize> decoder_io_sizes(const ProductAeSpec& spec) {
    spec.validate();
    const std::size_t n1 = spec.n1, n2 = spec.n2, k1 = spec.k1, k2 = spec.k2;
    const std::size_t F = spec.feature_size, I = spec.iterations;
    std::vector<DecoderIoSize> table(I);
    for (std::size_t i = 1; i <= I; ++i) {
        DecoderIoSize& io = table[i - 1];
        if (i < I) {
            io.d2_in = (i == 1) ? n2 : (F + 1) * n2;
            io.d2_out = F * n2;
            io.d1_in = (F + 1) * n1;
            io.d1_out = F * n1;
        } else {
            io.d2_in = (I == 1) ? n2 : (F + 1) * n2;
            io.d2_out = F * k2;
            io.d1_in = F * n1;
            io.d1_out = k1;
        }
    }
    return table;
}

ProductAeModel::ProductAeModel(ProductAeSpec spec, Rng* rng) : spec_(std::move(spec)) {
    spec_.validate();
    const auto table = decoder_io_sizes(spec_);

    auto net_rng = [&](std::size_t ordinal) {
        return rng ? std::make_unique<Rng>(rng->substream("init", ordinal)) : nullptr;
    };

    std::size_t ordinal = 0;
    {
        auto r = net_rng(ordinal++);
        encoder1_ = Mlp(spec_.k1, spec_.n1, spec_.encoder1_net.hidden_count, spec_.encoder1_net.hidden_width, r.get(),
                        "E1");
    }
    {
        auto r = net_rng(ordinal++);
        encoder2_ = Mlp(spec_.k2, spec_.n2, spec_.encoder2_net.hidden_count, spec_.encoder2_net.hidden_width, r.get(),
                        "E2");
    }
    for (std::size_t i = 0; i < spec_.iterations; ++i) {
        const MlpConfig& cfg = (i + 1 == spec_.iterations) ? spec_.last_decoder_net : spec_.decoder_net;
        const DecoderIoSize& io = table[i];
        {
            auto r = net_rng(ordinal++);
            decoder2_.emplace_back(io.d2_in, io.d2_out, cfg.hidden_count, cfg.hidden_width, r.get(),
                                   "D2^(" + std::to_string(i + 1) + ")");
        }
        {
            auto r = net_rng(ordinal++);
            decoder1_.emplace_back(io.d1_in, io.d1_out, cfg.hidden_count, cfg.hidden_width, r.get(),
                                   "D1^(" + std::to_string(i + 1) + ")");
        }
    }
}

std::vector<Var> ProductAeModel::encoder_parameters() const {
    std::vector<Var> out = encoder1_.parameters();
    const auto e2 = encoder2_.parameters();
    out.insert(out.end(), e2.begin(), e2.end());
    return out;
}

std::vector<Var> ProductAeModel::decoder_parameters() const {
    std::vector<Var> out;
    for (std::size_t i = 0; i < spec_.iterations; ++i) {
        const auto pair = decoder_pair_parameters(i);
        out.insert(out.end(), pair.begin(), pair.end());
    }
    return out;
}

std::vector<Var> ProductAeModel::decoder_pair_parameters(std::size_t i) const {
    std::vector<Var> out = decoder2_.at(i).parameters();
    const auto d1 = decoder1_.at(i).parameters();
    out.insert(out.end(), d1.begin(), d1.end());
    return out;
}

std::vector<Var> ProductAeModel::all_parameters() const {
    std::vector<Var> out = encoder_parameters();
    const auto dec = decoder_parameters();
    out.insert(out.end(), dec.begin(), dec.end());
    return out;
}

std::vector<Var> ProductAeModel::encoder_weight_parameters() const {
    std::vector<Var> out = encoder1_.weight_parameters();
    const auto e2 = encoder2_.weight_parameters();
    out.insert(out.end(), e2.begin(), e2.end());
    return out;
}

std::vector<Tensor> ProductAeModel::parameter_values() const {
    std::vector<Tensor> out;
    for (const Var& p : all_parameters()) out.push_back(p->value);
    return out;
}

void ProductAeModel::set_parameter_values(const std::vector<Tensor>& values) {
    const auto params = all_parameters();
    if (values.size() != params.size())
        throw ShapeError("set_parameter_values: expected " + std::to_string(params.size()) + " tensors, got " +
                         std::to_string(values.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->value.shape() != values[i].shape())
            throw ShapeError("set_parameter_values: shape mismatch at parameter " + std::to_string(i));
        params[i]->value = values[i];
    }
}

ProductAeModel ProductAeModel::clone() const {
    ProductAeModel copy(spec_, nullptr);
    copy.set_parameter_values(parameter_values());
    return copy;
}

Tensor bits_to_symbols(const Tensor& bits) {
    Tensor out(bits.shape());
    for (std::size_t i = 0, e = bits.size(); i < e; ++i) {
        const double b = bits[i];
        if (b != 0.0 && b != 1.0) throw UsageError("bits_to_symbols: entries must be exactly 0 or 1");
        out[i] = 2.0 * b - 1.0;
    }
    return out;
}

Tensor hard_decision(const Tensor& logits) {
    Tensor out(logits.shape());
    for (std::size_t i = 0, e = logits.size(); i < e; ++i) out[i] = logits[i] > 0.0 ? 1.0 : 0.0;
    return out;
}

Var encode(const ProductAeModel& model, const Tensor& message_bits) {
    const ProductAeSpec& s = model.spec();
    if (message_bits.rank() != 2 || message_bits.dim(1) != s.k())
        throw ShapeError("encode: expected (B, " + std::to_string(s.k()) + ") message batch, got " +
                         shape_to_string(message_bits.shape()));
    const std::size_t batch = message_bits.dim(0);

    Var x = constant(bits_to_symbols(message_bits));
    x = reshape(x, {batch, s.k2, s.k1});
    x = model.encoder1().forward(x);  // (B, k2, n1)
    if (s.normalize_after_first_encoder) x = power_normalize(x);
    x = permute(x, {0, 2, 1});        // (B, n1, k2)
    x = model.encoder2().forward(x);  // (B, n1, n2) -- n2 axis is E2's output
    x = reshape(x, {batch, s.n()});
    return power_normalize(x);
}

Tensor encode_tensor(const ProductAeModel& model, const Tensor& message_bits) {
    return encode(model, message_bits)->value;
}

Var decode(const ProductAeModel& model, const Var& noisy) {
    const ProductAeSpec& s = model.spec();
    const Tensor& yv = noisy->value;
    if (yv.rank() != 2 || yv.dim(1) != s.n())
        throw ShapeError("decode: expected (B, " + std::to_string(s.n()) + ") channel output, got " +
                         shape_to_string(yv.shape()));
    const std::size_t batch = yv.dim(0);
    const std::size_t n1 = s.n1, n2 = s.n2, k1 = s.k1, k2 = s.k2;
    const std::size_t F = s.feature_size, I = s.iterations;

    const Var y = reshape(noisy, {batch, n1, n2});
    Var y2;            // (B, F*n1, n2) soft output of the current D2
    Var y21_in;        // (B, n1, F*n2) increment fed forward to the next D2
    Var y22_in;        // D2 input with channel injection
    if (I == 1) {
        y22_in = y;
    } else {
        for (std::size_t i = 1; i <= I - 1; ++i) {
            if (i == 1) {
                y2 = reshape(model.decoder2(0).forward(y), {batch, F * n1, n2});
            } else {
                const Var y2_out = model.decoder2(i - 1).forward(y22_in);
                y2 = reshape(sub(y2_out, y21_in), {batch, F * n1, n2});
            }
            const Var y1_in = permute(concat(y, y2, 1), {0, 2, 1});
            const Var y1 = permute(model.decoder1(i - 1).forward(y1_in), {0, 2, 1});
            y21_in = reshape(sub(y1, y2), {batch, n1, F * n2});
            y22_in = concat(y, y21_in, 2);
        }
    }

    // last pair: D2 reduces to k2, D1 takes only the previous output
    Var out = reshape(model.decoder2(I - 1).forward(y22_in), {batch, F * n1, k2});
    out = model.decoder1(I - 1).forward(permute(out, {0, 2, 1}));  // (B, k2, k1)
    return reshape(out, {batch, k1 * k2});
}

Tensor decode_tensor(const ProductAeModel& model, const Tensor& noisy) {
    return decode(model, constant(noisy))->value;
}

Tensor power_normalize_tensor(const Tensor& codewords) {
    if (codewords.rank() < 2) throw ShapeError("power_normalize: expected a batch tensor (rank >= 2)");
    const std::size_t batch = codewords.dim(0);
    const std::size_t m = codewords.size() / batch;
    const double target = std::sqrt(static_cast<double>(m));
    Tensor out(codewords.shape());
    for (std::size_t r = 0; r < batch; ++r) {
        const double* src = codewords.data() + r * m;
        double ss = 0.0;
        for (std::size_t i = 0; i < m; ++i) ss += src[i] * src[i];
        const double norm = std::sqrt(ss);
        if (norm == 0.0)
            throw DegenerateInputError("power_normalize: zero-power input at batch row " + std::to_string(r));
        const double scale = target / norm;
        double* dst = out.data() + r * m;
        for (std::size_t i = 0; i < m; ++i) dst[i] = src[i] * scale;
    }
    return out;
}

Tensor random_messages(std::size_t batch, std::size_t width, Rng& rng) {
    Tensor out({batch, width});
    for (std::size_t i = 0, e = out.size(); i < e; ++i) out[i] = static_cast<double>(rng.bit());
    return out;
}

}  // namespace pae
