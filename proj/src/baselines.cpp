#include "pae/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "pae/channel.hpp"
#include "pae/errors.hpp"

namespace pae {

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits)
    : rows_(rows), cols_(cols), bits_(std::move(bits)) {
    if (bits_.size() != rows * cols) throw ShapeError("BitMatrix: data length does not match dimensions");
    for (std::uint8_t b : bits_)
        if (b > 1) throw UsageError("BitMatrix: entries must be 0 or 1");
}

BitMatrix BitMatrix::identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

std::vector<std::uint8_t> BitMatrix::encode_row(std::span<const std::uint8_t> u) const {
    if (u.size() != rows_) throw ShapeError("BitMatrix::encode_row: message length != generator rows");
    std::vector<std::uint8_t> out(cols_, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
        if (!u[r]) continue;
        const std::uint8_t* row = bits_.data() + r * cols_;
        for (std::size_t c = 0; c < cols_; ++c) out[c] ^= row[c];
    }
    return out;
}

std::size_t BitMatrix::rank() const {
    BitMatrix m = *this;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols_ && rank < rows_; ++col) {
        std::size_t pivot = rank;
        while (pivot < rows_ && !m.at(pivot, col)) ++pivot;
        if (pivot == rows_) continue;
        if (pivot != rank)
            for (std::size_t c = 0; c < cols_; ++c) std::swap(m.at(pivot, c), m.at(rank, c));
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r != rank && m.at(r, col))
                for (std::size_t c = 0; c < cols_; ++c) m.at(r, c) ^= m.at(rank, c);
        }
        ++rank;
    }
    return rank;
}

BitMatrix kronecker(const BitMatrix& a, const BitMatrix& b) {
    BitMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (!a.at(i, j)) continue;
            for (std::size_t r = 0; r < b.rows(); ++r)
                for (std::size_t c = 0; c < b.cols(); ++c)
                    out.at(i * b.rows() + r, j * b.cols() + c) = b.at(r, c);
        }
    return out;
}

LinearCodeSpec LinearCodeSpec::from_generator(BitMatrix g) {
    if (g.rows() == 0 || g.cols() < g.rows()) throw ConfigError("LinearCodeSpec: generator must be k x n with k <= n");
    if (g.rank() != g.rows()) throw ConfigError("LinearCodeSpec: generator matrix does not have full row rank");
    return LinearCodeSpec{std::move(g)};
}

std::vector<std::uint8_t> LinearCodeSpec::encode(std::span<const std::uint8_t> message) const {
    return generator.encode_row(message);
}

LinearCodeSpec hamming74() {
    // systematic [I4 | P]
    BitMatrix g(4, 7, {1, 0, 0, 0, 1, 1, 0,
                       0, 1, 0, 0, 1, 0, 1,
                       0, 0, 1, 0, 0, 1, 1,
                       0, 0, 0, 1, 1, 1, 1});
    return LinearCodeSpec::from_generator(std::move(g));
}

LinearCodeSpec single_parity_check(std::size_t n) {
    if (n < 2) throw ConfigError("single_parity_check: n must be >= 2");
    BitMatrix g(n - 1, n);
    for (std::size_t i = 0; i < n - 1; ++i) {
        g.at(i, i) = 1;
        g.at(i, n - 1) = 1;
    }
    return LinearCodeSpec{std::move(g)};
}

LinearCodeSpec repetition(std::size_t n) {
    if (n < 1) throw ConfigError("repetition: n must be >= 1");
    BitMatrix g(1, n);
    for (std::size_t c = 0; c < n; ++c) g.at(0, c) = 1;
    return LinearCodeSpec{std::move(g)};
}

LinearCodeSpec identity_code(std::size_t n) { return LinearCodeSpec{BitMatrix::identity(n)}; }

std::optional<LinearCodeSpec> named_component_code(const std::string& name) {
    if (name == "hamming74") return hamming74();
    auto parse_sized = [&](const std::string& prefix) -> std::optional<std::size_t> {
        if (name.rfind(prefix, 0) != 0) return std::nullopt;
        const std::string num = name.substr(prefix.size());
        if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
        return static_cast<std::size_t>(std::stoul(num));
    };
    if (auto n = parse_sized("spc")) return single_parity_check(*n);
    if (auto n = parse_sized("rep")) return repetition(*n);
    if (auto n = parse_sized("identity")) return identity_code(*n);
    return std::nullopt;
}

std::size_t ProductCodeSpec::n() const {
    std::size_t out = 1;
    for (const auto& c : components) out *= c.n();
    return out;
}

std::size_t ProductCodeSpec::k() const {
    std::size_t out = 1;
    for (const auto& c : components) out *= c.k();
    return out;
}

double ProductCodeSpec::rate() const { return static_cast<double>(k()) / static_cast<double>(n()); }

BitMatrix ProductCodeSpec::generator() const {
    if (components.empty()) throw ConfigError("ProductCodeSpec: at least one component required");
    BitMatrix g = components.front().generator;
    for (std::size_t i = 1; i < components.size(); ++i) g = kronecker(g, components[i].generator);
    return g;
}

ProductParams product_params(const std::vector<LinearCodeSpec>& components) {
    if (components.empty()) throw ConfigError("product_params: at least one component required");
    ProductParams p;
    p.n = 1;
    p.k = 1;
    p.rate = 1.0;
    for (const auto& c : components) {
        p.n *= c.n();
        p.k *= c.k();
        p.rate *= c.rate();
    }
    if (p.k <= 20) {
        // exhaustive nonzero-codeword weight enumeration via the Kronecker generator
        ProductCodeSpec spec{components};
        const BitMatrix g = spec.generator();
        std::size_t best = p.n + 1;
        std::vector<std::uint8_t> u(p.k, 0);
        for (std::uint64_t m = 1; m < (std::uint64_t{1} << p.k); ++m) {
            for (std::size_t j = 0; j < p.k; ++j) u[j] = static_cast<std::uint8_t>((m >> j) & 1u);
            const auto cw = g.encode_row(u);
            std::size_t w = 0;
            for (std::uint8_t b : cw) w += b;
            if (w < best) best = w;
        }
        p.min_distance = best;
    }
    return p;
}

BitMatrix product_encode(std::span<const std::uint8_t> message, const LinearCodeSpec& c1, const LinearCodeSpec& c2) {
    const std::size_t k1 = c1.k(), k2 = c2.k();
    if (message.size() != k1 * k2)
        throw ShapeError("product_encode: message length " + std::to_string(message.size()) + " != k1*k2 = " +
                         std::to_string(k1 * k2));

    // k2 x k1 message array, rows encoded by c1 -> k2 x n1
    std::vector<std::vector<std::uint8_t>> rows(k2);
    for (std::size_t r = 0; r < k2; ++r)
        rows[r] = c1.encode(message.subspan(r * k1, k1));

    // columns encoded by c2 -> n2 x n1
    const std::size_t n1 = c1.n(), n2 = c2.n();
    BitMatrix out(n2, n1);
    std::vector<std::uint8_t> col(k2), coded(n2);
    for (std::size_t c = 0; c < n1; ++c) {
        for (std::size_t r = 0; r < k2; ++r) col[r] = rows[r][c];
        coded = c2.encode(col);
        for (std::size_t r = 0; r < n2; ++r) out.at(r, c) = coded[r];
    }
    return out;
}

// ---- polar -----------------------------------------------------------------

namespace {

void require_power_of_two(std::size_t n, const char* what) {
    if (n == 0 || (n & (n - 1)) != 0) throw ConfigError(std::string(what) + " must be a power of two");
}

// exact boxplus 2*atanh(tanh(a/2)tanh(b/2)) in log-domain stable form
double boxplus(double a, double b) {
    const double sign = ((a < 0.0) != (b < 0.0)) ? -1.0 : 1.0;
    return sign * std::min(std::fabs(a), std::fabs(b)) + std::log1p(std::exp(-std::fabs(a + b))) -
           std::log1p(std::exp(-std::fabs(a - b)));
}

struct ScGenie {
    const std::uint8_t* truth = nullptr;  // mother-domain source bits
    std::uint64_t* errors = nullptr;      // per-bit-channel error counters
};

// Successive cancellation over llrs[offset..offset+len). frozen == nullptr
// means genie mode: every decision is recorded against truth then forced.
// Returns decisions in u_hat and the re-encoded codeword bits in x_hat.
void sc_recurse(std::vector<double>& llrs, std::size_t offset, std::size_t len, const std::uint8_t* frozen,
                std::uint8_t* u_hat, std::uint8_t* x_hat, const ScGenie* genie) {
    if (len == 1) {
        std::uint8_t bit;
        const double llr = llrs[offset];
        if (genie) {
            bit = llr < 0.0 ? 1 : 0;
            if (bit != genie->truth[offset]) genie->errors[offset] += 1;
            bit = genie->truth[offset];
        } else if (frozen[offset]) {
            bit = 0;
        } else {
            bit = llr < 0.0 ? 1 : 0;
        }
        u_hat[offset] = bit;
        x_hat[offset] = bit;
        return;
    }
    const std::size_t half = len / 2;
    std::vector<double> saved(half);
    for (std::size_t i = 0; i < half; ++i) saved[i] = llrs[offset + i];

    // f stage
    for (std::size_t i = 0; i < half; ++i) llrs[offset + i] = boxplus(saved[i], llrs[offset + half + i]);
    sc_recurse(llrs, offset, half, frozen, u_hat, x_hat, genie);

    // g stage using the left half's re-encoded bits
    for (std::size_t i = 0; i < half; ++i) {
        const double a = saved[i];
        const double b = llrs[offset + half + i];
        llrs[offset + half + i] = x_hat[offset + i] ? b - a : b + a;
    }
    sc_recurse(llrs, offset + half, half, frozen, u_hat, x_hat, genie);

    for (std::size_t i = 0; i < half; ++i) x_hat[offset + i] ^= x_hat[offset + half + i];
}

void run_sc(std::vector<double> llrs, const std::uint8_t* frozen, std::uint8_t* u_hat, std::uint8_t* x_hat,
            const ScGenie* genie) {
    sc_recurse(llrs, 0, llrs.size(), frozen, u_hat, x_hat, genie);
}

}  // namespace

std::vector<std::size_t> random_puncture(std::size_t mother_length, std::size_t block_length, std::uint64_t seed) {
    if (block_length > mother_length) throw ConfigError("random_puncture: n must be <= N");
    const std::size_t count = mother_length - block_length;
    std::vector<std::size_t> positions(mother_length);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    Rng rng = Rng(seed).substream("puncture");
    // partial Fisher-Yates: the first `count` entries form the pattern
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(mother_length - i));
        std::swap(positions[i], positions[j]);
    }
    std::vector<std::size_t> pattern(positions.begin(), positions.begin() + count);
    std::sort(pattern.begin(), pattern.end());
    return pattern;
}

std::vector<std::uint8_t> polar_transform(std::vector<std::uint8_t> u) {
    require_power_of_two(u.size(), "polar_transform length");
    const std::size_t n = u.size();
    for (std::size_t len = 1; len < n; len <<= 1)
        for (std::size_t i = 0; i < n; i += 2 * len)
            for (std::size_t j = i; j < i + len; ++j) u[j] ^= u[j + len];
    return u;
}

std::vector<std::uint8_t> polar_encode_bits(std::span<const std::uint8_t> info_bits, const PolarSpec& spec) {
    if (info_bits.size() != spec.dimension) throw ShapeError("polar_encode: wrong info length");
    std::vector<std::uint8_t> u(spec.mother_length, 0);
    for (std::size_t i = 0; i < spec.info_set.size(); ++i) u[spec.info_set[i]] = info_bits[i];
    return polar_transform(std::move(u));
}

std::vector<double> polar_encode(std::span<const std::uint8_t> info_bits, const PolarSpec& spec) {
    const auto coded = polar_encode_bits(info_bits, spec);
    std::vector<double> symbols;
    symbols.reserve(spec.block_length);
    std::size_t next_punct = 0;
    for (std::size_t i = 0; i < coded.size(); ++i) {
        if (next_punct < spec.puncture_pattern.size() && spec.puncture_pattern[next_punct] == i) {
            ++next_punct;
            continue;
        }
        symbols.push_back(coded[i] ? -1.0 : 1.0);
    }
    return symbols;
}

std::vector<std::uint8_t> polar_sc_decode(std::span<const double> llrs, const PolarSpec& spec) {
    if (llrs.size() != spec.mother_length)
        throw ShapeError("polar_sc_decode: expected mother-domain LLRs of length " +
                         std::to_string(spec.mother_length));
    std::vector<std::uint8_t> frozen(spec.mother_length, 1);
    for (std::size_t idx : spec.info_set) frozen[idx] = 0;
    std::vector<std::uint8_t> u_hat(spec.mother_length, 0), x_hat(spec.mother_length, 0);
    run_sc(std::vector<double>(llrs.begin(), llrs.end()), frozen.data(), u_hat.data(), x_hat.data(), nullptr);
    std::vector<std::uint8_t> info(spec.info_set.size());
    for (std::size_t i = 0; i < spec.info_set.size(); ++i) info[i] = u_hat[spec.info_set[i]];
    return info;
}

std::vector<double> polar_bit_channel_ber(std::size_t mother_length, std::span<const std::size_t> puncture_pattern,
                                          double design_snr_db, std::uint64_t trials, Rng& rng) {
    require_power_of_two(mother_length, "polar mother length");
    if (trials == 0) throw ConfigError("polar_bit_channel_ber: trials must be positive");
    const double sigma = snr_db_to_sigma(design_snr_db);
    std::vector<std::uint8_t> punctured(mother_length, 0);
    for (std::size_t p : puncture_pattern) punctured[p] = 1;

    std::vector<std::uint64_t> errors(mother_length, 0);
    std::vector<std::uint8_t> source(mother_length), coded(mother_length);
    std::vector<std::uint8_t> u_hat(mother_length), x_hat(mother_length);
    std::vector<double> llrs(mother_length);
    for (std::uint64_t t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < mother_length; ++i) source[i] = static_cast<std::uint8_t>(rng.bit());
        coded = polar_transform(source);
        for (std::size_t i = 0; i < mother_length; ++i) {
            if (punctured[i]) {
                llrs[i] = 0.0;
                continue;
            }
            const double symbol = coded[i] ? -1.0 : 1.0;
            const double y = symbol + sigma * rng.normal();
            llrs[i] = 2.0 * y / (sigma * sigma);
        }
        ScGenie genie{source.data(), errors.data()};
        run_sc(llrs, nullptr, u_hat.data(), x_hat.data(), &genie);
    }

    std::vector<double> ber(mother_length);
    for (std::size_t i = 0; i < mother_length; ++i)
        ber[i] = static_cast<double>(errors[i]) / static_cast<double>(trials);
    return ber;
}

std::vector<std::size_t> polar_construct(std::size_t mother_length, std::size_t dimension, double design_snr_db,
                                         std::uint64_t trials, std::uint64_t seed,
                                         std::span<const std::size_t> puncture_pattern) {
    if (dimension > mother_length - puncture_pattern.size())
        throw ConfigError("polar_construct: k exceeds available block length");
    Rng rng = Rng(seed).substream("polar-construct");
    const auto ber = polar_bit_channel_ber(mother_length, puncture_pattern, design_snr_db, trials, rng);

    bool all_zero = true;
    for (double b : ber)
        if (b != 0.0) all_zero = false;
    if (all_zero && dimension < mother_length)
        std::fputs("warning: polar_construct: all bit-channel BER estimates are zero; "
                   "increase trials or lower the design SNR to rank channels\n",
                   stderr);

    std::vector<std::size_t> order(mother_length);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ber[a] != ber[b]) return ber[a] < ber[b];
        return a < b;
    });
    std::vector<std::size_t> info(order.begin(), order.begin() + dimension);
    std::sort(info.begin(), info.end());
    return info;
}

PolarSpec make_polar_spec(std::size_t block_length, std::size_t dimension, double design_snr_db, std::uint64_t trials,
                          std::uint64_t seed) {
    if (block_length == 0 || dimension == 0 || dimension > block_length)
        throw ConfigError("make_polar_spec: need 0 < k <= n");
    std::size_t m0 = 0;
    while ((std::size_t{1} << m0) < block_length) ++m0;
    const std::size_t mother = std::size_t{1} << m0;

    PolarSpec spec;
    spec.mother_length = mother;
    spec.block_length = block_length;
    spec.dimension = dimension;
    spec.puncture_pattern = random_puncture(mother, block_length, seed);
    spec.info_set = polar_construct(mother, dimension, design_snr_db, trials, seed, spec.puncture_pattern);
    Rng rng = Rng(seed).substream("polar-construct");
    spec.construction =
        PolarConstructionRecord{design_snr_db, trials,
                                polar_bit_channel_ber(mother, spec.puncture_pattern, design_snr_db, trials, rng)};
    return spec;
}

std::vector<double> expand_punctured_llrs(std::span<const double> llrs_n, const PolarSpec& spec) {
    if (llrs_n.size() != spec.block_length) throw ShapeError("expand_punctured_llrs: wrong length");
    std::vector<double> full(spec.mother_length, 0.0);
    std::size_t next_punct = 0, src = 0;
    for (std::size_t i = 0; i < spec.mother_length; ++i) {
        if (next_punct < spec.puncture_pattern.size() && spec.puncture_pattern[next_punct] == i) {
            ++next_punct;
            continue;  // punctured position contributes LLR exactly 0
        }
        full[i] = llrs_n[src++];
    }
    return full;
}

std::vector<std::uint8_t> ml_decode_bruteforce(
    std::span<const double> received, std::size_t message_bits,
    const std::function<std::vector<double>(std::span<const std::uint8_t>)>& encode) {
    if (message_bits > 16) throw ConfigError("ml_decode_bruteforce: k must be <= 16 (2^k enumeration)");
    std::vector<std::uint8_t> message(message_bits), best(message_bits);
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << message_bits); ++m) {
        for (std::size_t j = 0; j < message_bits; ++j) message[j] = static_cast<std::uint8_t>((m >> j) & 1u);
        const auto symbols = encode(message);
        if (symbols.size() != received.size()) throw ShapeError("ml_decode_bruteforce: codeword length mismatch");
        double dist = 0.0;
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            const double d = received[i] - symbols[i];
            dist += d * d;
        }
        if (dist < best_dist) {  // strict: ties keep the smallest message index
            best_dist = dist;
            best = message;
        }
    }
    return best;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double uncoded_bpsk_ber(double snr_db) {
    const double sigma = snr_db_to_sigma(snr_db);
    if (sigma == 0.0) return 0.0;
    if (std::isinf(sigma)) return 0.5;
    return q_function(1.0 / sigma);
}

}  // namespace pae
