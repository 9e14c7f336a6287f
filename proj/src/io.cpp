#include "pae/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pae/errors.hpp"

namespace pae {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("config: unknown key \"" + key + "\" in " + where);
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for \"" + std::string(key) + "\": " + e.what());
    }
}

json snr_policy_to_json(const SnrPolicy& p) {
    if (p.is_point()) return json{{"point", p.point_db()}};
    return json{{"range", json::array({p.lo_db(), p.hi_db()})}};
}

SnrPolicy snr_policy_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + where + " must be {\"point\": x} or {\"range\": [lo, hi]}");
    reject_unknown_keys(j, {"point", "range"}, where);
    if (j.contains("point") && j.contains("range"))
        throw ConfigError("config: " + where + " cannot have both point and range");
    if (j.contains("point")) return SnrPolicy::point(j.at("point").get<double>());
    if (j.contains("range")) {
        const auto& r = j.at("range");
        if (!r.is_array() || r.size() != 2) throw ConfigError("config: " + where + ".range must be [lo, hi]");
        return SnrPolicy::range(r[0].get<double>(), r[1].get<double>());
    }
    throw ConfigError("config: " + where + " needs point or range");
}

ChannelKind channel_kind_from_string(const std::string& s, const std::string& where) {
    if (s == "awgn") return ChannelKind::Awgn;
    if (s == "rayleigh") return ChannelKind::RayleighFast;
    throw ConfigError("config: " + where + " must be \"awgn\" or \"rayleigh\", got \"" + s + "\"");
}

json spec_to_json(const ProductAeSpec& s) {
    return json{{"n1", s.n1},
                {"k1", s.k1},
                {"n2", s.n2},
                {"k2", s.k2},
                {"iterations", s.iterations},
                {"feature_size", s.feature_size},
                {"encoder1_hidden_layers", s.encoder1_net.hidden_count},
                {"encoder1_hidden_width", s.encoder1_net.hidden_width},
                {"encoder2_hidden_layers", s.encoder2_net.hidden_count},
                {"encoder2_hidden_width", s.encoder2_net.hidden_width},
                {"decoder_hidden_layers", s.decoder_net.hidden_count},
                {"decoder_hidden_width", s.decoder_net.hidden_width},
                {"last_decoder_hidden_layers", s.last_decoder_net.hidden_count},
                {"last_decoder_hidden_width", s.last_decoder_net.hidden_width},
                {"normalize_after_first_encoder", s.normalize_after_first_encoder}};
}

ProductAeSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: spec must be an object");
    reject_unknown_keys(j,
                        {"n1", "k1", "n2", "k2", "iterations", "feature_size", "encoder1_hidden_layers",
                         "encoder1_hidden_width", "encoder2_hidden_layers", "encoder2_hidden_width",
                         "decoder_hidden_layers", "decoder_hidden_width", "last_decoder_hidden_layers",
                         "last_decoder_hidden_width", "normalize_after_first_encoder"},
                        "spec");
    for (const char* req : {"n1", "k1", "n2", "k2"})
        if (!j.contains(req)) throw ConfigError(std::string("config: spec.") + req + " is required");
    ProductAeSpec s;
    s.n1 = j.at("n1").get<std::size_t>();
    s.k1 = j.at("k1").get<std::size_t>();
    s.n2 = j.at("n2").get<std::size_t>();
    s.k2 = j.at("k2").get<std::size_t>();
    // paper-scale defaults: I=4, F=3, encoders (7,200), decoders (7,250),
    // last decoder pair (9,250)
    s.iterations = get_or<std::size_t>(j, "iterations", 4);
    s.feature_size = get_or<std::size_t>(j, "feature_size", 3);
    s.encoder1_net = {get_or<std::size_t>(j, "encoder1_hidden_layers", 7),
                      get_or<std::size_t>(j, "encoder1_hidden_width", 200)};
    s.encoder2_net = {get_or<std::size_t>(j, "encoder2_hidden_layers", 7),
                      get_or<std::size_t>(j, "encoder2_hidden_width", 200)};
    s.decoder_net = {get_or<std::size_t>(j, "decoder_hidden_layers", 7),
                     get_or<std::size_t>(j, "decoder_hidden_width", 250)};
    s.last_decoder_net = {get_or<std::size_t>(j, "last_decoder_hidden_layers", 9),
                          get_or<std::size_t>(j, "last_decoder_hidden_width", 250)};
    s.normalize_after_first_encoder = get_or<bool>(j, "normalize_after_first_encoder", false);
    s.validate();
    return s;
}

json validation_to_json(const ValidationConfig& v) {
    return json{{"snrs", v.snr_grid_db}, {"words", v.words}};
}

json train_to_json(const TrainConfig& t) {
    return json{{"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"t_enc", t.t_enc},
                {"t_dec", t.t_dec},
                {"encoder_snr", snr_policy_to_json(t.encoder_snr)},
                {"decoder_snr", snr_policy_to_json(t.decoder_snr)},
                {"lr_enc", t.lr_enc},
                {"lr_dec", t.lr_dec},
                {"scheme", scheme_name(t.scheme)},
                {"t_dec_per_pair", t.t_dec_per_pair},
                {"t_dec_start", t.t_dec_start},
                {"t_dec_end", t.t_dec_end},
                {"batch_policy", batch_policy_name(t.batch_policy)},
                {"finetune", json{{"sub_batch_count", t.finetune.sub_batch_count},
                                  {"sub_batch_size", t.finetune.sub_batch_size},
                                  {"epochs", t.finetune.epochs}}},
                {"l2_coefficient", t.l2_coefficient},
                {"validation", validation_to_json(t.validation)},
                {"checkpoint_snr_db", t.checkpoint_snr_db},
                {"seed", t.seed},
                {"reset_adam_on_finetune", t.reset_adam_on_finetune}};
}

std::vector<double> snr_list_from_json(const json& j, const std::string& where) {
    if (j.is_string()) return parse_snr_grid(j.get<std::string>());
    if (j.is_array()) {
        std::vector<double> out;
        for (const auto& v : j) out.push_back(v.get<double>());
        return out;
    }
    throw ConfigError("config: " + where + " must be a \"lo:hi:step\" string or an array of dB values");
}

TrainConfig train_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: train must be an object");
    reject_unknown_keys(j,
                        {"epochs", "batch_size", "t_enc", "t_dec", "encoder_snr", "decoder_snr", "lr_enc", "lr_dec",
                         "scheme", "t_dec_per_pair", "t_dec_start", "t_dec_end", "batch_policy", "finetune",
                         "l2_coefficient", "validation", "checkpoint_snr_db", "seed", "reset_adam_on_finetune"},
                        "train");
    TrainConfig t;
    t.epochs = get_or<std::size_t>(j, "epochs", t.epochs);
    t.batch_size = get_or<std::size_t>(j, "batch_size", 5000);
    t.t_enc = get_or<std::size_t>(j, "t_enc", 100);
    t.t_dec = get_or<std::size_t>(j, "t_dec", 500);
    if (j.contains("encoder_snr")) t.encoder_snr = snr_policy_from_json(j.at("encoder_snr"), "train.encoder_snr");
    if (j.contains("decoder_snr")) {
        t.decoder_snr = snr_policy_from_json(j.at("decoder_snr"), "train.decoder_snr");
    } else {
        // default decoder range [gamma_e - 2.5, gamma_e + 1]
        const double g = t.encoder_snr.is_point() ? t.encoder_snr.point_db()
                                                  : 0.5 * (t.encoder_snr.lo_db() + t.encoder_snr.hi_db());
        t.decoder_snr = SnrPolicy::range(g - 2.5, g + 1.0);
    }
    t.lr_enc = get_or<double>(j, "lr_enc", 2e-4);
    t.lr_dec = get_or<double>(j, "lr_dec", 2e-4);
    const std::string scheme = get_or<std::string>(j, "scheme", "joint");
    if (scheme == "joint")
        t.scheme = ScheduleScheme::Joint;
    else if (scheme == "scheme1")
        t.scheme = ScheduleScheme::SchemeI;
    else if (scheme == "scheme2")
        t.scheme = ScheduleScheme::SchemeII;
    else if (scheme == "scheme3")
        t.scheme = ScheduleScheme::SchemeIII;
    else
        throw ConfigError("config: train.scheme must be joint|scheme1|scheme2|scheme3");
    t.t_dec_per_pair = get_or<std::vector<std::size_t>>(j, "t_dec_per_pair", {});
    t.t_dec_start = get_or<std::size_t>(j, "t_dec_start", 0);
    t.t_dec_end = get_or<std::size_t>(j, "t_dec_end", 0);
    const std::string policy = get_or<std::string>(j, "batch_policy", "fresh_per_iteration");
    if (policy == "fresh_per_iteration")
        t.batch_policy = BatchPolicy::FreshPerIteration;
    else if (policy == "fresh_per_epoch")
        t.batch_policy = BatchPolicy::FreshPerEpoch;
    else
        throw ConfigError("config: train.batch_policy must be fresh_per_iteration|fresh_per_epoch");
    if (j.contains("finetune")) {
        const json& f = j.at("finetune");
        reject_unknown_keys(f, {"sub_batch_count", "sub_batch_size", "epochs"}, "train.finetune");
        t.finetune.sub_batch_count = get_or<std::size_t>(f, "sub_batch_count", 1);
        t.finetune.sub_batch_size = get_or<std::size_t>(f, "sub_batch_size", 0);
        t.finetune.epochs = get_or<std::size_t>(f, "epochs", 0);
    }
    if (t.finetune.sub_batch_size == 0) t.finetune.sub_batch_size = t.batch_size;
    t.l2_coefficient = get_or<double>(j, "l2_coefficient", 0.0);
    if (j.contains("validation")) {
        const json& v = j.at("validation");
        reject_unknown_keys(v, {"snrs", "words"}, "train.validation");
        if (v.contains("snrs")) t.validation.snr_grid_db = snr_list_from_json(v.at("snrs"), "train.validation.snrs");
        t.validation.words = get_or<std::size_t>(v, "words", 0);
    }
    t.checkpoint_snr_db = get_or<double>(j, "checkpoint_snr_db", 3.0);
    t.seed = get_or<std::uint64_t>(j, "seed", 1);
    t.reset_adam_on_finetune = get_or<bool>(j, "reset_adam_on_finetune", false);
    return t;
}

json experiment_to_json(const ExperimentPlan& e) {
    const char* kind = e.kind == ExperimentPlan::Kind::Sweep        ? "sweep"
                       : e.kind == ExperimentPlan::Kind::Robustness ? "robustness"
                                                                    : "adaptivity";
    return json{{"kind", kind},
                {"train_channel", channel_kind_name(e.train_channel)},
                {"test_channel", channel_kind_name(e.test_channel)},
                {"finetune_epochs", e.finetune_epochs},
                {"snrs", e.snr_grid_db},
                {"min_block_errors", e.stop.min_block_errors},
                {"max_blocks", e.stop.max_blocks},
                {"eval_seed", e.eval_seed}};
}

ExperimentPlan experiment_from_json(const json& j, ChannelKind default_train_channel) {
    if (!j.is_object()) throw ConfigError("config: experiment must be an object");
    reject_unknown_keys(j,
                        {"kind", "train_channel", "test_channel", "finetune_epochs", "snrs", "min_block_errors",
                         "max_blocks", "eval_seed"},
                        "experiment");
    ExperimentPlan e;
    const std::string kind = get_or<std::string>(j, "kind", "sweep");
    if (kind == "sweep")
        e.kind = ExperimentPlan::Kind::Sweep;
    else if (kind == "robustness")
        e.kind = ExperimentPlan::Kind::Robustness;
    else if (kind == "adaptivity")
        e.kind = ExperimentPlan::Kind::Adaptivity;
    else
        throw ConfigError("config: experiment.kind must be sweep|robustness|adaptivity");
    e.train_channel = j.contains("train_channel")
                          ? channel_kind_from_string(j.at("train_channel").get<std::string>(), "experiment.train_channel")
                          : default_train_channel;
    e.test_channel = j.contains("test_channel")
                         ? channel_kind_from_string(j.at("test_channel").get<std::string>(), "experiment.test_channel")
                         : ChannelKind::RayleighFast;
    e.finetune_epochs = get_or<std::size_t>(j, "finetune_epochs", e.kind == ExperimentPlan::Kind::Adaptivity ? 1 : 0);
    if (e.kind == ExperimentPlan::Kind::Adaptivity && e.finetune_epochs < 1)
        throw ConfigError("config: adaptivity requires experiment.finetune_epochs >= 1");
    if (j.contains("snrs")) e.snr_grid_db = snr_list_from_json(j.at("snrs"), "experiment.snrs");
    e.stop.min_block_errors = get_or<std::uint64_t>(j, "min_block_errors", 100);
    e.stop.max_blocks = get_or<std::uint64_t>(j, "max_blocks", 1'000'000);
    e.eval_seed = get_or<std::uint64_t>(j, "eval_seed", 1);
    return e;
}

json run_config_to_json(const RunConfig& cfg) {
    json j{{"spec", spec_to_json(cfg.spec)},
           {"channel", json{{"kind", channel_kind_name(cfg.train_channel)}}},
           {"train", train_to_json(cfg.train)}};
    if (cfg.experiment) j["experiment"] = experiment_to_json(*cfg.experiment);
    return j;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown_keys(j, {"spec", "channel", "train", "experiment"}, "top level");
    if (!j.contains("spec")) throw ConfigError("config: spec section is required");

    RunConfig cfg;
    cfg.spec = spec_from_json(j.at("spec"));
    if (j.contains("channel")) {
        const json& c = j.at("channel");
        reject_unknown_keys(c, {"kind"}, "channel");
        cfg.train_channel = channel_kind_from_string(get_or<std::string>(c, "kind", "awgn"), "channel.kind");
    }
    cfg.train = train_from_json(j.contains("train") ? j.at("train") : json::object());
    if (j.contains("experiment")) cfg.experiment = experiment_from_json(j.at("experiment"), cfg.train_channel);
    return cfg;
}

std::string dump_run_config(const RunConfig& cfg) { return run_config_to_json(cfg).dump(2) + "\n"; }

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write config file " + path.string());
    out << dump_run_config(cfg);
}

std::uint64_t config_fingerprint(const RunConfig& cfg) { return fnv1a64(run_config_to_json(cfg).dump()); }

// ---- checkpoint files -------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'P', 'A', 'E', '1'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_doubles(std::string& out, const Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint64_t bits;
        const double v = t[i];
        std::memcpy(&bits, &v, 8);
        put_u64(out, bits);
    }
}

std::uint32_t read_u32(const std::string& buf, std::size_t& pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return v;
}

std::uint64_t read_u64(const std::string& buf, std::size_t& pos) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return v;
}

void read_doubles(const std::string& buf, std::size_t& pos, Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::uint64_t bits = read_u64(buf, pos);
        double v;
        std::memcpy(&v, &bits, 8);
        t[i] = v;
    }
}

json validation_points_to_json(const std::vector<ValidationPoint>& points) {
    json arr = json::array();
    for (const ValidationPoint& vp : points)
        arr.push_back(json{{"snr_db", vp.snr_db}, {"ber", vp.ber}, {"bler", vp.bler}});
    return arr;
}

std::vector<ValidationPoint> validation_points_from_json(const json& arr) {
    std::vector<ValidationPoint> out;
    for (const auto& v : arr)
        out.push_back(ValidationPoint{v.at("snr_db").get<double>(), v.at("ber").get<double>(),
                                      v.at("bler").get<double>()});
    return out;
}

std::string fingerprint_hex(std::uint64_t fp) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
    return std::string(buf);
}

std::uint64_t fingerprint_from_hex(const std::string& s) {
    return std::strtoull(s.c_str(), nullptr, 16);
}

}  // namespace

void save_checkpoint(const ProductAeModel& model, const CheckpointMeta& meta,
                     const std::optional<OptimizerSnapshot>& optimizer, const std::filesystem::path& path) {
    const auto params = model.parameter_values();
    std::size_t total_scalars = 0;
    for (const Tensor& t : params) total_scalars += t.size();

    json header{{"spec", spec_to_json(model.spec())},
                {"epoch", meta.epoch},
                {"seed", meta.seed},
                {"optimizer_state", optimizer.has_value()},
                {"validation", validation_points_to_json(meta.validation)},
                {"config_fingerprint", fingerprint_hex(meta.config_fingerprint)},
                {"parameter_count", total_scalars}};
    const std::string header_text = header.dump();

    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_u64(out, header_text.size());
    out += header_text;
    for (const Tensor& t : params) put_doubles(out, t);
    if (optimizer) {
        if (optimizer->slots.size() != params.size())
            throw CheckpointError(CheckpointError::Kind::DimMismatch,
                                  "checkpoint: optimizer slots do not match parameter tensors");
        for (std::size_t i = 0; i < params.size(); ++i) {
            put_doubles(out, optimizer->slots[i].first_moment);
            put_doubles(out, optimizer->slots[i].second_moment);
            put_u64(out, optimizer->slots[i].step_count);
        }
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw CheckpointError(CheckpointError::Kind::Io, "cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError(CheckpointError::Kind::Io, "short write to " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError(CheckpointError::Kind::Io, "cannot open " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string buf = ss.str();

    if (buf.size() < 16 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw CheckpointError(CheckpointError::Kind::BadMagic, "checkpoint: bad magic bytes in " + path.string());
    std::size_t pos = 4;
    const std::uint32_t version = read_u32(buf, pos);
    if (version != kCheckpointVersion)
        throw CheckpointError(CheckpointError::Kind::UnsupportedVersion,
                              "checkpoint: unsupported format version " + std::to_string(version));
    const std::uint64_t header_len = read_u64(buf, pos);
    if (pos + header_len > buf.size())
        throw CheckpointError(CheckpointError::Kind::Truncated, "checkpoint: header extends past end of file");

    json header;
    try {
        header = json::parse(buf.substr(pos, header_len));
    } catch (const json::exception& e) {
        throw CheckpointError(CheckpointError::Kind::Malformed, std::string("checkpoint: header parse failure: ") + e.what());
    }
    pos += header_len;

    CheckpointMeta meta;
    ProductAeSpec spec;
    bool has_optimizer = false;
    std::size_t declared_scalars = 0;
    try {
        spec = spec_from_json(header.at("spec"));
        meta.spec = spec;
        meta.epoch = header.at("epoch").get<std::size_t>();
        meta.seed = header.at("seed").get<std::uint64_t>();
        meta.validation = validation_points_from_json(header.at("validation"));
        meta.config_fingerprint = fingerprint_from_hex(header.at("config_fingerprint").get<std::string>());
        has_optimizer = header.at("optimizer_state").get<bool>();
        declared_scalars = header.at("parameter_count").get<std::size_t>();
    } catch (const json::exception& e) {
        throw CheckpointError(CheckpointError::Kind::Malformed, std::string("checkpoint: header field error: ") + e.what());
    } catch (const ConfigError& e) {
        throw CheckpointError(CheckpointError::Kind::Malformed, std::string("checkpoint: ") + e.what());
    }

    ProductAeModel model(spec, nullptr);
    const auto params = model.all_parameters();
    std::size_t total_scalars = 0;
    for (const Var& p : params) total_scalars += p->value.size();
    if (total_scalars != declared_scalars)
        throw CheckpointError(CheckpointError::Kind::DimMismatch,
                              "checkpoint: header parameter_count " + std::to_string(declared_scalars) +
                                  " does not match spec-derived count " + std::to_string(total_scalars));

    const std::size_t expected_payload = 8 * total_scalars * (has_optimizer ? 3 : 1) +
                                         (has_optimizer ? 8 * params.size() : 0);
    const std::size_t actual_payload = buf.size() - pos;
    if (actual_payload < expected_payload)
        throw CheckpointError(CheckpointError::Kind::Truncated,
                              "checkpoint: payload truncated, expected " + std::to_string(expected_payload) +
                                  " bytes, got " + std::to_string(actual_payload));
    if (actual_payload > expected_payload)
        throw CheckpointError(CheckpointError::Kind::Malformed,
                              "checkpoint: trailing bytes after payload (expected " +
                                  std::to_string(expected_payload) + ", got " + std::to_string(actual_payload) + ")");

    for (const Var& p : params) read_doubles(buf, pos, p->value);
    std::optional<OptimizerSnapshot> optimizer;
    if (has_optimizer) {
        OptimizerSnapshot snap;
        for (const Var& p : params) {
            AdamState st{Tensor::zeros(p->value.shape()), Tensor::zeros(p->value.shape()), 0};
            read_doubles(buf, pos, st.first_moment);
            read_doubles(buf, pos, st.second_moment);
            st.step_count = read_u64(buf, pos);
            snap.slots.push_back(std::move(st));
        }
        optimizer = std::move(snap);
    }
    return LoadedCheckpoint{std::move(model), std::move(meta), std::move(optimizer)};
}

// ---- results ----------------------------------------------------------------

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
    out << "snr_db,ber,bler,bit_errors,block_errors,trials,capped\n";
    for (const SweepPoint& p : result.points) {
        out << format_double(p.snr_db) << ',' << format_double(p.stats.ber()) << ',' << format_double(p.stats.bler())
            << ',' << p.stats.bit_errors << ',' << p.stats.block_errors << ',' << p.stats.trials << ','
            << (p.capped ? 1 : 0) << '\n';
    }
}

void save_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write CSV file " + path.string());
    write_sweep_csv(result, out);
}

void write_history_jsonl(const TrainHistory& history, std::ostream& out) {
    for (const EpochRecord& rec : history.epochs) {
        json j{{"epoch", rec.epoch},
               {"loss", rec.mean_loss},
               {"decoder_iterations", rec.decoder_iterations},
               {"encoder_iterations", rec.encoder_iterations},
               {"validation", validation_points_to_json(rec.validation)}};
        out << j.dump() << '\n';
    }
}

void save_history_jsonl(const TrainHistory& history, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write history file " + path.string());
    write_history_jsonl(history, out);
}

// ---- polar spec files ---------------------------------------------------------

std::string dump_polar_spec(const PolarSpec& spec) {
    json j{{"mother_length", spec.mother_length},
           {"block_length", spec.block_length},
           {"dimension", spec.dimension},
           {"info_set", spec.info_set},
           {"puncture_pattern", spec.puncture_pattern},
           {"construction", json{{"design_snr_db", spec.construction.design_snr_db},
                                 {"trials", spec.construction.trials},
                                 {"bit_channel_ber", spec.construction.bit_channel_ber}}}};
    return j.dump(2) + "\n";
}

PolarSpec parse_polar_spec(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("polar spec: JSON parse failure: ") + e.what());
    }
    reject_unknown_keys(j, {"mother_length", "block_length", "dimension", "info_set", "puncture_pattern",
                            "construction"},
                        "polar spec");
    PolarSpec spec;
    try {
        spec.mother_length = j.at("mother_length").get<std::size_t>();
        spec.block_length = j.at("block_length").get<std::size_t>();
        spec.dimension = j.at("dimension").get<std::size_t>();
        spec.info_set = j.at("info_set").get<std::vector<std::size_t>>();
        spec.puncture_pattern = j.at("puncture_pattern").get<std::vector<std::size_t>>();
        if (j.contains("construction")) {
            const json& c = j.at("construction");
            reject_unknown_keys(c, {"design_snr_db", "trials", "bit_channel_ber"}, "polar spec construction");
            spec.construction.design_snr_db = get_or<double>(c, "design_snr_db", 0.0);
            spec.construction.trials = get_or<std::uint64_t>(c, "trials", 0);
            spec.construction.bit_channel_ber = get_or<std::vector<double>>(c, "bit_channel_ber", {});
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("polar spec: field error: ") + e.what());
    }
    if (spec.info_set.size() != spec.dimension) throw ConfigError("polar spec: info_set size != dimension");
    if (spec.puncture_pattern.size() != spec.mother_length - spec.block_length)
        throw ConfigError("polar spec: puncture pattern size != N - n");
    return spec;
}

void save_polar_spec(const PolarSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write polar spec file " + path.string());
    out << dump_polar_spec(spec);
}

PolarSpec load_polar_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open polar spec file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_polar_spec(ss.str());
}

void write_bit_channel_csv(const PolarSpec& spec, std::ostream& out) {
    out << "bit_channel,ber,frozen,punctured\n";
    std::vector<bool> info(spec.mother_length, false), punct(spec.mother_length, false);
    for (std::size_t i : spec.info_set) info[i] = true;
    for (std::size_t p : spec.puncture_pattern) punct[p] = true;
    for (std::size_t i = 0; i < spec.mother_length; ++i) {
        const double ber = i < spec.construction.bit_channel_ber.size() ? spec.construction.bit_channel_ber[i] : 0.0;
        out << i << ',' << format_double(ber) << ',' << (info[i] ? 0 : 1) << ',' << (punct[i] ? 1 : 0) << '\n';
    }
}

// ---- misc ---------------------------------------------------------------------

std::vector<double> parse_snr_grid(const std::string& text) {
    const auto c1 = text.find(':');
    if (c1 == std::string::npos) {
        try {
            return {std::stod(text)};
        } catch (const std::exception&) {
            throw ConfigError("SNR grid: cannot parse \"" + text + "\"");
        }
    }
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ConfigError("SNR grid: expected lo:hi:step, got \"" + text + "\"");
    double lo, hi, step;
    try {
        lo = std::stod(text.substr(0, c1));
        hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        step = std::stod(text.substr(c2 + 1));
    } catch (const std::exception&) {
        throw ConfigError("SNR grid: cannot parse \"" + text + "\"");
    }
    if (hi < lo) throw ConfigError("SNR grid: hi must be >= lo");
    if (lo == hi) return {lo};
    if (step <= 0.0) throw ConfigError("SNR grid: step must be positive");
    std::vector<double> out;
    const double count = (hi - lo) / step;
    const long long steps = static_cast<long long>(std::floor(count + 1e-9));
    for (long long i = 0; i <= steps; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

const char* scheme_name(ScheduleScheme s) {
    switch (s) {
        case ScheduleScheme::Joint: return "joint";
        case ScheduleScheme::SchemeI: return "scheme1";
        case ScheduleScheme::SchemeII: return "scheme2";
        case ScheduleScheme::SchemeIII: return "scheme3";
    }
    return "joint";
}

const char* batch_policy_name(BatchPolicy p) {
    return p == BatchPolicy::FreshPerIteration ? "fresh_per_iteration" : "fresh_per_epoch";
}

}  // namespace pae
