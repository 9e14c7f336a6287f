#include "pae/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pae/errors.hpp"
#include "pae/io.hpp"

namespace pae {

namespace fs = std::filesystem;

namespace {

ProductAeModel model_from_checkpoint(const Checkpoint& cp, const ProductAeSpec& spec) {
    ProductAeModel m(spec, nullptr);
    m.set_parameter_values(cp.parameters);
    return m;
}

std::string epoch_filename(std::size_t epoch) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "checkpoint_epoch_%04zu.pae1", epoch);
    return buf;
}

struct TrainOutputs {
    fs::path out_dir;
    bool epoch_files = true;
};

/// Shared train/finetune output handling: per-epoch checkpoint files, history
/// records, normalized config, best (by validation BER at the criterion SNR)
/// and last checkpoints.
void write_train_outputs(Trainer& trainer, const RunConfig& cfg, const TrainResult& result,
                         const TrainOutputs& outs) {
    save_run_config(cfg, outs.out_dir / "config.json");
    save_history_jsonl(result.history, outs.out_dir / "history.jsonl");

    const Checkpoint& last = result.checkpoints.back();
    CheckpointMeta meta{cfg.spec, last.epoch, cfg.train.seed, last.validation, last.config_fingerprint};
    ProductAeModel last_model = model_from_checkpoint(last, cfg.spec);
    save_checkpoint(last_model, meta,
                    last.optimizer ? last.optimizer : std::optional<OptimizerSnapshot>(trainer.optimizer_snapshot()),
                    outs.out_dir / "last.pae1");

    if (!cfg.train.validation.snr_grid_db.empty() && cfg.train.validation.words > 0) {
        const Checkpoint& best = select_checkpoint(result.checkpoints, cfg.train.checkpoint_snr_db);
        CheckpointMeta best_meta{cfg.spec, best.epoch, cfg.train.seed, best.validation, best.config_fingerprint};
        ProductAeModel best_model = model_from_checkpoint(best, cfg.spec);
        save_checkpoint(best_model, best_meta, best.optimizer, outs.out_dir / "best.pae1");
        std::cout << "best checkpoint: epoch " << best.epoch << " (validation BER at "
                  << format_double(cfg.train.checkpoint_snr_db) << " dB)\n";
    }
}

std::function<void(const Checkpoint&)> make_epoch_sink(Trainer& trainer, const RunConfig& cfg,
                                                       const TrainOutputs& outs) {
    return [&trainer, cfg, outs](const Checkpoint& cp) {
        if (outs.epoch_files) {
            CheckpointMeta meta{cfg.spec, cp.epoch, cfg.train.seed, cp.validation, cp.config_fingerprint};
            save_checkpoint(trainer.model(), meta, cp.optimizer, outs.out_dir / epoch_filename(cp.epoch));
        }
        std::cerr << "epoch " << cp.epoch;
        for (const ValidationPoint& vp : cp.validation)
            std::cerr << "  BER@" << format_double(vp.snr_db) << "dB=" << format_double(vp.ber);
        std::cerr << "\n";
    };
}

int run_train(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
              bool epoch_files) {
    RunConfig cfg = load_run_config(config_path);
    if (seed) cfg.train.seed = *seed;
    fs::create_directories(out_dir);

    Rng root(cfg.train.seed);
    ProductAeModel model(cfg.spec, &root);
    Trainer trainer(model, cfg.train, cfg.train_channel);
    trainer.set_config_fingerprint(config_fingerprint(cfg));
    TrainOutputs outs{out_dir, epoch_files};
    trainer.set_checkpoint_sink(make_epoch_sink(trainer, cfg, outs));

    TrainResult result = trainer.train();
    if (cfg.train.finetune.epochs > 0) {
        TrainResult ft = trainer.fine_tune();
        result.history.epochs.insert(result.history.epochs.end(), ft.history.epochs.begin(), ft.history.epochs.end());
        result.checkpoints.insert(result.checkpoints.end(), std::make_move_iterator(ft.checkpoints.begin()),
                                  std::make_move_iterator(ft.checkpoints.end()));
    }
    write_train_outputs(trainer, cfg, result, outs);
    return 0;
}

int run_finetune(const std::string& config_path, const std::string& checkpoint_path, const std::string& out_dir,
                 std::optional<std::size_t> epochs, bool epoch_files) {
    RunConfig cfg = load_run_config(config_path);
    LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    if (!(loaded.meta.spec == cfg.spec))
        throw ConfigError("finetune: checkpoint spec does not match the config spec");
    fs::create_directories(out_dir);

    Trainer trainer(loaded.model, cfg.train, cfg.train_channel);
    trainer.set_config_fingerprint(config_fingerprint(cfg));
    if (loaded.optimizer) trainer.restore_optimizer(*loaded.optimizer);
    TrainOutputs outs{out_dir, epoch_files};
    trainer.set_checkpoint_sink(make_epoch_sink(trainer, cfg, outs));

    const std::size_t ft_epochs = epochs.value_or(cfg.train.finetune.epochs);
    if (ft_epochs == 0) throw ConfigError("finetune: epochs must be >= 1 (set --epochs or train.finetune.epochs)");
    const std::size_t bs =
        cfg.train.finetune.sub_batch_size ? cfg.train.finetune.sub_batch_size : cfg.train.batch_size;
    TrainResult result = trainer.fine_tune(ft_epochs, cfg.train.finetune.sub_batch_count, bs);
    write_train_outputs(trainer, cfg, result, outs);
    return 0;
}

int run_eval(const std::string& checkpoint_path, const std::string& snrs, const std::string& channel,
             const std::string& csv_path, std::uint64_t seed, std::uint64_t min_errors, std::uint64_t max_blocks,
             std::size_t shards) {
    LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    const NeuralCodec codec(loaded.model);
    const ChannelKind kind = channel == "rayleigh" ? ChannelKind::RayleighFast : ChannelKind::Awgn;
    const StopRule stop{min_errors, max_blocks};
    SweepResult result = monte_carlo_sweep(codec, kind, parse_snr_grid(snrs), stop, seed, shards);
    save_sweep_csv(result, csv_path);
    std::cout << "wrote " << csv_path << " (" << result.points.size() << " points, codec " << result.codec_name
              << ")\n";
    return 0;
}

int run_baseline(const std::string& code, const std::string& snrs, const std::string& channel,
                 const std::string& csv_path, std::uint64_t seed, std::uint64_t min_errors, std::uint64_t max_blocks,
                 std::size_t bits, std::size_t n, std::size_t k, std::optional<double> design_snr,
                 std::uint64_t trials, const std::string& polar_spec_path, const std::string& c1_name,
                 const std::string& c2_name) {
    const ChannelKind kind = channel == "rayleigh" ? ChannelKind::RayleighFast : ChannelKind::Awgn;
    const StopRule stop{min_errors, max_blocks};
    const std::vector<double> grid = parse_snr_grid(snrs);

    std::unique_ptr<Codec> codec;
    if (code == "uncoded") {
        codec = std::make_unique<UncodedBpskCodec>(bits);
    } else if (code == "polar") {
        if (kind != ChannelKind::Awgn)
            throw ConfigError("baseline: the polar baseline is evaluated on AWGN only (no CSI model for fading)");
        PolarSpec spec;
        if (!polar_spec_path.empty()) {
            spec = load_polar_spec(polar_spec_path);
        } else {
            if (n == 0 || k == 0) throw ConfigError("baseline polar: --n and --k are required (or --polar-spec)");
            const double design = design_snr.value_or(0.5 * (grid.front() + grid.back()));
            spec = make_polar_spec(n, k, design, trials, seed);
        }
        codec = std::make_unique<PolarCodec>(std::move(spec));
    } else if (code == "product") {
        if (kind != ChannelKind::Awgn)
            throw ConfigError("baseline: the product/ML baseline is evaluated on AWGN only");
        auto c1 = named_component_code(c1_name);
        auto c2 = named_component_code(c2_name);
        if (!c1 || !c2)
            throw ConfigError("baseline product: --c1/--c2 must name component codes "
                              "(hamming74, spc<n>, rep<n>, identity<n>)");
        codec = std::make_unique<MlCodec>(
            make_product_ml_codec(*c1, *c2, "product-(" + c1_name + ")x(" + c2_name + ")-ml"));
    } else {
        throw ConfigError("baseline: --code must be uncoded|polar|product");
    }

    SweepResult result = monte_carlo_sweep(*codec, kind, grid, stop, seed);
    save_sweep_csv(result, csv_path);
    std::cout << "wrote " << csv_path << " (" << result.points.size() << " points, codec " << result.codec_name
              << ")\n";
    return 0;
}

int run_robustness(const std::string& config_path, const std::string& checkpoint_path, const std::string& csv_prefix,
                   std::optional<std::size_t> finetune_epochs, const std::string& snrs_override,
                   std::optional<std::uint64_t> seed) {
    RunConfig cfg = load_run_config(config_path);
    LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    if (!(loaded.meta.spec == cfg.spec))
        throw ConfigError("robustness: checkpoint spec does not match the config spec");

    ExperimentPlan plan = cfg.experiment.value_or(ExperimentPlan{});
    plan.train_channel = cfg.train_channel;
    if (!snrs_override.empty()) plan.snr_grid_db = parse_snr_grid(snrs_override);
    if (plan.snr_grid_db.empty())
        throw ConfigError("robustness: no SNR grid (set experiment.snrs in the config or pass --snrs)");
    if (seed) plan.eval_seed = *seed;

    RobustnessOptions opts;
    opts.finetune_epochs = finetune_epochs.value_or(plan.finetune_epochs);

    const RobustnessResult result =
        robustness_experiment(loaded.model, cfg.train, plan.train_channel, plan.test_channel, plan.snr_grid_db,
                              plan.stop, plan.eval_seed, opts);

    const std::string train_name = channel_kind_name(plan.train_channel);
    const std::string test_name = channel_kind_name(plan.test_channel);
    save_sweep_csv(result.base_on_train_channel, csv_prefix + "_base_" + train_name + ".csv");
    save_sweep_csv(result.base_on_test_channel, csv_prefix + "_base_" + test_name + ".csv");
    if (result.tuned_on_train_channel)
        save_sweep_csv(*result.tuned_on_train_channel, csv_prefix + "_tuned_" + train_name + ".csv");
    if (result.tuned_on_test_channel)
        save_sweep_csv(*result.tuned_on_test_channel, csv_prefix + "_tuned_" + test_name + ".csv");
    std::cout << "robustness sweeps written with prefix " << csv_prefix << "\n";
    return 0;
}

int run_adaptivity(const std::string& config_path, const std::string& checkpoint_path, const std::string& csv_prefix,
                   std::optional<std::size_t> epochs, const std::string& snrs_override,
                   std::optional<std::uint64_t> seed) {
    RunConfig cfg = load_run_config(config_path);
    LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
    if (!(loaded.meta.spec == cfg.spec))
        throw ConfigError("adaptivity: checkpoint spec does not match the config spec");

    ExperimentPlan plan = cfg.experiment.value_or(ExperimentPlan{});
    plan.train_channel = cfg.train_channel;
    if (!snrs_override.empty()) plan.snr_grid_db = parse_snr_grid(snrs_override);
    if (plan.snr_grid_db.empty())
        throw ConfigError("adaptivity: no SNR grid (set experiment.snrs in the config or pass --snrs)");
    if (seed) plan.eval_seed = *seed;
    const std::size_t ft_epochs = epochs.value_or(plan.finetune_epochs ? plan.finetune_epochs : 1);

    const AdaptivityResult result =
        adaptivity_experiment(loaded.model, cfg.train, plan.train_channel, plan.test_channel, ft_epochs,
                              plan.snr_grid_db, plan.stop, plan.eval_seed);

    const std::string old_name = channel_kind_name(plan.train_channel);
    const std::string new_name = channel_kind_name(plan.test_channel);
    save_sweep_csv(result.before_on_new_channel, csv_prefix + "_before_" + new_name + ".csv");
    save_sweep_csv(result.after_on_new_channel, csv_prefix + "_after_" + new_name + ".csv");
    save_sweep_csv(result.after_on_old_channel, csv_prefix + "_after_" + old_name + ".csv");
    CheckpointMeta meta{cfg.spec, ft_epochs, cfg.train.seed, {}, config_fingerprint(cfg)};
    save_checkpoint(result.adapted_model, meta, std::nullopt, csv_prefix + "_adapted.pae1");
    std::cout << "adaptivity sweeps written with prefix " << csv_prefix << "\n";
    return 0;
}

int run_construct_polar(std::size_t n, std::size_t k, double design_snr, std::uint64_t trials, std::uint64_t seed,
                        const std::string& out_path, const std::string& ber_csv_path) {
    const PolarSpec spec = make_polar_spec(n, k, design_snr, trials, seed);
    save_polar_spec(spec, out_path);
    if (!ber_csv_path.empty()) {
        std::ofstream csv(ber_csv_path, std::ios::binary);
        if (!csv) throw Error("cannot write " + ber_csv_path);
        write_bit_channel_csv(spec, csv);
    }
    std::cout << "wrote " << out_path << " (polar (" << spec.block_length << "," << spec.dimension << ") from mother length "
              << spec.mother_length << ")\n";
    return 0;
}

int run_export_curves(const std::string& out_path, const std::vector<std::string>& inputs) {
    if (inputs.empty()) throw ConfigError("export-curves: at least one input CSV required");
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write " + out_path);
    const std::string expected_header = "snr_db,ber,bler,bit_errors,block_errors,trials,capped";
    out << "label," << expected_header << "\n";
    for (const std::string& input : inputs) {
        std::ifstream in(input);
        if (!in) throw Error("cannot open " + input);
        std::string line;
        if (!std::getline(in, line) || line != expected_header)
            throw ConfigError("export-curves: " + input + " does not look like a sweep CSV");
        const std::string label = fs::path(input).stem().string();
        while (std::getline(in, line))
            if (!line.empty()) out << label << ',' << line << '\n';
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"ProductAE laboratory: train, evaluate and compare neural product codes"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train a model per the run config");
    std::string train_config, train_out;
    std::uint64_t train_seed = 0;
    bool train_seed_set = false, train_no_epoch_files = false;
    train->add_option("--config", train_config, "run config JSON")->required();
    train->add_option("--out", train_out, "output directory")->required();
    train->add_option("--seed", train_seed, "override train.seed")->each([&](const std::string&) {
        train_seed_set = true;
    });
    train->add_flag("--no-epoch-checkpoints", train_no_epoch_files, "write only best/last checkpoints");

    // finetune
    auto* finetune = app.add_subcommand("finetune", "large-batch fine-tuning of a checkpoint");
    std::string ft_config, ft_checkpoint, ft_out;
    std::size_t ft_epochs = 0;
    bool ft_epochs_set = false, ft_no_epoch_files = false;
    finetune->add_option("--config", ft_config, "run config JSON")->required();
    finetune->add_option("--checkpoint", ft_checkpoint, "input checkpoint")->required();
    finetune->add_option("--out", ft_out, "output directory")->required();
    finetune->add_option("--epochs", ft_epochs, "fine-tune epochs (default train.finetune.epochs)")
        ->each([&](const std::string&) { ft_epochs_set = true; });
    finetune->add_flag("--no-epoch-checkpoints", ft_no_epoch_files, "write only best/last checkpoints");

    // eval
    auto* eval = app.add_subcommand("eval", "Monte-Carlo BER/BLER sweep of a checkpoint");
    std::string ev_checkpoint, ev_snrs, ev_channel = "awgn", ev_csv;
    std::uint64_t ev_seed = 1, ev_min_errors = 100, ev_max_blocks = 1'000'000;
    std::size_t ev_shards = 1;
    eval->add_option("--checkpoint", ev_checkpoint, "model checkpoint")->required();
    eval->add_option("--snrs", ev_snrs, "SNR grid lo:hi:step (dB)")->required();
    eval->add_option("--channel", ev_channel, "awgn|rayleigh")->check(CLI::IsMember({"awgn", "rayleigh"}));
    eval->add_option("--csv", ev_csv, "output CSV path")->required();
    eval->add_option("--seed", ev_seed, "evaluation seed");
    eval->add_option("--min-errors", ev_min_errors, "stop after this many block errors");
    eval->add_option("--max-blocks", ev_max_blocks, "per-point block cap");
    eval->add_option("--shards", ev_shards, "RNG shard count");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "sweep a classical reference code");
    std::string bl_code, bl_snrs, bl_channel = "awgn", bl_csv, bl_polar_spec, bl_c1, bl_c2;
    std::uint64_t bl_seed = 1, bl_min_errors = 100, bl_max_blocks = 1'000'000, bl_trials = 100'000;
    std::size_t bl_bits = 100, bl_n = 0, bl_k = 0;
    double bl_design_snr = 0.0;
    bool bl_design_set = false;
    baseline->add_option("--code", bl_code, "uncoded|polar|product")->required()
        ->check(CLI::IsMember({"uncoded", "polar", "product"}));
    baseline->add_option("--snrs", bl_snrs, "SNR grid lo:hi:step (dB)")->required();
    baseline->add_option("--channel", bl_channel, "awgn|rayleigh")->check(CLI::IsMember({"awgn", "rayleigh"}));
    baseline->add_option("--csv", bl_csv, "output CSV path")->required();
    baseline->add_option("--seed", bl_seed, "evaluation seed");
    baseline->add_option("--min-errors", bl_min_errors, "stop after this many block errors");
    baseline->add_option("--max-blocks", bl_max_blocks, "per-point block cap");
    baseline->add_option("--bits", bl_bits, "uncoded: bits per block");
    baseline->add_option("--n", bl_n, "polar: blocklength");
    baseline->add_option("--k", bl_k, "polar: dimension");
    baseline->add_option("--design-snr", bl_design_snr, "polar: construction SNR (default grid midpoint)")
        ->each([&](const std::string&) { bl_design_set = true; });
    baseline->add_option("--trials", bl_trials, "polar: construction Monte-Carlo trials");
    baseline->add_option("--polar-spec", bl_polar_spec, "polar: load a constructed spec JSON");
    baseline->add_option("--c1", bl_c1, "product: first component (hamming74, spc<n>, rep<n>, identity<n>)");
    baseline->add_option("--c2", bl_c2, "product: second component");

    // robustness
    auto* robustness = app.add_subcommand("robustness", "evaluate a model on a channel it was not trained for");
    std::string rb_config, rb_checkpoint, rb_prefix, rb_snrs;
    std::size_t rb_ft_epochs = 0;
    bool rb_ft_set = false;
    std::uint64_t rb_seed = 0;
    bool rb_seed_set = false;
    robustness->add_option("--config", rb_config, "run config JSON")->required();
    robustness->add_option("--checkpoint", rb_checkpoint, "model checkpoint")->required();
    robustness->add_option("--csv-prefix", rb_prefix, "output CSV path prefix")->required();
    robustness->add_option("--finetune-epochs", rb_ft_epochs, "wider-SNR fine-tune arm epochs (0 skips)")
        ->each([&](const std::string&) { rb_ft_set = true; });
    robustness->add_option("--snrs", rb_snrs, "SNR grid override");
    robustness->add_option("--seed", rb_seed, "evaluation seed override")->each([&](const std::string&) {
        rb_seed_set = true;
    });

    // adaptivity
    auto* adaptivity = app.add_subcommand("adaptivity", "short retraining on a new channel");
    std::string ad_config, ad_checkpoint, ad_prefix, ad_snrs;
    std::size_t ad_epochs = 0;
    bool ad_epochs_set = false;
    std::uint64_t ad_seed = 0;
    bool ad_seed_set = false;
    adaptivity->add_option("--config", ad_config, "run config JSON")->required();
    adaptivity->add_option("--checkpoint", ad_checkpoint, "model checkpoint")->required();
    adaptivity->add_option("--csv-prefix", ad_prefix, "output CSV path prefix")->required();
    adaptivity->add_option("--epochs", ad_epochs, "adaptation epochs (default experiment.finetune_epochs)")
        ->each([&](const std::string&) { ad_epochs_set = true; });
    adaptivity->add_option("--snrs", ad_snrs, "SNR grid override");
    adaptivity->add_option("--seed", ad_seed, "evaluation seed override")->each([&](const std::string&) {
        ad_seed_set = true;
    });

    // construct-polar
    auto* construct = app.add_subcommand("construct-polar", "build a punctured polar code spec");
    std::size_t cp_n = 0, cp_k = 0;
    double cp_design = 0.0;
    std::uint64_t cp_trials = 100'000, cp_seed = 1;
    std::string cp_out, cp_ber_csv;
    construct->add_option("--n", cp_n, "blocklength")->required();
    construct->add_option("--k", cp_k, "dimension")->required();
    construct->add_option("--design-snr", cp_design, "construction SNR (dB)")->required();
    construct->add_option("--trials", cp_trials, "genie Monte-Carlo trials");
    construct->add_option("--seed", cp_seed, "construction seed");
    construct->add_option("--out", cp_out, "output spec JSON")->required();
    construct->add_option("--ber-csv", cp_ber_csv, "also export per-bit-channel BER estimates");

    // export-curves
    auto* export_curves = app.add_subcommand("export-curves", "merge sweep CSVs with a label column");
    std::string xc_out;
    std::vector<std::string> xc_inputs;
    export_curves->add_option("--out", xc_out, "merged CSV path")->required();
    export_curves->add_option("inputs", xc_inputs, "input sweep CSVs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*train)
            return run_train(train_config, train_out,
                             train_seed_set ? std::optional<std::uint64_t>(train_seed) : std::nullopt,
                             !train_no_epoch_files);
        if (*finetune)
            return run_finetune(ft_config, ft_checkpoint, ft_out,
                                ft_epochs_set ? std::optional<std::size_t>(ft_epochs) : std::nullopt,
                                !ft_no_epoch_files);
        if (*eval)
            return run_eval(ev_checkpoint, ev_snrs, ev_channel, ev_csv, ev_seed, ev_min_errors, ev_max_blocks,
                            ev_shards);
        if (*baseline)
            return run_baseline(bl_code, bl_snrs, bl_channel, bl_csv, bl_seed, bl_min_errors, bl_max_blocks, bl_bits,
                                bl_n, bl_k, bl_design_set ? std::optional<double>(bl_design_snr) : std::nullopt,
                                bl_trials, bl_polar_spec, bl_c1, bl_c2);
        if (*robustness)
            return run_robustness(rb_config, rb_checkpoint, rb_prefix,
                                  rb_ft_set ? std::optional<std::size_t>(rb_ft_epochs) : std::nullopt, rb_snrs,
                                  rb_seed_set ? std::optional<std::uint64_t>(rb_seed) : std::nullopt);
        if (*adaptivity)
            return run_adaptivity(ad_config, ad_checkpoint, ad_prefix,
                                  ad_epochs_set ? std::optional<std::size_t>(ad_epochs) : std::nullopt, ad_snrs,
                                  ad_seed_set ? std::optional<std::uint64_t>(ad_seed) : std::nullopt);
        if (*construct) return run_construct_polar(cp_n, cp_k, cp_design, cp_trials, cp_seed, cp_out, cp_ber_csv);
        if (*export_curves) return run_export_curves(xc_out, xc_inputs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}

}  // namespace pae
