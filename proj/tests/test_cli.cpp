#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "pae/cli.hpp"
#include "pae/io.hpp"

using namespace pae;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("pae");
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_dispatch(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
    fs::path path;
    explicit TempDir(const char* tag) {
        path = fs::temp_directory_path() / (std::string("pae-cli-") + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const char* name) const { return (path / name).string(); }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

const char* kTinyConfig = R"({
  "spec": {
    "n1": 4, "k1": 2, "n2": 4, "k2": 2,
    "iterations": 2, "feature_size": 2,
    "encoder1_hidden_layers": 1, "encoder1_hidden_width": 8,
    "encoder2_hidden_layers": 1, "encoder2_hidden_width": 8,
    "decoder_hidden_layers": 1, "decoder_hidden_width": 8,
    "last_decoder_hidden_layers": 1, "last_decoder_hidden_width": 8
  },
  "train": {
    "epochs": 2, "batch_size": 64, "t_dec": 2, "t_enc": 1,
    "encoder_snr": {"point": 2.0},
    "lr_enc": 0.001, "lr_dec": 0.001,
    "validation": {"snrs": [1.0, 3.0], "words": 200},
    "checkpoint_snr_db": 3.0,
    "seed": 5
  },
  "experiment": {
    "kind": "robustness", "test_channel": "rayleigh",
    "snrs": [2.0, 4.0], "finetune_epochs": 1,
    "min_block_errors": 20, "max_blocks": 400, "eval_seed": 9
  }
})";

std::string write_config(const TempDir& tmp) {
    const std::string path = tmp.str("config.json");
    std::ofstream out(path);
    out << kTinyConfig;
    return path;
}

std::vector<std::string> csv_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

double csv_field(const std::string& line, std::size_t index) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; i <= index; ++i) std::getline(ss, cell, ',');
    return std::stod(cell);
}

}  // namespace

TEST_CASE("train writes history, config and checkpoints") {
    TempDir tmp("train");
    const std::string cfg = write_config(tmp);
    CHECK(run_cli({"train", "--config", cfg, "--out", tmp.str("out")}) == 0);

    CHECK(fs::exists(tmp.path / "out/config.json"));
    CHECK(fs::exists(tmp.path / "out/history.jsonl"));
    CHECK(fs::exists(tmp.path / "out/last.pae1"));
    CHECK(fs::exists(tmp.path / "out/best.pae1"));
    CHECK(fs::exists(tmp.path / "out/checkpoint_epoch_0000.pae1"));
    CHECK(fs::exists(tmp.path / "out/checkpoint_epoch_0002.pae1"));
    CHECK(line_count(read_file(tmp.path / "out/history.jsonl")) == 3);  // epochs 0..2

    const LoadedCheckpoint last = load_checkpoint(tmp.path / "out/last.pae1");
    CHECK(last.meta.epoch == 2);
    CHECK(last.optimizer.has_value());
    CHECK(last.meta.validation.size() == 2);

    SUBCASE("the saved config is a fixed point") {
        const std::string text = read_file(tmp.path / "out/config.json");
        CHECK(dump_run_config(parse_run_config(text)) == text);
    }
}

TEST_CASE("train with zero epochs checkpoints the initialized model") {
    TempDir tmp("train0");
    const std::string cfg_path = tmp.str("config.json");
    {
        RunConfig cfg = parse_run_config(kTinyConfig);
        cfg.train.epochs = 0;
        std::ofstream out(cfg_path);
        out << dump_run_config(cfg);
    }
    CHECK(run_cli({"train", "--config", cfg_path, "--out", tmp.str("out")}) == 0);

    const LoadedCheckpoint loaded = load_checkpoint(tmp.path / "out/checkpoint_epoch_0000.pae1");
    CHECK(loaded.meta.epoch == 0);

    // identical to a freshly initialized model with the same seed
    const RunConfig cfg = parse_run_config(kTinyConfig);
    Rng root(cfg.train.seed);
    ProductAeModel fresh(cfg.spec, &root);
    const auto a = fresh.parameter_values();
    const auto b = loaded.model.parameter_values();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].values() == b[i].values());
}

TEST_CASE("seeded runs are byte-identical end to end") {
    TempDir tmp("det");
    const std::string cfg = write_config(tmp);
    CHECK(run_cli({"train", "--config", cfg, "--out", tmp.str("a")}) == 0);
    CHECK(run_cli({"train", "--config", cfg, "--out", tmp.str("b")}) == 0);
    CHECK(read_file(tmp.path / "a/last.pae1") == read_file(tmp.path / "b/last.pae1"));
    CHECK(read_file(tmp.path / "a/best.pae1") == read_file(tmp.path / "b/best.pae1"));
    CHECK(read_file(tmp.path / "a/history.jsonl") == read_file(tmp.path / "b/history.jsonl"));

    CHECK(run_cli({"eval", "--checkpoint", tmp.str("a/last.pae1"), "--snrs", "0:2:1", "--channel", "awgn", "--csv",
                   tmp.str("a.csv"), "--seed", "3", "--min-errors", "20", "--max-blocks", "300"}) == 0);
    CHECK(run_cli({"eval", "--checkpoint", tmp.str("b/last.pae1"), "--snrs", "0:2:1", "--channel", "awgn", "--csv",
                   tmp.str("b.csv"), "--seed", "3", "--min-errors", "20", "--max-blocks", "300"}) == 0);
    CHECK(read_file(tmp.str("a.csv")) == read_file(tmp.str("b.csv")));
}

TEST_CASE("eval produces one CSV row per grid point") {
    TempDir tmp("eval");
    const std::string cfg = write_config(tmp);
    REQUIRE(run_cli({"train", "--config", cfg, "--out", tmp.str("out"), "--no-epoch-checkpoints"}) == 0);
    CHECK_FALSE(fs::exists(tmp.path / "out/checkpoint_epoch_0000.pae1"));
    CHECK(run_cli({"eval", "--checkpoint", tmp.str("out/last.pae1"), "--snrs", "0:4:1", "--channel", "awgn", "--csv",
                   tmp.str("sweep.csv"), "--min-errors", "10", "--max-blocks", "200"}) == 0);
    const auto lines = csv_lines(tmp.str("sweep.csv"));
    REQUIRE(lines.size() == 6);  // header + 5 points
    CHECK(lines[0] == "snr_db,ber,bler,bit_errors,block_errors,trials,capped");
    CHECK(csv_field(lines[1], 0) == 0.0);
    CHECK(csv_field(lines[5], 0) == 4.0);
}

TEST_CASE("uncoded baseline reproduces the Q-function value at 0 dB") {
    TempDir tmp("uncoded");
    CHECK(run_cli({"baseline", "--code", "uncoded", "--bits", "100", "--snrs", "0:0:1", "--csv", tmp.str("u.csv"),
                   "--min-errors", "100000", "--max-blocks", "10000", "--seed", "2"}) == 0);
    const auto lines = csv_lines(tmp.str("u.csv"));
    REQUIRE(lines.size() == 2);
    const double ber = csv_field(lines[1], 1);
    const double expect = 0.15865525393145707;
    const double se = std::sqrt(expect * (1 - expect) / 1e6);
    CHECK(std::fabs(ber - expect) < 3.0 * se);
}

TEST_CASE("polar and product baselines run") {
    TempDir tmp("classical");
    CHECK(run_cli({"baseline", "--code", "polar", "--n", "8", "--k", "4", "--trials", "20000", "--snrs", "0:4:2",
                   "--csv", tmp.str("polar.csv"), "--min-errors", "30", "--max-blocks", "2000"}) == 0);
    const auto polar_lines = csv_lines(tmp.str("polar.csv"));
    REQUIRE(polar_lines.size() == 4);
    // BER falls with SNR for a working code
    CHECK(csv_field(polar_lines[3], 1) < csv_field(polar_lines[1], 1));

    CHECK(run_cli({"baseline", "--code", "product", "--c1", "spc3", "--c2", "spc3", "--snrs", "2:2:1", "--csv",
                   tmp.str("product.csv"), "--min-errors", "20", "--max-blocks", "500"}) == 0);
    REQUIRE(csv_lines(tmp.str("product.csv")).size() == 2);

    // polar on fading has no CSI model and must be refused
    CHECK(run_cli({"baseline", "--code", "polar", "--n", "8", "--k", "4", "--snrs", "0:0:1", "--channel", "rayleigh",
                   "--csv", tmp.str("bad.csv")}) != 0);
}

TEST_CASE("construct-polar emits a loadable spec and a BER table") {
    TempDir tmp("construct");
    CHECK(run_cli({"construct-polar", "--n", "6", "--k", "3", "--design-snr", "1.0", "--trials", "5000", "--seed",
                   "4", "--out", tmp.str("polar.json"), "--ber-csv", tmp.str("ber.csv")}) == 0);
    const PolarSpec spec = load_polar_spec(tmp.str("polar.json"));
    CHECK(spec.mother_length == 8);
    CHECK(spec.block_length == 6);
    CHECK(spec.dimension == 3);
    CHECK(spec.puncture_pattern.size() == 2);
    CHECK(csv_lines(tmp.str("ber.csv")).size() == 9);

    CHECK(run_cli({"baseline", "--code", "polar", "--polar-spec", tmp.str("polar.json"), "--snrs", "2:2:1", "--csv",
                   tmp.str("punctured.csv"), "--min-errors", "10", "--max-blocks", "300"}) == 0);
}

TEST_CASE("export-curves merges sweeps with labels") {
    TempDir tmp("merge");
    CHECK(run_cli({"baseline", "--code", "uncoded", "--bits", "10", "--snrs", "0:1:1", "--csv", tmp.str("one.csv"),
                   "--min-errors", "10", "--max-blocks", "100"}) == 0);
    CHECK(run_cli({"baseline", "--code", "uncoded", "--bits", "20", "--snrs", "0:1:1", "--csv", tmp.str("two.csv"),
                   "--min-errors", "10", "--max-blocks", "100"}) == 0);
    CHECK(run_cli({"export-curves", "--out", tmp.str("merged.csv"), tmp.str("one.csv"), tmp.str("two.csv")}) == 0);
    const auto lines = csv_lines(tmp.str("merged.csv"));
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "label,snr_db,ber,bler,bit_errors,block_errors,trials,capped");
    CHECK(lines[1].rfind("one,", 0) == 0);
    CHECK(lines[3].rfind("two,", 0) == 0);
}

TEST_CASE("finetune continues from a checkpoint") {
    TempDir tmp("finetune");
    const std::string cfg = write_config(tmp);
    REQUIRE(run_cli({"train", "--config", cfg, "--out", tmp.str("out"), "--no-epoch-checkpoints"}) == 0);
    CHECK(run_cli({"finetune", "--config", cfg, "--checkpoint", tmp.str("out/last.pae1"), "--out", tmp.str("ft"),
                   "--epochs", "1"}) == 0);
    const LoadedCheckpoint tuned = load_checkpoint(tmp.str("ft/last.pae1"));
    CHECK(tuned.meta.epoch == 1);
    CHECK(fs::exists(tmp.path / "ft/history.jsonl"));
}

TEST_CASE("robustness and adaptivity pipelines run end to end") {
    TempDir tmp("rob");
    const std::string cfg = write_config(tmp);
    REQUIRE(run_cli({"train", "--config", cfg, "--out", tmp.str("out"), "--no-epoch-checkpoints"}) == 0);

    CHECK(run_cli({"robustness", "--config", cfg, "--checkpoint", tmp.str("out/last.pae1"), "--csv-prefix",
                   tmp.str("rob")}) == 0);
    CHECK(fs::exists(tmp.str("rob_base_awgn.csv")));
    CHECK(fs::exists(tmp.str("rob_base_rayleigh.csv")));
    CHECK(fs::exists(tmp.str("rob_tuned_awgn.csv")));
    CHECK(fs::exists(tmp.str("rob_tuned_rayleigh.csv")));

    CHECK(run_cli({"adaptivity", "--config", cfg, "--checkpoint", tmp.str("out/last.pae1"), "--csv-prefix",
                   tmp.str("adapt"), "--epochs", "1"}) == 0);
    CHECK(fs::exists(tmp.str("adapt_before_rayleigh.csv")));
    CHECK(fs::exists(tmp.str("adapt_after_rayleigh.csv")));
    CHECK(fs::exists(tmp.str("adapt_after_awgn.csv")));
    CHECK(fs::exists(tmp.str("adapt_adapted.pae1")));
}

TEST_CASE("bad invocations exit nonzero") {
    TempDir tmp("bad");
    CHECK(run_cli({"eval", "--checkpoint", tmp.str("missing.pae1"), "--snrs", "0:1:1", "--csv",
                   tmp.str("x.csv")}) != 0);
    CHECK(run_cli({"baseline", "--code", "magic", "--snrs", "0:1:1", "--csv", tmp.str("y.csv")}) != 0);
    CHECK(run_cli({"nonsense"}) != 0);
    CHECK(run_cli({}) != 0);
    CHECK(run_cli({"train", "--config", tmp.str("missing.json"), "--out", tmp.str("o")}) != 0);
}
