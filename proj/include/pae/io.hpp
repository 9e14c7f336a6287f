#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pae/eval.hpp"
#include "pae/training.hpp"

namespace pae {

/// Everything a run needs: model spec, training channel and knobs, and an
/// optional experiment plan. Parsing rejects unknown keys; serialization
/// writes every field (parse -> dump -> parse is a fixed point).
struct RunConfig {
    ProductAeSpec spec;
    ChannelKind train_channel = ChannelKind::Awgn;
    TrainConfig train;
    std::optional<ExperimentPlan> experiment;
};

RunConfig parse_run_config(const std::string& json_text);
std::string dump_run_config(const RunConfig& cfg);  // sorted keys, 2-space indent
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

/// FNV-1a over the canonical serialization; stored in checkpoints.
std::uint64_t config_fingerprint(const RunConfig& cfg);

// ---- checkpoint files -------------------------------------------------------
//
// Layout: magic "PAE1" | version u32 LE | header length u64 LE | header JSON
// (UTF-8) | payload of little-endian IEEE-754 doubles. The payload holds the
// parameters in canonical order (E1 layers first-to-last, weights row-major
// then bias; E2; then D2^(1), D1^(1), ..., D2^(I), D1^(I)); when optimizer
// state is present, each parameter is followed by its Adam first and second
// moments (same order) plus an 8-byte step counter per parameter tensor.

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
    ProductAeSpec spec;
    std::size_t epoch = 0;
    std::uint64_t seed = 0;
    std::vector<ValidationPoint> validation;
    std::uint64_t config_fingerprint = 0;
};

struct LoadedCheckpoint {
    ProductAeModel model;
    CheckpointMeta meta;
    std::optional<OptimizerSnapshot> optimizer;
};

void save_checkpoint(const ProductAeModel& model, const CheckpointMeta& meta,
                     const std::optional<OptimizerSnapshot>& optimizer, const std::filesystem::path& path);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// ---- results ----------------------------------------------------------------

/// CSV: header snr_db,ber,bler,bit_errors,block_errors,trials,capped then one
/// row per grid point, floats in full-precision decimal.
void write_sweep_csv(const SweepResult& result, std::ostream& out);
void save_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

/// One JSON object per line: epoch, loss, iteration counts, validation.
void write_history_jsonl(const TrainHistory& history, std::ostream& out);
void save_history_jsonl(const TrainHistory& history, const std::filesystem::path& path);

// ---- polar spec files ---------------------------------------------------------

std::string dump_polar_spec(const PolarSpec& spec);
PolarSpec parse_polar_spec(const std::string& json_text);
void save_polar_spec(const PolarSpec& spec, const std::filesystem::path& path);
PolarSpec load_polar_spec(const std::filesystem::path& path);
void write_bit_channel_csv(const PolarSpec& spec, std::ostream& out);

// ---- misc ---------------------------------------------------------------------

/// "lo:hi:step" (inclusive of both ends when step divides the span) or a
/// single value. step must be positive unless lo == hi.
std::vector<double> parse_snr_grid(const std::string& text);

/// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);

const char* scheme_name(ScheduleScheme s);
const char* batch_policy_name(BatchPolicy p);

}  // namespace pae
