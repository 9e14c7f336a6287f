#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pae/autodiff.hpp"
#include "pae/tensor.hpp"

namespace pae {

struct AdamConfig {
    double learning_rate = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Per-parameter Adam state. step_count increases by exactly one each time
/// the owning parameter is stepped.
struct AdamState {
    Tensor first_moment;
    Tensor second_moment;
    std::uint64_t step_count = 0;
};

/// Adam over a fixed set of parameters. step() may be restricted to a subset
/// (per-pair decoder schedules); untouched parameters keep their moments and
/// step counts.
class Adam {
  public:
    Adam(std::vector<Var> params, AdamConfig cfg);

    /// Apply one update to every registered parameter using node->grad.
    void step();
    /// Apply one update to `subset` only (each must be registered).
    void step(const std::vector<Var>& subset);

    void zero_grad();

    const std::vector<Var>& params() const { return params_; }
    AdamConfig& config() { return cfg_; }
    const AdamConfig& config() const { return cfg_; }

    AdamState& state_for(const Var& param);
    const AdamState& state_for(const Var& param) const;

    /// Drop all moments and step counts (fine-tune reset flag).
    void reset_state();

  private:
    void step_one(const Var& param);

    std::vector<Var> params_;
    AdamConfig cfg_;
    std::unordered_map<const Node*, std::size_t> index_;
    std::vector<AdamState> states_;
};

/// Accumulates (1/L)-scaled gradients of L sub-batch losses so that one
/// optimizer step equals a single step over the concatenated batch of
/// L * B_s samples. Sub-batch sizes must all equal B_s.
class GradientAccumulator {
  public:
    GradientAccumulator(std::vector<Var> params, std::size_t sub_batch_count, std::size_t sub_batch_size);

    /// Backpropagate one sub-batch loss with seed 1/L and fold the result
    /// into the running gradient. `batch_rows` is the sub-batch's size.
    void accumulate(const Var& sub_batch_loss, std::size_t batch_rows);

    bool complete() const { return seen_ == sub_batch_count_; }
    std::size_t seen() const { return seen_; }
    std::size_t sub_batch_count() const { return sub_batch_count_; }
    std::size_t sub_batch_size() const { return sub_batch_size_; }

    /// Copy the running gradient into the parameters' grad slots and reset.
    /// Call exactly when complete(), then take the optimizer step.
    void publish_and_reset();

  private:
    std::vector<Var> params_;
    std::vector<Tensor> running_;
    std::size_t sub_batch_count_;
    std::size_t sub_batch_size_;
    std::size_t seen_ = 0;
};

/// Run the whole virtual batch: accumulate every loss in `sub_batch_losses`
/// (all of size B_s), then take exactly one optimizer step on `step_params`.
void accumulate_and_step(GradientAccumulator& acc, const std::vector<Var>& sub_batch_losses,
                         std::size_t sub_batch_rows, Adam& optimizer, const std::vector<Var>& step_params);

}  // namespace pae
