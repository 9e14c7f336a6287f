#include "pae/optim.hpp"

#include <cmath>

#include "pae/errors.hpp"

namespace pae {

Adam::Adam(std::vector<Var> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    states_.reserve(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const Var& p = params_[i];
        if (!p || !p->requires_grad) throw UsageError("Adam: non-trainable parameter registered");
        index_[p.get()] = i;
        states_.push_back(AdamState{Tensor::zeros(p->value.shape()), Tensor::zeros(p->value.shape()), 0});
    }
}

void Adam::step() { step(params_); }

void Adam::step(const std::vector<Var>& subset) {
    for (const Var& p : subset) step_one(p);
}

void Adam::step_one(const Var& param) {
    auto it = index_.find(param.get());
    if (it == index_.end()) throw UsageError("Adam::step: parameter not registered with this optimizer");
    AdamState& st = states_[it->second];
    param->ensure_grad();
    const Tensor& g = param->grad;
    if (!g.all_finite())
        throw TrainingError("Adam::step: non-finite gradient encountered");

    st.step_count += 1;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(st.step_count));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(st.step_count));
    double* m = st.first_moment.data();
    double* v = st.second_moment.data();
    double* p = param->value.data();
    const double* gp = g.data();
    for (std::size_t i = 0, e = g.size(); i < e; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * gp[i];
        v[i] = b2 * v[i] + (1.0 - b2) * gp[i] * gp[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
}

void Adam::zero_grad() { zero_grads(params_); }

AdamState& Adam::state_for(const Var& param) {
    auto it = index_.find(param.get());
    if (it == index_.end()) throw UsageError("Adam::state_for: parameter not registered");
    return states_[it->second];
}

const AdamState& Adam::state_for(const Var& param) const {
    auto it = index_.find(param.get());
    if (it == index_.end()) throw UsageError("Adam::state_for: parameter not registered");
    return states_[it->second];
}

void Adam::reset_state() {
    for (AdamState& st : states_) {
        st.first_moment.fill(0.0);
        st.second_moment.fill(0.0);
        st.step_count = 0;
    }
}

GradientAccumulator::GradientAccumulator(std::vector<Var> params, std::size_t sub_batch_count,
                                         std::size_t sub_batch_size)
    : params_(std::move(params)), sub_batch_count_(sub_batch_count), sub_batch_size_(sub_batch_size) {
    if (sub_batch_count_ == 0 || sub_batch_size_ == 0)
        throw ConfigError("GradientAccumulator: sub-batch count and size must be positive");
    running_.reserve(params_.size());
    for (const Var& p : params_) running_.push_back(Tensor::zeros(p->value.shape()));
}

void GradientAccumulator::accumulate(const Var& sub_batch_loss, std::size_t batch_rows) {
    if (batch_rows != sub_batch_size_)
        throw UsageError("GradientAccumulator: inconsistent sub-batch size " + std::to_string(batch_rows) +
                         " (expected " + std::to_string(sub_batch_size_) + ")");
    if (seen_ >= sub_batch_count_)
        throw UsageError("GradientAccumulator: more sub-batches than configured");
    zero_grads(params_);
    backward(sub_batch_loss, 1.0 / static_cast<double>(sub_batch_count_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        params_[i]->ensure_grad();
        const double* src = params_[i]->grad.data();
        double* dst = running_[i].data();
        for (std::size_t j = 0, e = running_[i].size(); j < e; ++j) dst[j] += src[j];
    }
    ++seen_;
}

void GradientAccumulator::publish_and_reset() {
    if (!complete())
        throw UsageError("GradientAccumulator: step requested after " + std::to_string(seen_) + " of " +
                         std::to_string(sub_batch_count_) + " sub-batches");
    for (std::size_t i = 0; i < params_.size(); ++i) {
        params_[i]->ensure_grad();
        double* dst = params_[i]->grad.data();
        const double* src = running_[i].data();
        for (std::size_t j = 0, e = running_[i].size(); j < e; ++j) dst[j] = src[j];
        running_[i].fill(0.0);
    }
    seen_ = 0;
}

void accumulate_and_step(GradientAccumulator& acc, const std::vector<Var>& sub_batch_losses,
                         std::size_t sub_batch_rows, Adam& optimizer, const std::vector<Var>& step_params) {
    if (sub_batch_losses.size() != acc.sub_batch_count())
        throw UsageError("accumulate_and_step: expected " + std::to_string(acc.sub_batch_count()) + " losses, got " +
                         std::to_string(sub_batch_losses.size()));
    for (const Var& loss : sub_batch_losses) acc.accumulate(loss, sub_batch_rows);
    acc.publish_and_reset();
    optimizer.step(step_params);
}

}  // namespace pae
