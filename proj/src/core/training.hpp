#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "core/data.hpp"
#include "core/model.hpp"

namespace xrmdn {

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t lookback_k = 144;
    std::size_t batch_len = 144;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int n_components = 2;
    int n_units = 8;
    std::uint64_t seed = 1;
    std::optional<double> grad_clip = 10.0;  // global gradient norm
    ActivationConfig activation;

    enum class UpdatePer { batch, epoch };
    UpdatePer update_per = UpdatePer::batch;

    std::size_t early_stop_patience = 0;  // 0 disables early stopping
    double validation_fraction = 0.1;
};

void validate(const TrainConfig& cfg);

/// Adam moment accumulators over the canonical flat parameter order.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;
};

struct TrainReport {
    std::vector<double> epoch_nll;  // mean per-step NLL of each epoch
    double initial_nll = 0.0;       // mean per-step NLL before any update
    double final_nll = 0.0;         // mean per-step NLL after the last update
    std::size_t epochs_run = 0;
    double wall_seconds = 0.0;
};

/// One rollout step: the model input [normalized demand ; features] at time t
/// and the normalized demand observed at t+1.
struct StepSample {
    std::vector<double> input;
    double target = 0.0;
};

/// Builds the T-1 step samples of a (normalized) dataset.
[[nodiscard]] std::vector<StepSample> make_rollout(const Dataset& normalized);

/// Negative log-likelihood of the window under the model, rolling the
/// recurrent state forward with the observed demands.
[[nodiscard]] double nll(const XrmdnModelT<double>& model, std::span<const StepSample> window,
                         const RecurrentState& init);

/// Exact reverse-mode gradient of nll with respect to every parameter.
/// Gradients flow through the unrolled recurrence inside the window
/// (including the forecast-dependent squared residual) and stop at the
/// window boundary.
[[nodiscard]] ModelShaped grad_nll(const XrmdnModelT<double>& model,
                                   std::span<const StepSample> window,
                                   const RecurrentState& init);

/// Result of one fused forward+backward pass over a window.
struct BatchGradients {
    ModelShaped grads;
    RecurrentState final_state;  // values only; gradient tape is dropped
    double loss = 0.0;
};

[[nodiscard]] BatchGradients batch_backward(const XrmdnModelT<double>& model,
                                            std::span<const StepSample> window,
                                            const RecurrentState& init);

/// Bias-corrected Adam step, with optional global-norm gradient clipping
/// applied first when cfg.grad_clip is set.
void adam_update(XrmdnModelT<double>& model, const ModelShaped& grads, AdamState& adam,
                 const TrainConfig& cfg);

struct TrainResult {
    XrmdnModel model;
    TrainReport report;
};

/// Full training loop: per epoch, walk the series in consecutive batch
/// segments; the first segment starts from the uniform-weight / demand-mean /
/// demand-variance state, later segments carry the previous segment's final
/// state with the gradient cut at the boundary. One Adam step per segment
/// (or per epoch with UpdatePer::epoch). The trained model carries the
/// normalization stats and the warm-start state for evaluation.
[[nodiscard]] TrainResult train(const Dataset& ds, const TrainConfig& cfg,
                                ModelKind kind = ModelKind::xrmdn);

}  // namespace xrmdn
