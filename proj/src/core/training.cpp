#include "core/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "core/autodiff.hpp"

namespace xrmdn {

void validate(const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (cfg.batch_len < 1) throw ConfigError("batch_len must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (cfg.n_components < 1) throw ConfigError("n_components must be >= 1");
    if (cfg.n_units < 2) throw ConfigError("n_units must be >= 2");
    if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0) ||
        !(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0)) {
        throw ConfigError("adam betas must lie in [0, 1)");
    }
    if (!(cfg.adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
    if (cfg.grad_clip && !(*cfg.grad_clip > 0.0)) throw ConfigError("grad_clip must be positive");
    if (cfg.early_stop_patience > 0 &&
        !(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0)) {
        throw ConfigError("validation_fraction must lie in (0, 1) when early stopping is on");
    }
    validate(cfg.activation);
}

std::vector<StepSample> make_rollout(const Dataset& normalized) {
    if (normalized.records.size() < 2) {
        throw DataError("need at least 2 records to build a rollout");
    }
    std::vector<StepSample> out;
    out.reserve(normalized.records.size() - 1);
    for (std::size_t t = 0; t + 1 < normalized.records.size(); ++t) {
        const DemandRecord& rec = normalized.records[t];
        StepSample s;
        s.input.reserve(1 + rec.features.size());
        s.input.push_back(rec.demand);
        s.input.insert(s.input.end(), rec.features.begin(), rec.features.end());
        s.target = normalized.records[t + 1].demand;
        out.push_back(std::move(s));
    }
    return out;
}

double nll(const XrmdnModelT<double>& model, std::span<const StepSample> window,
           const RecurrentState& init) {
    if (window.empty()) throw DataError("nll of an empty window");
    RecurrentState state = init;
    double loss = 0.0;
    for (const StepSample& s : window) {
        const MixtureForecast forecast = xrmdn_step(model, std::span<const double>(s.input), state);
        loss -= detail::gmm_log_pdf_t(s.target, forecast);
        state = advance_state(state, forecast, s.target);
    }
    return loss;
}

BatchGradients batch_backward(const XrmdnModelT<double>& model, std::span<const StepSample> window,
                              const RecurrentState& init) {
    if (window.empty()) throw DataError("gradient of an empty window");

    thread_local ad::Tape tape;
    thread_local std::vector<double> node_grads;
    tape.clear();

    // Parameters become the first leaves so their gradients can be read back
    // by position in the canonical order.
    XrmdnModelT<ad::Var> lifted;
    lifted.kind = model.kind;
    lifted.n_components = model.n_components;
    lifted.n_units = model.n_units;
    lifted.input_width = model.input_width;
    lifted.activation = model.activation;
    auto lift_subnet = [&](const SubnetParamsT<double>& src, SubnetParamsT<ad::Var>& dst) {
        dst.recurrent = src.recurrent;
        dst.tanh_in_w.resize(src.tanh_in_w.size());
        dst.tanh_in_b.resize(src.tanh_in_b.size());
        dst.tanh_rec_w.resize(src.tanh_rec_w.size());
        dst.tanh_rec_b.resize(src.tanh_rec_b.size());
        dst.mix_w.resize(src.mix_w.size());
        dst.mix_b.resize(src.mix_b.size());
        for (auto& row : dst.mix_w) row.clear();
        dst.direct_in_w.clear();
    };
    lift_subnet(model.wrnn, lifted.wrnn);
    lift_subnet(model.mrnn, lifted.mrnn);
    lift_subnet(model.vrnn, lifted.vrnn);
    {
        // visit both models in lockstep: sizes were mirrored above, values
        // fill in canonical order
        const SubnetParamsT<double>* srcs[3] = {&model.wrnn, &model.mrnn, &model.vrnn};
        SubnetParamsT<ad::Var>* dsts[3] = {&lifted.wrnn, &lifted.mrnn, &lifted.vrnn};
        for (int s = 0; s < 3; ++s) {
            const auto& src = *srcs[s];
            auto& dst = *dsts[s];
            for (double w : src.direct_in_w) dst.direct_in_w.push_back(ad::make_leaf(tape, w));
            dst.direct_in_b = ad::make_leaf(tape, src.direct_in_b);
            for (std::size_t k = 0; k < src.tanh_in_w.size(); ++k) {
                for (double w : src.tanh_in_w[k]) dst.tanh_in_w[k].push_back(ad::make_leaf(tape, w));
                dst.tanh_in_b[k] = ad::make_leaf(tape, src.tanh_in_b[k]);
            }
            if (src.recurrent) {
                dst.direct_rec_w = ad::make_leaf(tape, src.direct_rec_w);
                dst.direct_rec_b = ad::make_leaf(tape, src.direct_rec_b);
                for (std::size_t k = 0; k < src.tanh_rec_w.size(); ++k) {
                    dst.tanh_rec_w[k] = ad::make_leaf(tape, src.tanh_rec_w[k]);
                    dst.tanh_rec_b[k] = ad::make_leaf(tape, src.tanh_rec_b[k]);
                }
            }
            for (std::size_t i = 0; i < src.mix_w.size(); ++i) {
                for (double w : src.mix_w[i]) dst.mix_w[i].push_back(ad::make_leaf(tape, w));
                dst.mix_b[i] = ad::make_leaf(tape, src.mix_b[i]);
            }
        }
    }
    const std::size_t n_params = tape.size();

    // Initial state enters as constants: gradient flow is cut at the window
    // boundary.
    RecurrentStateT<ad::Var> state;
    for (double x : init.eta_prev) state.eta_prev.push_back(ad::make_leaf(tape, x));
    for (double x : init.mu_prev) state.mu_prev.push_back(ad::make_leaf(tape, x));
    for (double x : init.sigma2_prev) state.sigma2_prev.push_back(ad::make_leaf(tape, x));
    state.resid_prev = ad::make_leaf(tape, init.resid_prev);

    ad::Var loss;
    bool first = true;
    std::vector<ad::Var> input;
    for (const StepSample& s : window) {
        input.clear();
        for (double x : s.input) input.push_back(ad::make_leaf(tape, x));
        const MixtureForecastT<ad::Var> forecast =
            xrmdn_step(lifted, std::span<const ad::Var>(input), state);
        const ad::Var step_ll = detail::gmm_log_pdf_t(s.target, forecast);
        loss = first ? -step_ll : loss - step_ll;
        first = false;
        state = advance_state(state, forecast, s.target);
    }

    tape.backward(loss.index(), node_grads);

    BatchGradients out;
    out.loss = loss.value();
    out.grads = shaped_like(model);
    std::size_t i = 0;
    visit_params(out.grads, [&](double& g) { g = node_grads[i++]; });
    if (i != n_params) throw NumericError("parameter gradient count mismatch");

    out.final_state.eta_prev.reserve(state.eta_prev.size());
    for (const auto& v : state.eta_prev) out.final_state.eta_prev.push_back(v.value());
    for (const auto& v : state.mu_prev) out.final_state.mu_prev.push_back(v.value());
    for (const auto& v : state.sigma2_prev) out.final_state.sigma2_prev.push_back(v.value());
    out.final_state.resid_prev = state.resid_prev.value();
    return out;
}

ModelShaped grad_nll(const XrmdnModelT<double>& model, std::span<const StepSample> window,
                     const RecurrentState& init) {
    return batch_backward(model, window, init).grads;
}

void adam_update(XrmdnModelT<double>& model, const ModelShaped& grads, AdamState& adam,
                 const TrainConfig& cfg) {
    std::vector<double> theta = flatten_params(model);
    std::vector<double> g = flatten_params(grads);
    if (theta.size() != g.size()) {
        throw ConfigError("gradient shape does not match model shape");
    }
    if (adam.m.empty()) {
        adam.m.assign(theta.size(), 0.0);
        adam.v.assign(theta.size(), 0.0);
        adam.step = 0;
    }
    if (adam.m.size() != theta.size()) {
        throw ConfigError("optimizer state shape does not match model shape");
    }

    if (cfg.grad_clip) {
        double norm_sq = 0.0;
        for (double x : g) norm_sq += x * x;
        const double norm = std::sqrt(norm_sq);
        if (norm > *cfg.grad_clip) {
            const double scale = *cfg.grad_clip / norm;
            for (double& x : g) x *= scale;
        }
    }

    adam.step += 1;
    const double t = static_cast<double>(adam.step);
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
    for (std::size_t j = 0; j < theta.size(); ++j) {
        adam.m[j] = cfg.adam_beta1 * adam.m[j] + (1.0 - cfg.adam_beta1) * g[j];
        adam.v[j] = cfg.adam_beta2 * adam.v[j] + (1.0 - cfg.adam_beta2) * g[j] * g[j];
        const double m_hat = adam.m[j] / bc1;
        const double v_hat = adam.v[j] / bc2;
        theta[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
    unflatten_params(model, theta);
}

namespace {

bool all_finite(const ModelShaped& m) {
    bool ok = true;
    visit_params(m, [&](const double& x) { ok = ok && std::isfinite(x); });
    return ok;
}

double population_mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double population_var(std::span<const double> xs, double mean) {
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    return s / static_cast<double>(xs.size());
}

}  // namespace

TrainResult train(const Dataset& ds, const TrainConfig& cfg, ModelKind kind) {
    validate(cfg);
    const std::size_t n_records = ds.records.size();
    if (n_records < 2 || n_records < cfg.lookback_k + 1) {
        throw DataError("training series of length " + std::to_string(n_records) +
                        " is too short (need at least lookback_k + 1 = " +
                        std::to_string(cfg.lookback_k + 1) + ")");
    }

    const auto t_start = std::chrono::steady_clock::now();

    // Demand scaling from the training split. A constant series has zero
    // spread; scaling by 1 keeps it trainable.
    NormStats stats = ds.norm_stats ? *ds.norm_stats : compute_norm_stats(ds.demands());
    if (!(stats.stddev > 1e-12)) stats.stddev = 1.0;

    Dataset scaled = ds;
    scaled.norm_stats = stats;
    for (auto& rec : scaled.records) rec.demand = normalize_value(rec.demand, stats);

    const std::vector<StepSample> all_samples = make_rollout(scaled);

    // Hidden-state initialization: uniform weights, demand mean, demand
    // variance (on the normalized scale), zero residual.
    const std::vector<double> norm_demands = scaled.demands();
    const double init_mean = population_mean(norm_demands);
    const double init_var =
        std::max(population_var(norm_demands, init_mean), cfg.activation.xi);
    const RecurrentState init_state = initial_state(cfg.n_components, init_mean, init_var);

    std::size_t n_train = all_samples.size();
    std::size_t n_val = 0;
    if (cfg.early_stop_patience > 0) {
        n_val = std::max<std::size_t>(1, static_cast<std::size_t>(
                                             static_cast<double>(all_samples.size()) *
                                             cfg.validation_fraction));
        if (n_val >= all_samples.size()) {
            throw DataError("validation split leaves no training samples");
        }
        n_train = all_samples.size() - n_val;
    }
    const std::span<const StepSample> train_samples(all_samples.data(), n_train);
    const std::span<const StepSample> val_samples(all_samples.data() + n_train, n_val);

    RngState rng{cfg.seed, 0};
    XrmdnModel model =
        init_model(cfg.n_components, cfg.n_units, static_cast<int>(all_samples[0].input.size()),
                   rng, kind, cfg.activation);
    model.norm = stats;

    TrainReport report;
    report.initial_nll =
        nll(model, train_samples, init_state) / static_cast<double>(train_samples.size());

    AdamState adam;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t epochs_since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        RecurrentState state = init_state;
        double epoch_loss = 0.0;
        std::optional<ModelShaped> epoch_grads;
        std::size_t batch_index = 0;

        for (std::size_t begin = 0; begin < train_samples.size(); begin += cfg.batch_len) {
            const std::size_t len = std::min(cfg.batch_len, train_samples.size() - begin);
            const std::span<const StepSample> batch = train_samples.subspan(begin, len);

            BatchGradients bg = batch_backward(model, batch, state);
            if (!std::isfinite(bg.loss) || !all_finite(bg.grads)) {
                throw TrainingDivergedError("training diverged (non-finite loss or gradient) at epoch " +
                                            std::to_string(epoch + 1) + ", batch " +
                                            std::to_string(batch_index + 1));
            }
            epoch_loss += bg.loss;
            state = bg.final_state;

            if (cfg.update_per == TrainConfig::UpdatePer::batch) {
                adam_update(model, bg.grads, adam, cfg);
                if (!all_finite(model)) {
                    throw TrainingDivergedError("training diverged (non-finite parameter) at epoch " +
                                                std::to_string(epoch + 1) + ", batch " +
                                                std::to_string(batch_index + 1));
                }
            } else {
                if (!epoch_grads) {
                    epoch_grads = std::move(bg.grads);
                } else {
                    std::vector<double> acc = flatten_params(*epoch_grads);
                    const std::vector<double> add = flatten_params(bg.grads);
                    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += add[j];
                    unflatten_params(*epoch_grads, acc);
                }
            }
            ++batch_index;
        }

        if (cfg.update_per == TrainConfig::UpdatePer::epoch) {
            adam_update(model, *epoch_grads, adam, cfg);
            if (!all_finite(model)) {
                throw TrainingDivergedError("training diverged (non-finite parameter) at epoch " +
                                            std::to_string(epoch + 1));
            }
        }

        report.epoch_nll.push_back(epoch_loss / static_cast<double>(train_samples.size()));
        report.epochs_run = epoch + 1;

        if (cfg.early_stop_patience > 0) {
            const double val_nll =
                nll(model, val_samples, state) / static_cast<double>(val_samples.size());
            if (val_nll < best_val - 1e-12) {
                best_val = val_nll;
                epochs_since_best = 0;
            } else if (++epochs_since_best >= cfg.early_stop_patience) {
                break;
            }
        }
    }

    report.final_nll =
        nll(model, train_samples, init_state) / static_cast<double>(train_samples.size());

    // Warm start for evaluation: roll the trained model over the final batch
    // segment (values only) and keep the last input tuple, so the recurrence
    // can resume at the first post-training step.
    {
        const std::size_t tail =
            std::min<std::size_t>(cfg.batch_len, all_samples.size());
        RecurrentState warm_state = init_state;
        for (std::size_t t = all_samples.size() - tail; t < all_samples.size(); ++t) {
            const StepSample& s = all_samples[t];
            const MixtureForecast forecast =
                xrmdn_step(model, std::span<const double>(s.input), warm_state);
            warm_state = advance_state(warm_state, forecast, s.target);
        }
        WarmStart warm;
        warm.state = std::move(warm_state);
        const DemandRecord& last = scaled.records.back();
        warm.last_input.push_back(last.demand);
        warm.last_input.insert(warm.last_input.end(), last.features.begin(), last.features.end());
        model.warm = std::move(warm);
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return TrainResult{std::move(model), std::move(report)};
}

}  // namespace xrmdn
