#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/mathkernel.hpp"
#include "core/rng.hpp"

namespace xrmdn {

enum class ModelKind : std::uint8_t {
    xrmdn = 0,
    classic_rmdn = 1,
};

/// One sub-network. The hidden layer is one direct linear unit plus K-1 tanh
/// units over the input vector and, when `recurrent` is set, the same shaped
/// group over a per-component recurrent scalar. Component i combines all unit
/// outputs through its own mixing row plus an output bias.
template <class S>
struct SubnetParamsT {
    std::vector<S> direct_in_w;             // input width
    S direct_in_b{};
    std::vector<std::vector<S>> tanh_in_w;  // (K-1) rows of input width
    std::vector<S> tanh_in_b;               // K-1

    bool recurrent = true;
    S direct_rec_w{};
    S direct_rec_b{};
    std::vector<S> tanh_rec_w;              // K-1
    std::vector<S> tanh_rec_b;              // K-1

    std::vector<std::vector<S>> mix_w;      // N rows of 2K (or K without recurrence)
    std::vector<S> mix_b;                   // N
};

using SubnetParams = SubnetParamsT<double>;

/// Outputs carried from one step to the next: previous mixture weights,
/// means and variances plus the last squared residual.
template <class S>
struct RecurrentStateT {
    std::vector<S> eta_prev;
    std::vector<S> mu_prev;
    std::vector<S> sigma2_prev;
    S resid_prev{};
};

using RecurrentState = RecurrentStateT<double>;

template <class S>
struct XrmdnModelT {
    ModelKind kind = ModelKind::xrmdn;
    int n_components = 2;
    int n_units = 8;
    int input_width = 3;  // normalized demand + encoded features
    ActivationConfig activation;
    SubnetParamsT<S> wrnn;
    SubnetParamsT<S> mrnn;
    SubnetParamsT<S> vrnn;
};

/// Demand scaling fitted on the training split (z-score).
struct NormStats {
    double mean = 0.0;
    double stddev = 1.0;
};

/// Recurrent state entering the step after the training split together with
/// the last training input tuple, stored so evaluation can resume the
/// recurrence exactly where training left off.
struct WarmStart {
    RecurrentState state;
    std::vector<double> last_input;
};

struct XrmdnModel : XrmdnModelT<double> {
    NormStats norm;
    std::optional<WarmStart> warm;
};

/// Gradient (or any other quantity) shaped exactly like the trainable
/// parameters of a model.
using ModelShaped = XrmdnModelT<double>;

// ---------------------------------------------------------------------------
// Forward passes (shared between the double path and the autodiff tape).
// ---------------------------------------------------------------------------

/// Pre-mixing scalar of component i: the direct and tanh units applied to the
/// input vector, plus (when present) the recurrent group applied to this
/// component's carried scalar, combined through the component's mixing row.
/// The output activation (softmax / identity / PELU) is applied by the caller.
template <class S>
S subnet_forward(const SubnetParamsT<S>& p, std::span<const S> input, const S& recurrent,
                 int component) {
    if (input.size() != p.direct_in_w.size()) {
        throw ConfigError("subnet input width " + std::to_string(input.size()) +
                          " does not match parameter width " + std::to_string(p.direct_in_w.size()));
    }
    if (component < 0 || static_cast<std::size_t>(component) >= p.mix_w.size()) {
        throw ConfigError("component index out of range");
    }
    using std::tanh;
    const std::size_t k_minus_1 = p.tanh_in_w.size();
    const auto& mix = p.mix_w[static_cast<std::size_t>(component)];

    // direct linear unit over the input
    S direct = p.direct_in_b;
    for (std::size_t j = 0; j < input.size(); ++j) direct = direct + p.direct_in_w[j] * input[j];
    S acc = p.mix_b[static_cast<std::size_t>(component)] + mix[0] * direct;

    // tanh units over the input
    for (std::size_t k = 0; k < k_minus_1; ++k) {
        S lin = p.tanh_in_b[k];
        for (std::size_t j = 0; j < input.size(); ++j) lin = lin + p.tanh_in_w[k][j] * input[j];
        acc = acc + mix[1 + k] * tanh(lin);
    }

    if (p.recurrent) {
        const std::size_t k_units = k_minus_1 + 1;
        acc = acc + mix[k_units] * (p.direct_rec_w * recurrent + p.direct_rec_b);
        for (std::size_t k = 0; k < k_minus_1; ++k) {
            acc = acc + mix[k_units + 1 + k] * tanh(p.tanh_rec_w[k] * recurrent + p.tanh_rec_b[k]);
        }
    }
    return acc;
}

/// One forward step: mixture weights from the weight network (softmax),
/// means from the mean network (identity), variances from the variance
/// network (PELU over the squared-residual input and per-component variance
/// recurrence). Returns the forecast for the next time step.
template <class S>
MixtureForecastT<S> xrmdn_step(const XrmdnModelT<S>& m, std::span<const S> input,
                               const RecurrentStateT<S>& state) {
    const std::size_t n = static_cast<std::size_t>(m.n_components);
    if (input.size() != static_cast<std::size_t>(m.input_width)) {
        throw ConfigError("model expects input width " + std::to_string(m.input_width) +
                          ", got " + std::to_string(input.size()));
    }
    if (state.eta_prev.size() != n || state.mu_prev.size() != n || state.sigma2_prev.size() != n) {
        throw ConfigError("recurrent state size does not match component count");
    }

    std::vector<S> weight_logits;
    std::vector<S> means;
    weight_logits.reserve(n);
    means.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        weight_logits.push_back(subnet_forward(m.wrnn, input, state.eta_prev[i], static_cast<int>(i)));
        means.push_back(subnet_forward(m.mrnn, input, state.mu_prev[i], static_cast<int>(i)));
    }

    const std::vector<S> variance_input{state.resid_prev};
    std::vector<S> variances;
    variances.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const S pre = subnet_forward(m.vrnn, std::span<const S>(variance_input),
                                     state.sigma2_prev[i], static_cast<int>(i));
        variances.push_back(detail::pelu_t(pre, m.activation));
    }

    MixtureForecastT<S> out;
    out.weights = detail::softmax_t(weight_logits);
    out.means = std::move(means);
    out.variances = std::move(variances);
    return out;
}

/// Mixture expectation: dot product of weights and means.
template <class S>
S expected_demand(const MixtureForecastT<S>& f) {
    S acc = f.weights[0] * f.means[0];
    for (std::size_t i = 1; i < f.weights.size(); ++i) acc = acc + f.weights[i] * f.means[i];
    return acc;
}

/// Squared gap between the mixture expectation and the observed demand.
template <class S>
S residual(const MixtureForecastT<S>& f, double observed) {
    const S diff = expected_demand(f) - observed;
    return diff * diff;
}

/// Next recurrent state: the forecast's output vectors plus the squared
/// residual against the observed demand.
template <class S>
RecurrentStateT<S> advance_state(const RecurrentStateT<S>& state, const MixtureForecastT<S>& f,
                                 double observed) {
    (void)state;
    RecurrentStateT<S> next;
    next.eta_prev = f.weights;
    next.mu_prev = f.means;
    next.sigma2_prev = f.variances;
    next.resid_prev = residual(f, observed);
    return next;
}

// ---------------------------------------------------------------------------
// Construction, parameter traversal, serialization.
// ---------------------------------------------------------------------------

/// Fresh model with Glorot-uniform weights (bound sqrt(6 / (fan_in +
/// fan_out)) per weight block) and zero biases. Deterministic given rng.
[[nodiscard]] XrmdnModel init_model(int n_components, int n_units, int input_width, RngState& rng,
                                    ModelKind kind = ModelKind::xrmdn,
                                    const ActivationConfig& activation = {});

/// Visits every trainable parameter in a fixed canonical order (wrnn, mrnn,
/// vrnn; within a subnet: direct-in row, tanh-in rows, recurrent group, mix
/// rows, each weight row followed by its bias).
template <class S, class F>
void visit_params(SubnetParamsT<S>& p, F&& f) {
    for (auto& w : p.direct_in_w) f(w);
    f(p.direct_in_b);
    for (std::size_t k = 0; k < p.tanh_in_w.size(); ++k) {
        for (auto& w : p.tanh_in_w[k]) f(w);
        f(p.tanh_in_b[k]);
    }
    if (p.recurrent) {
        f(p.direct_rec_w);
        f(p.direct_rec_b);
        for (std::size_t k = 0; k < p.tanh_rec_w.size(); ++k) {
            f(p.tanh_rec_w[k]);
            f(p.tanh_rec_b[k]);
        }
    }
    for (std::size_t i = 0; i < p.mix_w.size(); ++i) {
        for (auto& w : p.mix_w[i]) f(w);
        f(p.mix_b[i]);
    }
}

template <class S, class F>
void visit_params(XrmdnModelT<S>& m, F&& f) {
    visit_params(m.wrnn, f);
    visit_params(m.mrnn, f);
    visit_params(m.vrnn, f);
}

template <class S, class F>
void visit_params(const XrmdnModelT<S>& m, F&& f) {
    visit_params(const_cast<XrmdnModelT<S>&>(m), [&](S& x) { f(static_cast<const S&>(x)); });
}

[[nodiscard]] std::size_t param_count(const ModelShaped& m);
[[nodiscard]] std::vector<double> flatten_params(const ModelShaped& m);
void unflatten_params(ModelShaped& m, std::span<const double> flat);

/// Same-architecture copy with every parameter set to `value` (used for
/// gradient and optimizer accumulators).
[[nodiscard]] ModelShaped shaped_like(const ModelShaped& m, double value = 0.0);

// Versioned little-endian binary model format plus a text dump for debugging.
void save_model(const XrmdnModel& m, const std::string& path);
[[nodiscard]] XrmdnModel load_model(const std::string& path);
[[nodiscard]] std::string model_to_text(const XrmdnModel& m);

/// Uniform recurrent state for a model with n components: weights 1/n, means
/// `mean`, variances `variance`, residual 0.
[[nodiscard]] RecurrentState initial_state(int n_components, double mean, double variance);

}  // namespace xrmdn
