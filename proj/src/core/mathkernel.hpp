#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace xrmdn {

/// Parameters of the PELU/ELU activation pair used for variance outputs.
///
/// PELU(z) = ELU(z) + 1 + xi, so with alpha_elu in (0, 1] the output is
/// bounded below by xi and strictly positive for every finite z.
struct ActivationConfig {
    double xi = 1e-6;
    double alpha_elu = 1.0;
};

void validate(const ActivationConfig& cfg);

/// Parameters of one Gaussian mixture forecast: component weights on the
/// probability simplex, means, and strictly positive variances.
template <class S>
struct MixtureForecastT {
    std::vector<S> weights;
    std::vector<S> means;
    std::vector<S> variances;
};

using MixtureForecast = MixtureForecastT<double>;

/// Throws DomainError unless the forecast satisfies the simplex and
/// positivity invariants (weights sum to 1 within 1e-10, variances > 0).
void validate(const MixtureForecast& forecast);

namespace detail {

inline double value_of(double x) { return x; }

// The *_t templates below are shared between the plain double path and the
// reverse-mode tape scalar; they assume finite, in-domain inputs. The public
// double overloads validate and then delegate here.

template <class S>
S elu_t(const S& z, const ActivationConfig& cfg) {
    using std::exp;
    if (value_of(z) > 0.0) return z;
    return cfg.alpha_elu * (exp(z) - 1.0);
}

template <class S>
S pelu_t(const S& z, const ActivationConfig& cfg) {
    using std::exp;
    // ELU(z) + 1 + xi, grouped so the lower bound xi + (1 - alpha) is exact
    // in floating point (adding the nonnegative alpha * e^z cannot round
    // below it).
    if (value_of(z) > 0.0) return z + (1.0 + cfg.xi);
    return cfg.alpha_elu * exp(z) + (cfg.xi + (1.0 - cfg.alpha_elu));
}

template <class S>
std::vector<S> softmax_t(const std::vector<S>& logits) {
    using std::exp;
    double shift = value_of(logits[0]);
    for (const S& z : logits) shift = std::max(shift, value_of(z));
    std::vector<S> scaled;
    scaled.reserve(logits.size());
    for (const S& z : logits) scaled.push_back(exp(z - shift));
    S total = scaled[0];
    for (std::size_t i = 1; i < scaled.size(); ++i) total = total + scaled[i];
    std::vector<S> out;
    out.reserve(scaled.size());
    for (const S& e : scaled) out.push_back(e / total);
    return out;
}

template <class S>
S gaussian_log_pdf_t(double x, const S& mu, const S& sigma2) {
    using std::log;
    constexpr double two_pi = 6.283185307179586476925286766559;
    const S diff = x - mu;
    return -0.5 * log(two_pi * sigma2) - (diff * diff) / (2.0 * sigma2);
}

template <class S>
S gmm_log_pdf_t(double x, const MixtureForecastT<S>& f) {
    using std::exp;
    using std::log;
    std::vector<S> terms;
    terms.reserve(f.weights.size());
    for (std::size_t i = 0; i < f.weights.size(); ++i) {
        terms.push_back(log(f.weights[i]) + gaussian_log_pdf_t(x, f.means[i], f.variances[i]));
    }
    double shift = value_of(terms[0]);
    for (const S& t : terms) shift = std::max(shift, value_of(t));
    S total = exp(terms[0] - shift);
    for (std::size_t i = 1; i < terms.size(); ++i) total = total + exp(terms[i] - shift);
    return shift + log(total);
}

}  // namespace detail

/// Overflow-safe softmax (max-subtraction). Output is strictly positive and
/// sums to one. Throws DomainError on empty or non-finite input.
[[nodiscard]] std::vector<double> softmax(std::span<const double> logits);

/// Exponential linear unit: z for z > 0, alpha * (e^z - 1) otherwise.
[[nodiscard]] double elu(double z, const ActivationConfig& cfg = {});

/// Positive exponential linear unit, ELU shifted by 1 + xi. Strictly
/// positive for every finite z; for alpha_elu = 1 the infimum is xi.
[[nodiscard]] double pelu(double z, const ActivationConfig& cfg = {});

/// Log density of N(mu, sigma2) at x. Throws DomainError for sigma2 <= 0.
[[nodiscard]] double gaussian_log_pdf(double x, double mu, double sigma2);

/// Log density of a Gaussian mixture at x via log-sum-exp; never -inf for
/// finite inputs with positive weights.
[[nodiscard]] double gmm_log_pdf(double x, const MixtureForecast& forecast);

/// n i.i.d. draws from the mixture: categorical component pick on the
/// weights, then a Gaussian draw. Deterministic given rng.
[[nodiscard]] std::vector<double> gmm_sample(const MixtureForecast& forecast, std::size_t n,
                                             RngState& rng);

/// Central interval of the samples covering fraction p: the ((1-p)/2) and
/// ((1+p)/2) empirical quantiles with linear interpolation between order
/// statistics. Throws DomainError on empty samples or p outside (0, 1).
[[nodiscard]] std::pair<double, double> empirical_interval(std::span<const double> samples,
                                                           double p);

/// Quantile of the samples at q in [0, 1], linear interpolation between the
/// closest order statistics.
[[nodiscard]] double empirical_quantile(std::span<const double> samples, double q);

/// Chi-square survival function P(X >= q) with h degrees of freedom, via the
/// regularized upper incomplete gamma function.
[[nodiscard]] double chi_square_sf(double q, unsigned h);

/// Smallest q with chi_square_sf(q, h) <= alpha (the upper critical value).
[[nodiscard]] double chi_square_critical(double alpha, unsigned h);

}  // namespace xrmdn
