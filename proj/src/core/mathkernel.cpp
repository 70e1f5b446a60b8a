#include "core/mathkernel.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace xrmdn {

namespace {

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw DomainError(std::string(what) + " must be finite");
    }
}

// Regularized lower incomplete gamma P(a, x) by series expansion, valid for
// x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < 1000; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction,
// valid for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double regularized_gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_continued_fraction(a, x);
}

}  // namespace

void validate(const ActivationConfig& cfg) {
    if (!(cfg.xi > 0.0) || !std::isfinite(cfg.xi)) {
        throw ConfigError("activation xi must be a positive finite real");
    }
    if (!(cfg.alpha_elu > 0.0) || !(cfg.alpha_elu <= 1.0)) {
        throw ConfigError("activation alpha_elu must lie in (0, 1] to keep PELU positive");
    }
}

void validate(const MixtureForecast& forecast) {
    const std::size_t n = forecast.weights.size();
    if (n == 0 || forecast.means.size() != n || forecast.variances.size() != n) {
        throw DomainError("mixture forecast component vectors must be non-empty and equal-length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(forecast.weights[i] > 0.0)) throw DomainError("mixture weights must be positive");
        if (!(forecast.variances[i] > 0.0)) throw DomainError("mixture variances must be positive");
        if (!std::isfinite(forecast.means[i])) throw DomainError("mixture means must be finite");
        sum += forecast.weights[i];
    }
    if (std::abs(sum - 1.0) > 1e-10) {
        throw DomainError("mixture weights must sum to 1 within 1e-10");
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw DomainError("softmax input must be non-empty");
    for (double z : logits) require_finite(z, "softmax input");
    std::vector<double> in(logits.begin(), logits.end());
    return detail::softmax_t(in);
}

double elu(double z, const ActivationConfig& cfg) {
    require_finite(z, "elu input");
    return detail::elu_t(z, cfg);
}

double pelu(double z, const ActivationConfig& cfg) {
    require_finite(z, "pelu input");
    return detail::pelu_t(z, cfg);
}

double gaussian_log_pdf(double x, double mu, double sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("gaussian_log_pdf requires sigma2 > 0");
    return detail::gaussian_log_pdf_t(x, mu, sigma2);
}

double gmm_log_pdf(double x, const MixtureForecast& forecast) {
    validate(forecast);
    return detail::gmm_log_pdf_t(x, forecast);
}

std::vector<double> gmm_sample(const MixtureForecast& forecast, std::size_t n, RngState& rng) {
    validate(forecast);
    if (n == 0) throw DomainError("gmm_sample requires n >= 1");
    std::vector<double> out;
    out.reserve(n);
    const std::size_t k = forecast.weights.size();
    for (std::size_t s = 0; s < n; ++s) {
        const double u = next_uniform(rng);
        std::size_t pick = k - 1;
        double cum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            cum += forecast.weights[i];
            if (u <= cum) {
                pick = i;
                break;
            }
        }
        out.push_back(forecast.means[pick] + std::sqrt(forecast.variances[pick]) * next_normal(rng));
    }
    return out;
}

double empirical_quantile(std::span<const double> samples, double q) {
    if (samples.empty()) throw DomainError("quantile of empty sample set");
    if (!(q >= 0.0) || !(q <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::pair<double, double> empirical_interval(std::span<const double> samples, double p) {
    if (samples.empty()) throw DomainError("empirical_interval of empty sample set");
    if (!(p > 0.0) || !(p < 1.0)) throw DomainError("percentile must lie strictly in (0, 1)");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto quant = [&](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        if (lo + 1 >= sorted.size()) return sorted.back();
        return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
    };
    return {quant((1.0 - p) / 2.0), quant((1.0 + p) / 2.0)};
}

double chi_square_sf(double q, unsigned h) {
    if (!(q >= 0.0)) throw DomainError("chi_square_sf requires q >= 0");
    if (h < 1) throw DomainError("chi_square_sf requires h >= 1");
    return regularized_gamma_q(0.5 * static_cast<double>(h), 0.5 * q);
}

double chi_square_critical(double alpha, unsigned h) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    double lo = 0.0;
    double hi = 1.0;
    while (chi_square_sf(hi, h) > alpha) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi_square_sf(mid, h) > alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace xrmdn
