#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "core/mathkernel.hpp"

namespace xrmdn {

/// Evaluation bundle for one test run. Point metrics are in demand units;
/// llv is the total log-likelihood of the observed demands under the
/// per-step forecast distributions (higher is better); rr maps percentile ->
/// fraction of steps whose true demand fell outside the sample interval.
struct EvalReport {
    double llv = 0.0;
    double mape = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    std::map<double, double> rr;
    std::size_t n_cases = 0;
    std::size_t n_mape_cases = 0;  // steps with nonzero true demand
};

/// Mean absolute percentage error. Every true demand must be nonzero; zero
/// entries raise DomainError listing the offending indices.
[[nodiscard]] double mape(std::span<const double> truth, std::span<const double> predicted);

[[nodiscard]] double mae(std::span<const double> truth, std::span<const double> predicted);

[[nodiscard]] double rmse(std::span<const double> truth, std::span<const double> predicted);

/// Total log-likelihood of the observations under the per-step mixtures.
[[nodiscard]] double llv(std::span<const double> truth,
                         std::span<const MixtureForecast> forecasts);

/// Fraction of steps whose true value lies outside the central p-interval of
/// that step's samples (miss rate; lower is better).
[[nodiscard]] double rejection_rate(std::span<const double> truth,
                                    const std::vector<std::vector<double>>& samples_per_step,
                                    double p);

/// Sample autocorrelations rho_0..rho_max_lag (rho_0 == 1). A constant
/// series has zero variance and raises DomainError.
[[nodiscard]] std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

struct LjungBoxResult {
    std::size_t lags = 0;
    double q_stat = 0.0;
    double p_value = 1.0;
};

/// Ljung-Box portmanteau statistic Q = n(n+2) sum_k rho_k^2 / (n-k) with
/// p-value from the chi-square survival function at h degrees of freedom.
/// By default the test runs on the squared residuals (the heteroscedasticity
/// variant); set on_squares = false for plain autocorrelation.
[[nodiscard]] LjungBoxResult ljung_box(std::span<const double> residuals, std::size_t lags,
                                       bool on_squares = true);

}  // namespace xrmdn
