#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "core/training.hpp"

namespace xrmdn {

/// Autoregressive point forecaster d_t = c0 + sum_i a_i d_{t-i}, fitted by
/// ordinary least squares. Used both as a comparison baseline and as the
/// residual source for the heteroscedasticity diagnostic.
struct ArModel {
    std::size_t order = 1;
    double intercept = 0.0;
    std::vector<double> coeffs;   // a_1 .. a_p, most recent lag first
    double resid_variance = 0.0;  // population variance of in-sample residuals
    bool ill_conditioned = false;
};

/// OLS fit via normal equations with a 1e-9 ridge jitter on the diagonal.
/// Requires length > 2 * order; a singular system even after jitter raises
/// NumericError. Near-singular designs (e.g. constant series) are flagged
/// ill_conditioned.
[[nodiscard]] ArModel fit_ar(std::span<const double> series, std::size_t order);

/// One-step forecast from the trailing `order` observations of history.
[[nodiscard]] double predict_ar(const ArModel& model, std::span<const double> history);

/// In-sample residuals r_t = d_t - d_hat_t for t = order .. n-1.
[[nodiscard]] std::vector<double> ar_residuals(const ArModel& model,
                                               std::span<const double> series);

/// Naive forecast: the last observed demand.
[[nodiscard]] double persistence(std::span<const double> history);

/// Ablated mixture model: the weight and mean networks are plain
/// feed-forward maps of the input (no recurrent blocks); only the variance
/// network keeps its recurrence and the residual coupling. Shares the loss,
/// optimizer, and state handling of the full model.
[[nodiscard]] TrainResult train_classic_rmdn(const Dataset& ds, const TrainConfig& cfg);

}  // namespace xrmdn
