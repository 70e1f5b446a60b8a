#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/baselines.hpp"
#include "core/data.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"
#include "core/training.hpp"

namespace xrmdn {

struct EvalOptions {
    std::vector<double> percentiles = {0.75, 0.90, 0.95};
    std::size_t samples_per_step = 1000;
    std::uint64_t seed = 2024;
};

void validate(const EvalOptions& opts);

/// One evaluated test step: observed demand, forecast distribution in demand
/// units, its expectation, and the sample interval per percentile.
struct EvalStep {
    std::int64_t timestamp = 0;
    double truth = 0.0;
    double expected = 0.0;
    MixtureForecast mixture;  // denormalized
    std::map<double, std::pair<double, double>> intervals;
};

struct EvalOutput {
    EvalReport report;
    std::vector<EvalStep> steps;
};

/// Rolls the trained model across the test split (resuming from the stored
/// warm-start state), draws samples_per_step from each forecast, and fills
/// the metric bundle. MAPE is averaged over the steps with nonzero demand.
[[nodiscard]] EvalOutput evaluate_model(const XrmdnModel& model, const Dataset& test,
                                        const EvalOptions& opts);

[[nodiscard]] std::string eval_report_json(const EvalOutput& out, const EvalOptions& opts);
[[nodiscard]] std::string eval_steps_csv(const EvalOutput& out,
                                         const std::vector<double>& percentiles);

/// Per-step forecast distributions over a data span (same rollout as
/// evaluation, emitting the mixture parameters instead of metrics).
[[nodiscard]] std::string forecast_csv(const XrmdnModel& model, const Dataset& data);

[[nodiscard]] std::string train_report_json(const TrainReport& report, const TrainConfig& cfg);

struct DiagnoseOptions {
    std::size_t max_lag = 5;
    std::size_t ar_order = 3;
    double alpha = 0.05;
};

/// Fits the AR baseline, applies the Ljung-Box test to the squared residuals
/// at lags 1..max_lag, and reports (Q, p, critical value) per lag.
[[nodiscard]] std::string diagnose_json(const Dataset& ds, const DiagnoseOptions& opts);

struct CompareOptions {
    TrainConfig train;
    EvalOptions eval;
    std::size_t ar_order = 3;
};

/// Trains and evaluates the full model, the classic variant, the AR fit, and
/// persistence on the same split with the same seed; emits a leaderboard.
[[nodiscard]] std::string compare_json(const Dataset& full, std::int64_t boundary,
                                       const CompareOptions& opts);

[[nodiscard]] std::string synthetic_config_json(const SyntheticConfig& cfg);

}  // namespace xrmdn
