#include "core/metrics.hpp"

#include <cmath>
#include <string>

namespace xrmdn {

namespace {

void require_paired(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.empty() || truth.size() != predicted.size()) {
        throw DomainError("metric inputs must be equal-length and non-empty");
    }
}

}  // namespace

double mape(std::span<const double> truth, std::span<const double> predicted) {
    require_paired(truth, predicted);
    std::string zero_rows;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0.0) zero_rows += (zero_rows.empty() ? "" : ", ") + std::to_string(i);
    }
    if (!zero_rows.empty()) {
        throw DomainError("MAPE undefined for zero true demand at indices " + zero_rows);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        acc += std::abs(truth[i] - predicted[i]) / truth[i];
    }
    return acc / static_cast<double>(truth.size());
}

double mae(std::span<const double> truth, std::span<const double> predicted) {
    require_paired(truth, predicted);
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) acc += std::abs(truth[i] - predicted[i]);
    return acc / static_cast<double>(truth.size());
}

double rmse(std::span<const double> truth, std::span<const double> predicted) {
    require_paired(truth, predicted);
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - predicted[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(truth.size()));
}

double llv(std::span<const double> truth, std::span<const MixtureForecast> forecasts) {
    if (truth.size() != forecasts.size()) {
        throw DomainError("llv needs one forecast per observation");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        total += gmm_log_pdf(truth[i], forecasts[i]);
    }
    return total;
}

double rejection_rate(std::span<const double> truth,
                      const std::vector<std::vector<double>>& samples_per_step, double p) {
    if (truth.empty() || truth.size() != samples_per_step.size()) {
        throw DomainError("rejection_rate needs one sample set per observation");
    }
    std::size_t misses = 0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        const auto [lo, hi] = empirical_interval(samples_per_step[t], p);
        if (truth[t] < lo || truth[t] > hi) ++misses;
    }
    return static_cast<double>(misses) / static_cast<double>(truth.size());
}

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
    if (series.size() <= max_lag) {
        throw DomainError("series too short for the requested maximum lag");
    }
    const std::size_t n = series.size();
    double mean = 0.0;
    for (double x : series) mean += x;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double x : series) denom += (x - mean) * (x - mean);
    if (denom == 0.0) throw DomainError("acf undefined for a constant series (zero variance)");

    std::vector<double> rho(max_lag + 1, 0.0);
    rho[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = k; t < n; ++t) {
            num += (series[t] - mean) * (series[t - k] - mean);
        }
        rho[k] = num / denom;
    }
    return rho;
}

LjungBoxResult ljung_box(std::span<const double> residuals, std::size_t lags, bool on_squares) {
    if (lags < 1) throw DomainError("ljung_box needs at least one lag");
    if (residuals.size() <= lags) {
        throw DomainError("ljung_box needs more residuals than lags");
    }
    std::vector<double> series;
    if (on_squares) {
        series.reserve(residuals.size());
        for (double r : residuals) series.push_back(r * r);
    } else {
        series.assign(residuals.begin(), residuals.end());
    }
    const std::vector<double> rho = acf(series, lags);
    const double n = static_cast<double>(series.size());
    double q = 0.0;
    for (std::size_t k = 1; k <= lags; ++k) {
        q += rho[k] * rho[k] / (n - static_cast<double>(k));
    }
    q *= n * (n + 2.0);

    LjungBoxResult out;
    out.lags = lags;
    out.q_stat = q;
    out.p_value = chi_square_sf(q, static_cast<unsigned>(lags));
    return out;
}

}  // namespace xrmdn
