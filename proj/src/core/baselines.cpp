#include "core/baselines.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace xrmdn {

namespace {

// Cholesky solve of (A + jitter I) x = b for a small symmetric system.
// Returns the ratio of the largest to smallest pivot alongside the solution.
struct SolveResult {
    std::vector<double> x;
    double pivot_ratio = 1.0;
};

SolveResult solve_spd(std::vector<std::vector<double>> a, std::vector<double> b, double jitter) {
    const std::size_t n = b.size();
    for (std::size_t i = 0; i < n; ++i) a[i][i] += jitter;

    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    double min_pivot = std::numeric_limits<double>::infinity();
    double max_pivot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a[i][j];
            for (std::size_t k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
            if (i == j) {
                if (!(sum > 0.0)) {
                    throw NumericError("singular design matrix in least-squares fit");
                }
                l[i][i] = std::sqrt(sum);
                min_pivot = std::min(min_pivot, l[i][i]);
                max_pivot = std::max(max_pivot, l[i][i]);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }

    // forward then backward substitution
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l[i][k] * y[k];
        y[i] = sum / l[i][i];
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double sum = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) sum -= l[k][ii] * x[k];
        x[ii] = sum / l[ii][ii];
    }
    return SolveResult{std::move(x), max_pivot / min_pivot};
}

}  // namespace

ArModel fit_ar(std::span<const double> series, std::size_t order) {
    if (order < 1) throw ConfigError("AR order must be >= 1");
    if (series.size() <= 2 * order) {
        throw DataError("series of length " + std::to_string(series.size()) +
                        " is too short to fit AR(" + std::to_string(order) + ")");
    }

    // Normal equations over rows t = order..n-1 with regressors
    // [1, x_{t-1}, ..., x_{t-order}].
    const std::size_t dim = order + 1;
    std::vector<std::vector<double>> xtx(dim, std::vector<double>(dim, 0.0));
    std::vector<double> xty(dim, 0.0);
    std::vector<double> row(dim, 1.0);
    for (std::size_t t = order; t < series.size(); ++t) {
        for (std::size_t i = 0; i < order; ++i) row[1 + i] = series[t - 1 - i];
        for (std::size_t i = 0; i < dim; ++i) {
            xty[i] += row[i] * series[t];
            for (std::size_t j = 0; j <= i; ++j) xtx[i][j] += row[i] * row[j];
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i + 1; j < dim; ++j) xtx[i][j] = xtx[j][i];
    }

    SolveResult sol = solve_spd(std::move(xtx), std::move(xty), 1e-9);

    ArModel model;
    model.order = order;
    model.intercept = sol.x[0];
    model.coeffs.assign(sol.x.begin() + 1, sol.x.end());
    model.ill_conditioned = sol.pivot_ratio > 1e4;  // squared ratio ~ condition number 1e8

    const std::vector<double> resid = ar_residuals(model, series);
    double mean = 0.0;
    for (double r : resid) mean += r;
    mean /= static_cast<double>(resid.size());
    double var = 0.0;
    for (double r : resid) var += (r - mean) * (r - mean);
    model.resid_variance = var / static_cast<double>(resid.size());
    return model;
}

double predict_ar(const ArModel& model, std::span<const double> history) {
    if (history.size() < model.order) {
        throw DataError("history shorter than AR order");
    }
    double pred = model.intercept;
    for (std::size_t i = 0; i < model.order; ++i) {
        pred += model.coeffs[i] * history[history.size() - 1 - i];
    }
    return pred;
}

std::vector<double> ar_residuals(const ArModel& model, std::span<const double> series) {
    if (series.size() <= model.order) {
        throw DataError("series shorter than AR order");
    }
    std::vector<double> out;
    out.reserve(series.size() - model.order);
    for (std::size_t t = model.order; t < series.size(); ++t) {
        out.push_back(series[t] - predict_ar(model, series.subspan(0, t)));
    }
    return out;
}

double persistence(std::span<const double> history) {
    if (history.empty()) throw DataError("persistence forecast needs a non-empty history");
    return history.back();
}

TrainResult train_classic_rmdn(const Dataset& ds, const TrainConfig& cfg) {
    return train(ds, cfg, ModelKind::classic_rmdn);
}

}  // namespace xrmdn
