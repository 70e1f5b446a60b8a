#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/errors.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"

namespace xrmdn {

/// One observation: aggregated demand for the interval starting at
/// `timestamp` plus the encoded exogenous feature vector.
struct DemandRecord {
    std::int64_t timestamp = 0;
    double demand = 0.0;
    std::vector<double> features;
};

struct Dataset {
    std::vector<DemandRecord> records;
    std::int64_t interval_seconds = 0;   // 0 when fewer than two records
    std::vector<std::string> feature_names;
    std::optional<NormStats> norm_stats;  // fitted on the training split

    [[nodiscard]] std::size_t size() const { return records.size(); }
    [[nodiscard]] std::size_t feature_width() const { return feature_names.size(); }
    [[nodiscard]] std::vector<double> demands() const;
};

/// Column mapping for CSV ingestion. Empty feature_cols selects every column
/// that is neither the timestamp nor the demand, in header order.
struct CsvSchema {
    std::string timestamp_col = "timestamp";
    std::string demand_col = "demand";
    std::vector<std::string> feature_cols;
};

/// Reads `timestamp,demand,<features...>` CSV, sorts by time, and enforces
/// constant spacing. Malformed cells raise ParseError with row numbers; gaps
/// or duplicate timestamps raise SchemaError naming the offending step.
[[nodiscard]] Dataset load_csv(const std::string& path, const CsvSchema& schema = {});

/// Writes the dataset back out at full double precision (round-trip safe).
void save_csv(const Dataset& ds, const std::string& path);
[[nodiscard]] std::string to_csv(const Dataset& ds);

/// Contiguous partition at `boundary`: train takes timestamps strictly
/// before, test the rest. Demand normalization stats are computed on the
/// train side and attached to both. Either side empty raises DataError.
[[nodiscard]] std::pair<Dataset, Dataset> split(const Dataset& ds, std::int64_t boundary);

/// Population mean / standard deviation of the demand column.
[[nodiscard]] NormStats compute_norm_stats(std::span<const double> demands);

/// Z-scores the demand column using the attached stats (computing them from
/// the dataset itself when absent). Zero standard deviation raises DataError.
[[nodiscard]] Dataset normalize(const Dataset& ds);

[[nodiscard]] double normalize_value(double demand, const NormStats& s);
[[nodiscard]] double denormalize_mean(double normalized_mean, const NormStats& s);
[[nodiscard]] double denormalize_var(double normalized_var, const NormStats& s);

// ---------------------------------------------------------------------------
// Feature encoding profiles
// ---------------------------------------------------------------------------

enum class DatasetProfile {
    nyc_taxi_10min,  // 2 temporal features derived from the timestamp
    uci_bike_daily,  // 4 temporal + 4 min-max scaled meteorological features
};

[[nodiscard]] DatasetProfile profile_from_string(std::string_view name);
[[nodiscard]] std::string to_string(DatasetProfile profile);

/// Raw per-record fields before encoding.
struct RawFields {
    int hour = 0;     // 0..23
    int weekday = 0;  // Monday = 0 .. Sunday = 6
    int month = 1;    // 1..12
    int season = 1;   // 1..4
    std::vector<double> meteo;  // temperature, feeling temperature, humidity, wind speed
};

[[nodiscard]] RawFields raw_fields_from_timestamp(std::int64_t ts,
                                                  std::span<const double> meteo = {});

/// Profile-specific encoder. Temporal fields are scaled into [0, 1]
/// (hour/23, weekday/6, (month-1)/11, (season-1)/3); meteorological fields
/// are min-max scaled with ranges fitted on the training split.
struct FeatureEncoder {
    DatasetProfile profile = DatasetProfile::nyc_taxi_10min;
    std::vector<std::pair<double, double>> meteo_ranges;

    [[nodiscard]] std::size_t width() const;
    [[nodiscard]] std::vector<std::string> feature_names() const;
};

[[nodiscard]] FeatureEncoder fit_encoder(DatasetProfile profile,
                                         std::span<const RawFields> train_rows);
[[nodiscard]] std::vector<double> encode_features(const RawFields& raw,
                                                  const FeatureEncoder& encoder);

/// Re-derives the feature columns of `raw` according to the profile:
/// temporal features come from the timestamps; for the bike profile the four
/// meteorological columns are min-max scaled with ranges fitted on records
/// before `train_boundary`.
[[nodiscard]] Dataset apply_profile(const Dataset& raw, DatasetProfile profile,
                                    std::int64_t train_boundary);

// ---------------------------------------------------------------------------
// Synthetic heteroscedastic series
// ---------------------------------------------------------------------------

/// ARMA-with-GARCH(1,1)-innovations generator plus a sinusoidal seasonal
/// component; demand is clamped at zero.
struct SyntheticConfig {
    std::size_t length = 2000;
    double ar_c0 = 10.0;                 // ARMA intercept
    std::vector<double> ar = {0.5};      // a_1..a_p
    std::vector<double> ma = {0.6};      // b_1..b_q
    double garch_gamma0 = 1.0;
    double garch_alpha1 = 0.25;
    double garch_beta1 = 0.70;
    double seasonal_amplitude = 10.0;
    std::size_t seasonal_period = 144;
    std::uint64_t seed = 1;
    std::int64_t start_timestamp = 1451606400;  // 2016-01-01T00:00:00Z
    std::int64_t interval_seconds = 600;
};

void validate(const SyntheticConfig& cfg);
[[nodiscard]] Dataset gen_synthetic(const SyntheticConfig& cfg);

// ---------------------------------------------------------------------------
// Windowing
// ---------------------------------------------------------------------------

/// Index view of one lookback window [begin, end) and the following target.
struct WindowRef {
    std::size_t begin = 0;
    std::size_t end = 0;     // exclusive; end - begin == k
    std::size_t target = 0;  // == end
};

/// Sliding windows of length k with stride 1; the target is the demand one
/// step past each window. Requires k >= 1 and dataset length > k.
[[nodiscard]] std::vector<WindowRef> make_windows(const Dataset& ds, std::size_t k);

}  // namespace xrmdn
