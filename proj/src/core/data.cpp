#include "core/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "core/timeutil.hpp"

namespace xrmdn {

std::vector<double> Dataset::demands() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.demand);
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& cell, std::size_t row, const std::string& col) {
    const std::string t = trim(cell);
    if (t.empty()) {
        throw ParseError("row " + std::to_string(row) + ": missing value in column '" + col + "'");
    }
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == nullptr || *end != '\0' || !std::isfinite(v)) {
        throw ParseError("row " + std::to_string(row) + ": malformed number '" + t +
                         "' in column '" + col + "'");
    }
    return v;
}

void check_spacing(const Dataset& ds) {
    if (ds.records.size() < 2) return;
    const std::int64_t step = ds.records[1].timestamp - ds.records[0].timestamp;
    if (step <= 0) {
        throw SchemaError("duplicate timestamp " + format_rfc3339(ds.records[0].timestamp));
    }
    for (std::size_t i = 1; i < ds.records.size(); ++i) {
        const std::int64_t d = ds.records[i].timestamp - ds.records[i - 1].timestamp;
        if (d != step) {
            throw SchemaError("non-constant spacing between " +
                              format_rfc3339(ds.records[i - 1].timestamp) + " and " +
                              format_rfc3339(ds.records[i].timestamp) + " (expected " +
                              std::to_string(step) + " s, got " + std::to_string(d) + " s)");
        }
    }
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(f, line)) throw ParseError("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);

    auto column_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) return i;
        }
        throw SchemaError("missing column '" + name + "' in " + path);
    };

    const std::size_t ts_idx = column_index(schema.timestamp_col);
    const std::size_t demand_idx = column_index(schema.demand_col);

    Dataset ds;
    std::vector<std::size_t> feature_idx;
    if (schema.feature_cols.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i == ts_idx || i == demand_idx) continue;
            feature_idx.push_back(i);
            ds.feature_names.push_back(trim(header[i]));
        }
    } else {
        for (const auto& name : schema.feature_cols) {
            feature_idx.push_back(column_index(name));
            ds.feature_names.push_back(name);
        }
    }

    std::size_t row = 1;
    while (std::getline(f, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        }
        DemandRecord rec;
        try {
            rec.timestamp = parse_rfc3339(cells[ts_idx]);
        } catch (const ParseError& e) {
            throw ParseError("row " + std::to_string(row) + ": " + e.what());
        }
        rec.demand = parse_double(cells[demand_idx], row, schema.demand_col);
        if (rec.demand < 0.0) {
            throw ParseError("row " + std::to_string(row) + ": negative demand " +
                             std::to_string(rec.demand));
        }
        rec.features.reserve(feature_idx.size());
        for (std::size_t j = 0; j < feature_idx.size(); ++j) {
            rec.features.push_back(parse_double(cells[feature_idx[j]], row, ds.feature_names[j]));
        }
        ds.records.push_back(std::move(rec));
    }
    if (ds.records.empty()) throw DataError("no data rows in " + path);

    std::stable_sort(ds.records.begin(), ds.records.end(),
                     [](const DemandRecord& a, const DemandRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    check_spacing(ds);
    if (ds.records.size() >= 2) {
        ds.interval_seconds = ds.records[1].timestamp - ds.records[0].timestamp;
    }
    return ds;
}

std::string to_csv(const Dataset& ds) {
    std::string out = "timestamp,demand";
    for (const auto& name : ds.feature_names) {
        out += ',';
        out += name;
    }
    out += '\n';
    char buf[64];
    for (const auto& rec : ds.records) {
        out += format_rfc3339(rec.timestamp);
        std::snprintf(buf, sizeof(buf), ",%.17g", rec.demand);
        out += buf;
        for (double x : rec.features) {
            std::snprintf(buf, sizeof(buf), ",%.17g", x);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open file for writing: " + path);
    const std::string body = to_csv(ds);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!f) throw IoError("failed writing file: " + path);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, std::int64_t boundary) {
    Dataset train, test;
    train.feature_names = test.feature_names = ds.feature_names;
    train.interval_seconds = test.interval_seconds = ds.interval_seconds;
    for (const auto& rec : ds.records) {
        (rec.timestamp < boundary ? train : test).records.push_back(rec);
    }
    if (train.records.empty()) {
        throw DataError("split at " + format_rfc3339(boundary) + " leaves an empty training side");
    }
    if (test.records.empty()) {
        throw DataError("split at " + format_rfc3339(boundary) + " leaves an empty test side");
    }
    const NormStats stats = compute_norm_stats(train.demands());
    train.norm_stats = stats;
    test.norm_stats = stats;
    return {std::move(train), std::move(test)};
}

NormStats compute_norm_stats(std::span<const double> demands) {
    if (demands.empty()) throw DataError("cannot compute demand statistics of an empty series");
    double mean = 0.0;
    for (double d : demands) mean += d;
    mean /= static_cast<double>(demands.size());
    double var = 0.0;
    for (double d : demands) var += (d - mean) * (d - mean);
    var /= static_cast<double>(demands.size());
    return NormStats{mean, std::sqrt(var)};
}

double normalize_value(double demand, const NormStats& s) { return (demand - s.mean) / s.stddev; }

double denormalize_mean(double normalized_mean, const NormStats& s) {
    return normalized_mean * s.stddev + s.mean;
}

double denormalize_var(double normalized_var, const NormStats& s) {
    return normalized_var * s.stddev * s.stddev;
}

Dataset normalize(const Dataset& ds) {
    if (ds.records.empty()) throw DataError("cannot normalize an empty dataset");
    const NormStats stats = ds.norm_stats ? *ds.norm_stats : compute_norm_stats(ds.demands());
    if (!(stats.stddev > 0.0)) {
        throw DataError("cannot z-score demand with zero standard deviation");
    }
    Dataset out = ds;
    out.norm_stats = stats;
    for (auto& rec : out.records) rec.demand = normalize_value(rec.demand, stats);
    return out;
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

DatasetProfile profile_from_string(std::string_view name) {
    if (name == "nyc-taxi-10min") return DatasetProfile::nyc_taxi_10min;
    if (name == "uci-bike-daily") return DatasetProfile::uci_bike_daily;
    throw ConfigError("unknown dataset profile '" + std::string(name) +
                      "' (expected nyc-taxi-10min or uci-bike-daily)");
}

std::string to_string(DatasetProfile profile) {
    return profile == DatasetProfile::nyc_taxi_10min ? "nyc-taxi-10min" : "uci-bike-daily";
}

RawFields raw_fields_from_timestamp(std::int64_t ts, std::span<const double> meteo) {
    const CivilTime c = civil_from_timestamp(ts);
    RawFields raw;
    raw.hour = c.hour;
    raw.weekday = weekday_of(ts);
    raw.month = c.month;
    raw.season = season_of_month(c.month);
    raw.meteo.assign(meteo.begin(), meteo.end());
    return raw;
}

std::size_t FeatureEncoder::width() const {
    return profile == DatasetProfile::nyc_taxi_10min ? 2 : 8;
}

std::vector<std::string> FeatureEncoder::feature_names() const {
    if (profile == DatasetProfile::nyc_taxi_10min) return {"hour_norm", "weekday_norm"};
    return {"season_norm", "month_norm",  "hour_norm", "weekday_norm",
            "temp_norm",   "atemp_norm",  "hum_norm",  "windspeed_norm"};
}

FeatureEncoder fit_encoder(DatasetProfile profile, std::span<const RawFields> train_rows) {
    FeatureEncoder enc;
    enc.profile = profile;
    if (profile == DatasetProfile::uci_bike_daily) {
        if (train_rows.empty()) throw DataError("cannot fit feature scaling on an empty split");
        enc.meteo_ranges.assign(4, {0.0, 0.0});
        for (std::size_t j = 0; j < 4; ++j) {
            double lo = train_rows[0].meteo.at(j);
            double hi = lo;
            for (const auto& row : train_rows) {
                lo = std::min(lo, row.meteo.at(j));
                hi = std::max(hi, row.meteo.at(j));
            }
            enc.meteo_ranges[j] = {lo, hi};
        }
    }
    return enc;
}

std::vector<double> encode_features(const RawFields& raw, const FeatureEncoder& encoder) {
    std::vector<double> out;
    if (encoder.profile == DatasetProfile::nyc_taxi_10min) {
        out = {raw.hour / 23.0, raw.weekday / 6.0};
        return out;
    }
    out = {(raw.season - 1) / 3.0, (raw.month - 1) / 11.0, raw.hour / 23.0, raw.weekday / 6.0};
    if (raw.meteo.size() < 4 || encoder.meteo_ranges.size() != 4) {
        throw DataError("bike profile requires 4 meteorological fields");
    }
    for (std::size_t j = 0; j < 4; ++j) {
        const auto [lo, hi] = encoder.meteo_ranges[j];
        const double span = hi - lo;
        out.push_back(span > 0.0 ? (raw.meteo[j] - lo) / span : 0.0);
    }
    return out;
}

Dataset apply_profile(const Dataset& raw, DatasetProfile profile, std::int64_t train_boundary) {
    if (profile == DatasetProfile::uci_bike_daily && raw.feature_width() < 4) {
        throw SchemaError("bike profile expects columns temp,atemp,hum,windspeed");
    }
    std::vector<RawFields> rows;
    std::vector<RawFields> train_rows;
    rows.reserve(raw.records.size());
    for (const auto& rec : raw.records) {
        rows.push_back(raw_fields_from_timestamp(rec.timestamp, rec.features));
        if (rec.timestamp < train_boundary) train_rows.push_back(rows.back());
    }
    if (train_rows.empty()) {
        throw DataError("profile scaling boundary leaves no training records");
    }
    const FeatureEncoder enc = fit_encoder(profile, train_rows);

    Dataset out;
    out.interval_seconds = raw.interval_seconds;
    out.feature_names = enc.feature_names();
    out.records.reserve(raw.records.size());
    for (std::size_t i = 0; i < raw.records.size(); ++i) {
        DemandRecord rec;
        rec.timestamp = raw.records[i].timestamp;
        rec.demand = raw.records[i].demand;
        rec.features = encode_features(rows[i], enc);
        out.records.push_back(std::move(rec));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

void validate(const SyntheticConfig& cfg) {
    if (cfg.length < 1) throw ConfigError("synthetic length must be >= 1");
    if (!(cfg.garch_gamma0 > 0.0)) throw ConfigError("garch gamma0 must be positive");
    if (cfg.garch_alpha1 < 0.0 || cfg.garch_beta1 < 0.0) {
        throw ConfigError("garch alpha1/beta1 must be nonnegative");
    }
    if (!(cfg.garch_alpha1 + cfg.garch_beta1 < 1.0)) {
        throw ConfigError("garch alpha1 + beta1 must be < 1 (stationary variance recursion)");
    }
    double ar_mass = 0.0;
    for (double a : cfg.ar) ar_mass += std::abs(a);
    if (!(ar_mass < 1.0)) {
        throw ConfigError("sum of |ar coefficients| must be < 1 (stationary mean recursion)");
    }
    if (cfg.seasonal_period < 1) throw ConfigError("seasonal period must be >= 1");
    if (cfg.seasonal_amplitude < 0.0) throw ConfigError("seasonal amplitude must be nonnegative");
    if (cfg.interval_seconds <= 0) throw ConfigError("interval must be positive");
}

Dataset gen_synthetic(const SyntheticConfig& cfg) {
    validate(cfg);
    RngState rng{cfg.seed, 0};

    const std::size_t p = cfg.ar.size();
    const std::size_t q = cfg.ma.size();
    double ar_sum = 0.0;
    for (double a : cfg.ar) ar_sum += a;
    const double base = cfg.ar_c0 / (1.0 - ar_sum);

    std::vector<double> x(cfg.length + p, base);  // p steps of pre-history at the mean
    std::vector<double> eps(cfg.length + std::max<std::size_t>(q, 1), 0.0);
    double sigma2 = cfg.garch_gamma0 / (1.0 - cfg.garch_alpha1 - cfg.garch_beta1);
    double eps_prev = 0.0;

    Dataset ds;
    ds.feature_names = {"hour_norm", "weekday_norm"};
    ds.interval_seconds = cfg.length >= 2 ? cfg.interval_seconds : 0;
    ds.records.reserve(cfg.length);

    const std::size_t off = p;  // offset of time 0 in x
    const std::size_t eoff = std::max<std::size_t>(q, 1);
    for (std::size_t t = 0; t < cfg.length; ++t) {
        sigma2 = cfg.garch_gamma0 + cfg.garch_alpha1 * eps_prev * eps_prev +
                 cfg.garch_beta1 * sigma2;
        const double e = next_normal(rng) * std::sqrt(sigma2);
        double xt = cfg.ar_c0 + e;
        for (std::size_t i = 0; i < p; ++i) xt += cfg.ar[i] * x[off + t - 1 - i];
        for (std::size_t j = 0; j < q; ++j) xt += cfg.ma[j] * eps[eoff + t - 1 - j];
        x[off + t] = xt;
        eps[eoff + t] = e;
        eps_prev = e;

        const double season = cfg.seasonal_amplitude *
                              std::sin(2.0 * std::numbers::pi * static_cast<double>(t) /
                                       static_cast<double>(cfg.seasonal_period));
        DemandRecord rec;
        rec.timestamp = cfg.start_timestamp + static_cast<std::int64_t>(t) * cfg.interval_seconds;
        rec.demand = std::max(0.0, xt + season);
        const CivilTime c = civil_from_timestamp(rec.timestamp);
        rec.features = {c.hour / 23.0, weekday_of(rec.timestamp) / 6.0};
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

std::vector<WindowRef> make_windows(const Dataset& ds, std::size_t k) {
    if (k < 1) throw ConfigError("lookback window k must be >= 1");
    if (ds.records.size() <= k) {
        throw DataError("series of length " + std::to_string(ds.records.size()) +
                        " is too short for lookback " + std::to_string(k));
    }
    std::vector<WindowRef> out;
    out.reserve(ds.records.size() - k);
    for (std::size_t b = 0; b + k < ds.records.size(); ++b) {
        out.push_back(WindowRef{b, b + k, b + k});
    }
    return out;
}

}  // namespace xrmdn
