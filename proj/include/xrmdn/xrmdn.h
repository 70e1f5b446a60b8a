/*
 * xrmdn - probabilistic demand forecasting with recurrent mixture density
 * networks.
 *
 * C API of the shared library. All functions return xrmdn_status; on any
 * failure xrmdn_last_error() carries a human-readable message for the
 * calling thread. Objects are opaque handles released with the matching
 * *_free function. Strings returned through char** are heap-allocated and
 * released with xrmdn_string_free.
 */

#ifndef XRMDN_H
#define XRMDN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum xrmdn_status {
    XRMDN_OK = 0,
    XRMDN_ERR_INTERNAL = 1,
    XRMDN_ERR_CONFIG = 2, /* bad dimensions, options, profiles */
    XRMDN_ERR_DATA = 3,   /* malformed or insufficient data */
    XRMDN_ERR_NUMERIC = 4 /* divergence or singular systems */,
    XRMDN_ERR_IO = 5      /* file system problems */
} xrmdn_status;

typedef struct xrmdn_dataset xrmdn_dataset;
typedef struct xrmdn_model xrmdn_model;

const char* xrmdn_version(void);

/* Message describing the most recent failure on this thread. */
const char* xrmdn_last_error(void);

void xrmdn_string_free(char* s);

/* "YYYY-MM-DD[THH:MM:SS[Z]]" (UTC) to unix seconds. */
xrmdn_status xrmdn_timestamp_parse(const char* text, int64_t* out);

/* Unix seconds to RFC 3339; buf must hold at least 24 bytes. */
xrmdn_status xrmdn_timestamp_format(int64_t ts, char* buf, size_t buf_len);

/* ------------------------------------------------------------------ */
/* datasets                                                            */
/* ------------------------------------------------------------------ */

/* ARMA mean recursion driven by GARCH(1,1) innovations plus a sinusoidal
 * seasonal component; demand clamped at zero. */
typedef struct xrmdn_synthetic_config {
    uint64_t length;
    double ar_c0;
    double ar_coeffs[8];
    size_t ar_order;
    double ma_coeffs[8];
    size_t ma_order;
    double garch_gamma0;
    double garch_alpha1;
    double garch_beta1;
    double seasonal_amplitude;
    uint64_t seasonal_period;
    uint64_t seed;
    int64_t start_timestamp; /* unix seconds, UTC */
    int64_t interval_seconds;
} xrmdn_synthetic_config;

xrmdn_synthetic_config xrmdn_synthetic_config_default(void);

xrmdn_status xrmdn_dataset_gen_synthetic(const xrmdn_synthetic_config* cfg, xrmdn_dataset** out);

/* CSV with header "timestamp,demand,<feature columns...>"; RFC 3339
 * timestamps, strictly increasing with constant spacing. */
xrmdn_status xrmdn_dataset_load_csv(const char* path, xrmdn_dataset** out);

/* Same, with explicit column roles. feature_cols_csv is a comma-separated
 * list of column names; NULL or "" selects every remaining column. */
xrmdn_status xrmdn_dataset_load_csv_ex(const char* path, const char* timestamp_col,
                                       const char* demand_col, const char* feature_cols_csv,
                                       xrmdn_dataset** out);

/* Loads a raw CSV and re-derives the feature columns for a named profile
 * ("nyc-taxi-10min": hour/weekday from the timestamps; "uci-bike-daily":
 * 4 temporal + 4 meteorological columns temp,atemp,hum,windspeed min-max
 * scaled with ranges fitted before boundary_rfc3339). */
xrmdn_status xrmdn_dataset_load_profile(const char* path, const char* profile,
                                        const char* boundary_rfc3339, xrmdn_dataset** out);

xrmdn_status xrmdn_dataset_save_csv(const xrmdn_dataset* ds, const char* path);

size_t xrmdn_dataset_size(const xrmdn_dataset* ds);
size_t xrmdn_dataset_feature_width(const xrmdn_dataset* ds);
int64_t xrmdn_dataset_interval_seconds(const xrmdn_dataset* ds);
xrmdn_status xrmdn_dataset_timestamp_at(const xrmdn_dataset* ds, size_t index, int64_t* out);

/* Contiguous partition: train takes timestamps strictly before the boundary.
 * Demand statistics are fitted on the train side and attached to both. */
xrmdn_status xrmdn_dataset_split(const xrmdn_dataset* ds, const char* boundary_rfc3339,
                                 xrmdn_dataset** train, xrmdn_dataset** test);

/* Split so the test side keeps the last test_len records. */
xrmdn_status xrmdn_dataset_split_tail(const xrmdn_dataset* ds, size_t test_len,
                                      xrmdn_dataset** train, xrmdn_dataset** test);

void xrmdn_dataset_free(xrmdn_dataset* ds);

/* ------------------------------------------------------------------ */
/* training                                                            */
/* ------------------------------------------------------------------ */

typedef struct xrmdn_train_config {
    uint64_t epochs;
    uint64_t lookback_k;
    uint64_t batch_len;
    double learning_rate;
    double adam_beta1;
    double adam_beta2;
    double adam_eps;
    uint32_t n_components;
    uint32_t n_units;
    uint64_t seed;
    double grad_clip; /* <= 0 disables clipping */
    double pelu_xi;
    double elu_alpha;
    int update_per_epoch;        /* 0: one optimizer step per batch segment */
    uint32_t early_stop_patience; /* 0 disables early stopping */
    double validation_fraction;
} xrmdn_train_config;

xrmdn_train_config xrmdn_train_config_default(void);

/* Trains on the dataset (its attached normalization stats, when present,
 * define the demand scaling) and returns the model plus a JSON report with
 * the per-epoch NLL trajectory. report_json may be NULL. */
xrmdn_status xrmdn_train(const xrmdn_dataset* train_ds, const xrmdn_train_config* cfg,
                         xrmdn_model** out, char** report_json);

/* Ablated variant: no weight/mean recurrence, variance recurrence only. */
xrmdn_status xrmdn_train_classic_rmdn(const xrmdn_dataset* train_ds,
                                      const xrmdn_train_config* cfg, xrmdn_model** out,
                                      char** report_json);

/* ------------------------------------------------------------------ */
/* models                                                              */
/* ------------------------------------------------------------------ */

xrmdn_status xrmdn_model_save(const xrmdn_model* m, const char* path);
xrmdn_status xrmdn_model_load(const char* path, xrmdn_model** out);
xrmdn_status xrmdn_model_to_text(const xrmdn_model* m, char** out);
uint32_t xrmdn_model_components(const xrmdn_model* m);
uint32_t xrmdn_model_input_width(const xrmdn_model* m);
void xrmdn_model_free(xrmdn_model* m);

/* ------------------------------------------------------------------ */
/* evaluation, diagnostics, comparison                                 */
/* ------------------------------------------------------------------ */

/* Rolls the model across the test split, draws samples_per_step from each
 * forecast, and writes the metric bundle (LLV, MAPE, MAE, RMSE, rejection
 * rate per percentile) as JSON plus a per-step CSV with the sample intervals.
 * Either output pointer may be NULL. */
xrmdn_status xrmdn_evaluate(const xrmdn_model* m, const xrmdn_dataset* test,
                            const double* percentiles, size_t n_percentiles,
                            uint64_t samples_per_step, uint64_t seed, char** report_json,
                            char** per_step_csv);

/* Per-step forecast distributions (weights, means, variances) as CSV. */
xrmdn_status xrmdn_forecast(const xrmdn_model* m, const xrmdn_dataset* data, char** csv_out);

/* Fits the AR baseline and applies the Ljung-Box heteroscedasticity test to
 * its squared residuals at lags 1..max_lag. */
xrmdn_status xrmdn_diagnose(const xrmdn_dataset* ds, uint32_t max_lag, uint32_t ar_order,
                            char** report_json);

/* Trains and evaluates the full model, the classic variant, the AR fit, and
 * persistence on the same split; emits a leaderboard JSON. */
xrmdn_status xrmdn_compare(const xrmdn_dataset* ds, const char* boundary_rfc3339,
                           const xrmdn_train_config* cfg, const double* percentiles,
                           size_t n_percentiles, uint64_t samples_per_step, uint32_t ar_order,
                           char** report_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* XRMDN_H */
