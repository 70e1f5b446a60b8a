#include "xrmdn/xrmdn.h"

#include <cstring>
#include <new>
#include <string>

#include "core/baselines.hpp"
#include "core/data.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/timeutil.hpp"
#include "core/training.hpp"

struct xrmdn_dataset {
    xrmdn::Dataset impl;
};

struct xrmdn_model {
    xrmdn::XrmdnModel impl;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <class F>
xrmdn_status guarded(F&& body) {
    try {
        body();
        return XRMDN_OK;
    } catch (const xrmdn::Error& e) {
        g_last_error = e.what();
        return static_cast<xrmdn_status>(static_cast<int>(e.code()));
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return XRMDN_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return XRMDN_ERR_INTERNAL;
    }
}

xrmdn_status require(bool ok, const char* message) {
    if (!ok) {
        g_last_error = message;
        return XRMDN_ERR_CONFIG;
    }
    return XRMDN_OK;
}

xrmdn::SyntheticConfig to_core(const xrmdn_synthetic_config& c) {
    xrmdn::SyntheticConfig cfg;
    cfg.length = c.length;
    cfg.ar_c0 = c.ar_c0;
    cfg.ar.assign(c.ar_coeffs, c.ar_coeffs + c.ar_order);
    cfg.ma.assign(c.ma_coeffs, c.ma_coeffs + c.ma_order);
    cfg.garch_gamma0 = c.garch_gamma0;
    cfg.garch_alpha1 = c.garch_alpha1;
    cfg.garch_beta1 = c.garch_beta1;
    cfg.seasonal_amplitude = c.seasonal_amplitude;
    cfg.seasonal_period = c.seasonal_period;
    cfg.seed = c.seed;
    cfg.start_timestamp = c.start_timestamp;
    cfg.interval_seconds = c.interval_seconds;
    return cfg;
}

xrmdn::TrainConfig to_core(const xrmdn_train_config& c) {
    xrmdn::TrainConfig cfg;
    cfg.epochs = c.epochs;
    cfg.lookback_k = c.lookback_k;
    cfg.batch_len = c.batch_len;
    cfg.learning_rate = c.learning_rate;
    cfg.adam_beta1 = c.adam_beta1;
    cfg.adam_beta2 = c.adam_beta2;
    cfg.adam_eps = c.adam_eps;
    cfg.n_components = static_cast<int>(c.n_components);
    cfg.n_units = static_cast<int>(c.n_units);
    cfg.seed = c.seed;
    if (c.grad_clip > 0.0) {
        cfg.grad_clip = c.grad_clip;
    } else {
        cfg.grad_clip.reset();
    }
    cfg.activation.xi = c.pelu_xi;
    cfg.activation.alpha_elu = c.elu_alpha;
    cfg.update_per = c.update_per_epoch ? xrmdn::TrainConfig::UpdatePer::epoch
                                        : xrmdn::TrainConfig::UpdatePer::batch;
    cfg.early_stop_patience = c.early_stop_patience;
    cfg.validation_fraction = c.validation_fraction;
    return cfg;
}

xrmdn_status train_common(const xrmdn_dataset* ds, const xrmdn_train_config* cfg,
                          xrmdn_model** out, char** report_json, xrmdn::ModelKind kind) {
    if (auto st = require(ds && cfg && out, "null argument"); st != XRMDN_OK) return st;
    *out = nullptr;
    return guarded([&] {
        xrmdn::TrainResult res = xrmdn::train(ds->impl, to_core(*cfg), kind);
        if (report_json) {
            *report_json = dup_string(xrmdn::train_report_json(res.report, to_core(*cfg)));
        }
        *out = new xrmdn_model{std::move(res.model)};
    });
}

}  // namespace

extern "C" {

const char* xrmdn_version(void) { return "1.0.0"; }

const char* xrmdn_last_error(void) { return g_last_error.c_str(); }

void xrmdn_string_free(char* s) { delete[] s; }

xrmdn_status xrmdn_timestamp_parse(const char* text, int64_t* out) {
    if (auto st = require(text && out, "null argument"); st != XRMDN_OK) return st;
    return guarded([&] { *out = xrmdn::parse_rfc3339(text); });
}

xrmdn_status xrmdn_timestamp_format(int64_t ts, char* buf, size_t buf_len) {
    if (auto st = require(buf != nullptr, "null argument"); st != XRMDN_OK) return st;
    return guarded([&] {
        const std::string s = xrmdn::format_rfc3339(ts);
        if (buf_len < s.size() + 1) throw xrmdn::ConfigError("timestamp buffer too small");
        std::memcpy(buf, s.c_str(), s.size() + 1);
    });
}

xrmdn_synthetic_config xrmdn_synthetic_config_default(void) {
    const xrmdn::SyntheticConfig d;
    xrmdn_synthetic_config c{};
    c.length = d.length;
    c.ar_c0 = d.ar_c0;
    c.ar_order = d.ar.size();
    for (size_t i = 0; i < d.ar.size(); ++i) c.ar_coeffs[i] = d.ar[i];
    c.ma_order = d.ma.size();
    for (size_t i = 0; i < d.ma.size(); ++i) c.ma_coeffs[i] = d.ma[i];
    c.garch_gamma0 = d.garch_gamma0;
    c.garch_alpha1 = d.garch_alpha1;
    c.garch_beta1 = d.garch_beta1;
    c.seasonal_amplitude = d.seasonal_amplitude;
    c.seasonal_period = d.seasonal_period;
    c.seed = d.seed;
    c.start_timestamp = d.start_timestamp;
    c.interval_seconds = d.interval_seconds;
    return c;
}

xrmdn_train_config xrmdn_train_config_default(void) {
    const xrmdn::TrainConfig d;
    xrmdn_train_config c{};
    c.epochs = d.epochs;
    c.lookback_k = d.lookback_k;
    c.batch_len = d.batch_len;
    c.learning_rate = d.learning_rate;
    c.adam_beta1 = d.adam_beta1;
    c.adam_beta2 = d.adam_beta2;
    c.adam_eps = d.adam_eps;
    c.n_components = static_cast<uint32_t>(d.n_components);
    c.n_units = static_cast<uint32_t>(d.n_units);
    c.seed = d.seed;
    c.grad_clip = d.grad_clip ? *d.grad_clip : 0.0;
    c.pelu_xi = d.activation.xi;
    c.elu_alpha = d.activation.alpha_elu;
    c.update_per_epoch = 0;
    c.early_stop_patience = static_cast<uint32_t>(d.early_stop_patience);
    c.validation_fraction = d.validation_fraction;
    return c;
}

xrmdn_status xrmdn_dataset_gen_synthetic(const xrmdn_synthetic_config* cfg, xrmdn_dataset** out) {
    if (auto st = require(cfg && out, "null argument"); st != XRMDN_OK) return st;
    if (auto st = require(cfg->ar_order <= 8 && cfg->ma_order <= 8, "ar/ma order is limited to 8");
        st != XRMDN_OK) {
        return st;
    }
    *out = nullptr;
    return guarded([&] { *out = new xrmdn_dataset{xrmdn::gen_synthetic(to_core(*cfg))}; });
}

xrmdn_status xrmdn_dataset_load_csv(const char* path, xrmdn_dataset** out) {
    return xrmdn_dataset_load_csv_ex(path, "timestamp", "demand", nullptr, out);
}

xrmdn_status xrmdn_dataset_load_csv_ex(const char* path, const char* timestamp_col,
                                       const char* demand_col, const char* feature_cols_csv,
                                       xrmdn_dataset** out) {
    if (auto st = require(path && timestamp_col && demand_col && out, "null argument");
        st != XRMDN_OK) {
        return st;
    }
    *out = nullptr;
    return guarded([&] {
        xrmdn::CsvSchema schema;
        schema.timestamp_col = timestamp_col;
        schema.demand_col = demand_col;
        if (feature_cols_csv && *feature_cols_csv) {
            std::string cols = feature_cols_csv;
            std::size_t pos = 0;
            while (pos != std::string::npos) {
                const std::size_t comma = cols.find(',', pos);
                const std::string name = cols.substr(
                    pos, comma == std::string::npos ? std::string::npos : comma - pos);
                if (!name.empty()) schema.feature_cols.push_back(name);
                pos = comma == std::string::npos ? comma : comma + 1;
            }
        }
        *out = new xrmdn_dataset{xrmdn::load_csv(path, schema)};
    });
}

xrmdn_status xrmdn_dataset_load_profile(const char* path, const char* profile,
                                        const char* boundary_rfc3339, xrmdn_dataset** out) {
    if (auto st = require(path && profile && boundary_rfc3339 && out, "null argument");
        st != XRMDN_OK) {
        return st;
    }
    *out = nullptr;
    return guarded([&] {
        const xrmdn::DatasetProfile p = xrmdn::profile_from_string(profile);
        const std::int64_t boundary = xrmdn::parse_rfc3339(boundary_rfc3339);
        const xrmdn::Dataset raw = xrmdn::load_csv(path);
        *out = new xrmdn_dataset{xrmdn::apply_profile(raw, p, boundary)};
    });
}

xrmdn_status xrmdn_dataset_save_csv(const xrmdn_dataset* ds, const char* path) {
    if (auto st = require(ds && path, "null argument"); st != XRMDN_OK) return st;
    return guarded([&] { xrmdn::save_csv(ds->impl, path); });
}

size_t xrmdn_dataset_size(const xrmdn_dataset* ds) { return ds ? ds->impl.size() : 0; }

size_t xrmdn_dataset_feature_width(const xrmdn_dataset* ds) {
    return ds ? ds->impl.feature_width() : 0;
}

int64_t xrmdn_dataset_interval_seconds(const xrmdn_dataset* ds) {
    return ds ? ds->impl.interval_seconds : 0;
}

xrmdn_status xrmdn_dataset_timestamp_at(const xrmdn_dataset* ds, size_t index, int64_t* out) {
    if (auto st = require(ds && out, "null argument"); st != XRMDN_OK) return st;
    return guarded([&] {
        if (index >= ds->impl.size()) throw xrmdn::DataError("record index out of range");
        *out = ds->impl.records[index].timestamp;
    });
}

xrmdn_status xrmdn_dataset_split(const xrmdn_dataset* ds, const char* boundary_rfc3339,
                                 xrmdn_dataset** train, xrmdn_dataset** test) {
    if (auto st = require(ds && boundary_rfc3339 && train && test, "null argument");
        st != XRMDN_OK) {
        return st;
    }
    *train = nullptr;
    *test = nullptr;
    return guarded([&] {
        auto [tr, te] = xrmdn::split(ds->impl, xrmdn::parse_rfc3339(boundary_rfc3339));
        *train = new xrmdn_dataset{std::move(tr)};
        *test = new xrmdn_dataset{std::move(te)};
    });
}

xrmdn_status xrmdn_dataset_split_tail(const xrmdn_dataset* ds, size_t test_len,
                                      xrmdn_dataset** train, xrmdn_dataset** test) {
    if (auto st = require(ds && train && test, "null argument"); st != XRMDN_OK) return st;
    *train = nullptr;
    *test = nullptr;
    return guarded([&] {
        if (test_len == 0 || test_len >= ds->impl.size()) {
            throw xrmdn::DataError("test length must leave both sides non-empty");
        }
        const std::int64_t boundary =
            ds->impl.records[ds->impl.size() - test_len].timestamp;
        auto [tr, te] = xrmdn::split(ds->impl, boundary);
        *train = new xrmdn_dataset{std::move(tr)};
        *test = new xrmdn_dataset{std::move(te)};
    });
}

void xrmdn_dataset_free(xrmdn_dataset* ds) { delete ds; }

xrmdn_status xrmdn_train(const xrmdn_dataset* train_ds, const xrmdn_train_config* cfg,
                         xrmdn_model** out, char** report_json) {
    return train_common(train_ds, cfg, out, report_json, xrmdn::ModelKind::xrmdn);
}

xrmdn_status xrmdn_train_classic_rmdn(const xrmdn_dataset* train_ds,
                                      const xrmdn_train_config* cfg, xrmdn_model** out,
                                      char** report_json) {
    return train_common(train_ds, cfg, out, report_json, xrmdn::ModelKind::classic_rmdn);
}

xrmdn_status xrmdn_model_save(const xrmdn_model* m, const char* path) {
    if (auto st = require(m && path, "null argument"); st != XRMDN_OK) return st;
    return guarded([&] { xrmdn::save_model(m->impl, path); });
}

xrmdn_status xrmdn_model_load(const char* path, xrmdn_model** out) {
    if (auto st = require(path && out, "null argument"); st != XRMDN_OK) return st;
    *out = nullptr;
    return guarded([&] { *out = new xrmdn_model{xrmdn::load_model(path)}; });
}

xrmdn_status xrmdn_model_to_text(const xrmdn_model* m, char** out) {
    if (auto st = require(m && out, "null argument"); st != XRMDN_OK) return st;
    return guarded([&] { *out = dup_string(xrmdn::model_to_text(m->impl)); });
}

uint32_t xrmdn_model_components(const xrmdn_model* m) {
    return m ? static_cast<uint32_t>(m->impl.n_components) : 0;
}

uint32_t xrmdn_model_input_width(const xrmdn_model* m) {
    return m ? static_cast<uint32_t>(m->impl.input_width) : 0;
}

void xrmdn_model_free(xrmdn_model* m) { delete m; }

xrmdn_status xrmdn_evaluate(const xrmdn_model* m, const xrmdn_dataset* test,
                            const double* percentiles, size_t n_percentiles,
                            uint64_t samples_per_step, uint64_t seed, char** report_json,
                            char** per_step_csv) {
    if (auto st = require(m && test, "null argument"); st != XRMDN_OK) return st;
    if (auto st = require(n_percentiles == 0 || percentiles != nullptr,
                          "percentiles pointer is null");
        st != XRMDN_OK) {
        return st;
    }
    return guarded([&] {
        xrmdn::EvalOptions opts;
        if (n_percentiles > 0) opts.percentiles.assign(percentiles, percentiles + n_percentiles);
        opts.samples_per_step = samples_per_step;
        opts.seed = seed;
        const xrmdn::EvalOutput out = xrmdn::evaluate_model(m->impl, test->impl, opts);
        if (report_json) *report_json = dup_string(xrmdn::eval_report_json(out, opts));
        if (per_step_csv) {
            *per_step_csv = dup_string(xrmdn::eval_steps_csv(out, opts.percentiles));
        }
    });
}

xrmdn_status xrmdn_forecast(const xrmdn_model* m, const xrmdn_dataset* data, char** csv_out) {
    if (auto st = require(m && data && csv_out, "null argument"); st != XRMDN_OK) return st;
    return guarded([&] { *csv_out = dup_string(xrmdn::forecast_csv(m->impl, data->impl)); });
}

xrmdn_status xrmdn_diagnose(const xrmdn_dataset* ds, uint32_t max_lag, uint32_t ar_order,
                            char** report_json) {
    if (auto st = require(ds && report_json, "null argument"); st != XRMDN_OK) return st;
    return guarded([&] {
        xrmdn::DiagnoseOptions opts;
        opts.max_lag = max_lag;
        opts.ar_order = ar_order;
        *report_json = dup_string(xrmdn::diagnose_json(ds->impl, opts));
    });
}

xrmdn_status xrmdn_compare(const xrmdn_dataset* ds, const char* boundary_rfc3339,
                           const xrmdn_train_config* cfg, const double* percentiles,
                           size_t n_percentiles, uint64_t samples_per_step, uint32_t ar_order,
                           char** report_json) {
    if (auto st = require(ds && boundary_rfc3339 && cfg && report_json, "null argument");
        st != XRMDN_OK) {
        return st;
    }
    return guarded([&] {
        xrmdn::CompareOptions opts;
        opts.train = to_core(*cfg);
        if (n_percentiles > 0) {
            opts.eval.percentiles.assign(percentiles, percentiles + n_percentiles);
        }
        opts.eval.samples_per_step = samples_per_step;
        opts.eval.seed = cfg->seed;
        opts.ar_order = ar_order;
        *report_json =
            dup_string(xrmdn::compare_json(ds->impl, xrmdn::parse_rfc3339(boundary_rfc3339), opts));
    });
}

} /* extern "C" */
