#include "core/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "core/timeutil.hpp"

namespace xrmdn {

using nlohmann::json;

namespace {

std::string percent_label(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", p * 100.0);
    return buf;
}

json to_json(const TrainConfig& cfg) {
    json j;
    j["epochs"] = cfg.epochs;
    j["lookback_k"] = cfg.lookback_k;
    j["batch_len"] = cfg.batch_len;
    j["learning_rate"] = cfg.learning_rate;
    j["adam_beta1"] = cfg.adam_beta1;
    j["adam_beta2"] = cfg.adam_beta2;
    j["adam_eps"] = cfg.adam_eps;
    j["n_components"] = cfg.n_components;
    j["n_units"] = cfg.n_units;
    j["seed"] = cfg.seed;
    j["grad_clip"] = cfg.grad_clip ? json(*cfg.grad_clip) : json(nullptr);
    j["pelu_xi"] = cfg.activation.xi;
    j["elu_alpha"] = cfg.activation.alpha_elu;
    j["update_per"] = cfg.update_per == TrainConfig::UpdatePer::batch ? "batch" : "epoch";
    j["early_stop_patience"] = cfg.early_stop_patience;
    j["validation_fraction"] = cfg.validation_fraction;
    return j;
}

json to_json(const EvalOptions& opts) {
    json j;
    j["percentiles"] = opts.percentiles;
    j["samples_per_step"] = opts.samples_per_step;
    j["seed"] = opts.seed;
    return j;
}

json report_to_json(const EvalReport& r) {
    json j;
    j["llv"] = r.llv;
    j["mape"] = r.mape;
    j["mae"] = r.mae;
    j["rmse"] = r.rmse;
    json rr = json::object();
    for (const auto& [p, rate] : r.rr) rr[percent_label(p)] = rate;
    j["rejection_rate"] = rr;
    j["n_cases"] = r.n_cases;
    j["n_mape_cases"] = r.n_mape_cases;
    return j;
}

MixtureForecast denormalize(const MixtureForecast& f, const NormStats& s) {
    MixtureForecast out = f;
    for (auto& m : out.means) m = denormalize_mean(m, s);
    for (auto& v : out.variances) v = denormalize_var(v, s);
    return out;
}

struct RolledStep {
    std::int64_t timestamp = 0;
    double truth = 0.0;
    MixtureForecast mixture;  // demand units
};

/// Shared evaluation rollout: resume from the stored warm state, forecast
/// each test step, then advance with the observed demand.
std::vector<RolledStep> roll_over(const XrmdnModel& model, const Dataset& data) {
    if (!model.warm.has_value()) {
        throw ConfigError("model carries no warm-start state; train it before evaluating");
    }
    const std::size_t expected_width = static_cast<std::size_t>(model.input_width);
    if (1 + data.feature_width() != expected_width) {
        throw ConfigError("model expects input width " + std::to_string(expected_width) +
                          " but the dataset provides " + std::to_string(1 + data.feature_width()) +
                          " (demand + " + std::to_string(data.feature_width()) + " features)");
    }
    if (data.records.empty()) throw DataError("evaluation data is empty");

    std::vector<RolledStep> out;
    out.reserve(data.records.size());
    RecurrentState state = model.warm->state;
    std::vector<double> input = model.warm->last_input;
    for (const DemandRecord& rec : data.records) {
        const MixtureForecast fc = xrmdn_step(model, std::span<const double>(input), state);
        out.push_back(RolledStep{rec.timestamp, rec.demand, denormalize(fc, model.norm)});
        const double observed_norm = normalize_value(rec.demand, model.norm);
        state = advance_state(state, fc, observed_norm);
        input.clear();
        input.push_back(observed_norm);
        input.insert(input.end(), rec.features.begin(), rec.features.end());
    }
    return out;
}

}  // namespace

void validate(const EvalOptions& opts) {
    if (opts.percentiles.empty()) throw ConfigError("need at least one percentile");
    for (double p : opts.percentiles) {
        if (!(p > 0.0) || !(p < 1.0)) {
            throw ConfigError("percentiles must lie strictly in (0, 1)");
        }
    }
    if (opts.samples_per_step < 1) throw ConfigError("samples_per_step must be >= 1");
}

EvalOutput evaluate_model(const XrmdnModel& model, const Dataset& test, const EvalOptions& opts) {
    validate(opts);
    const std::vector<RolledStep> rolled = roll_over(model, test);

    RngState rng{opts.seed, 0};
    EvalOutput out;
    out.steps.reserve(rolled.size());

    std::vector<double> truth;
    std::vector<double> expected;
    std::vector<MixtureForecast> mixtures;
    std::vector<std::vector<double>> samples;
    truth.reserve(rolled.size());
    expected.reserve(rolled.size());
    mixtures.reserve(rolled.size());
    samples.reserve(rolled.size());

    for (const RolledStep& rs : rolled) {
        EvalStep step;
        step.timestamp = rs.timestamp;
        step.truth = rs.truth;
        step.mixture = rs.mixture;
        step.expected = expected_demand(rs.mixture);
        samples.push_back(gmm_sample(rs.mixture, opts.samples_per_step, rng));
        for (double p : opts.percentiles) {
            step.intervals[p] = empirical_interval(samples.back(), p);
        }
        truth.push_back(rs.truth);
        expected.push_back(step.expected);
        mixtures.push_back(rs.mixture);
        out.steps.push_back(std::move(step));
    }

    EvalReport& rep = out.report;
    rep.n_cases = truth.size();
    rep.llv = llv(truth, mixtures);
    rep.mae = mae(truth, expected);
    rep.rmse = rmse(truth, expected);

    // MAPE over the nonzero-demand steps only; the strict all-steps variant
    // is the metrics-module primitive.
    std::vector<double> t_nz, e_nz;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] != 0.0) {
            t_nz.push_back(truth[i]);
            e_nz.push_back(expected[i]);
        }
    }
    rep.n_mape_cases = t_nz.size();
    rep.mape = t_nz.empty() ? 0.0 : mape(t_nz, e_nz);

    for (double p : opts.percentiles) {
        rep.rr[p] = rejection_rate(truth, samples, p);
    }
    return out;
}

std::string eval_report_json(const EvalOutput& out, const EvalOptions& opts) {
    json j = report_to_json(out.report);
    j["command"] = "evaluate";
    j["config"] = to_json(opts);
    return j.dump(2) + "\n";
}

std::string eval_steps_csv(const EvalOutput& out, const std::vector<double>& percentiles) {
    std::string csv = "timestamp,true_demand,expected_demand";
    for (double p : percentiles) {
        const std::string label = percent_label(p);
        csv += ",lo_" + label + ",hi_" + label;
    }
    csv += '\n';
    char buf[64];
    for (const EvalStep& s : out.steps) {
        csv += format_rfc3339(s.timestamp);
        std::snprintf(buf, sizeof(buf), ",%.10g,%.10g", s.truth, s.expected);
        csv += buf;
        for (double p : percentiles) {
            const auto it = s.intervals.find(p);
            std::snprintf(buf, sizeof(buf), ",%.10g,%.10g", it->second.first, it->second.second);
            csv += buf;
        }
        csv += '\n';
    }
    return csv;
}

std::string forecast_csv(const XrmdnModel& model, const Dataset& data) {
    const std::vector<RolledStep> rolled = roll_over(model, data);
    const int n = model.n_components;
    std::string csv = "timestamp,observed_demand,expected_demand";
    for (int i = 0; i < n; ++i) {
        const std::string idx = std::to_string(i + 1);
        csv += ",weight_" + idx + ",mean_" + idx + ",variance_" + idx;
    }
    csv += '\n';
    char buf[64];
    for (const RolledStep& rs : rolled) {
        csv += format_rfc3339(rs.timestamp);
        std::snprintf(buf, sizeof(buf), ",%.10g,%.10g", rs.truth, expected_demand(rs.mixture));
        csv += buf;
        for (int i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), ",%.10g,%.10g,%.10g",
                          rs.mixture.weights[static_cast<std::size_t>(i)],
                          rs.mixture.means[static_cast<std::size_t>(i)],
                          rs.mixture.variances[static_cast<std::size_t>(i)]);
            csv += buf;
        }
        csv += '\n';
    }
    return csv;
}

std::string train_report_json(const TrainReport& report, const TrainConfig& cfg) {
    json j;
    j["command"] = "train";
    j["epochs_run"] = report.epochs_run;
    j["initial_nll"] = report.initial_nll;
    j["final_nll"] = report.final_nll;
    j["epoch_nll"] = report.epoch_nll;
    j["wall_seconds"] = report.wall_seconds;
    j["config"] = to_json(cfg);
    return j.dump(2) + "\n";
}

std::string diagnose_json(const Dataset& ds, const DiagnoseOptions& opts) {
    if (opts.max_lag < 1) throw ConfigError("diagnose needs at least one lag");
    const std::vector<double> demands = ds.demands();
    const ArModel ar = fit_ar(demands, opts.ar_order);
    const std::vector<double> resid = ar_residuals(ar, demands);

    json rows = json::array();
    for (std::size_t h = 1; h <= opts.max_lag; ++h) {
        const LjungBoxResult lb = ljung_box(resid, h, /*on_squares=*/true);
        json row;
        row["lags"] = h;
        row["critical_value"] = chi_square_critical(opts.alpha, static_cast<unsigned>(h));
        row["q_stat"] = lb.q_stat;
        row["p_value"] = lb.p_value;
        row["reject_h0"] = lb.p_value < opts.alpha;
        rows.push_back(row);
    }

    json j;
    j["command"] = "diagnose";
    j["alpha"] = opts.alpha;
    j["ar_order"] = opts.ar_order;
    j["n_residuals"] = resid.size();
    j["ar_ill_conditioned"] = ar.ill_conditioned;
    j["rows"] = rows;
    json cfg;
    cfg["max_lag"] = opts.max_lag;
    cfg["ar_order"] = opts.ar_order;
    cfg["alpha"] = opts.alpha;
    j["config"] = cfg;
    return j.dump(2) + "\n";
}

namespace {

/// Point baselines are wrapped as single-Gaussian forecasters so the whole
/// leaderboard shares one metric bundle: the AR fit uses its in-sample
/// residual variance, persistence the variance of one-step differences.
EvalOutput evaluate_point_baseline(const std::vector<double>& train_demands,
                                   const Dataset& test, double sigma2,
                                   const EvalOptions& opts, bool use_ar, const ArModel& ar) {
    validate(opts);
    sigma2 = std::max(sigma2, 1e-12);
    RngState rng{opts.seed, 0};

    std::vector<double> history = train_demands;
    std::vector<double> truth, expected;
    std::vector<MixtureForecast> mixtures;
    std::vector<std::vector<double>> samples;

    EvalOutput out;
    for (const DemandRecord& rec : test.records) {
        const double point = use_ar ? predict_ar(ar, history) : persistence(history);
        MixtureForecast fc;
        fc.weights = {1.0};
        fc.means = {point};
        fc.variances = {sigma2};

        EvalStep step;
        step.timestamp = rec.timestamp;
        step.truth = rec.demand;
        step.expected = point;
        step.mixture = fc;
        samples.push_back(gmm_sample(fc, opts.samples_per_step, rng));
        for (double p : opts.percentiles) {
            step.intervals[p] = empirical_interval(samples.back(), p);
        }
        truth.push_back(rec.demand);
        expected.push_back(point);
        mixtures.push_back(fc);
        out.steps.push_back(std::move(step));
        history.push_back(rec.demand);
    }

    EvalReport& rep = out.report;
    rep.n_cases = truth.size();
    rep.llv = llv(truth, mixtures);
    rep.mae = mae(truth, expected);
    rep.rmse = rmse(truth, expected);
    std::vector<double> t_nz, e_nz;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] != 0.0) {
            t_nz.push_back(truth[i]);
            e_nz.push_back(expected[i]);
        }
    }
    rep.n_mape_cases = t_nz.size();
    rep.mape = t_nz.empty() ? 0.0 : mape(t_nz, e_nz);
    for (double p : opts.percentiles) rep.rr[p] = rejection_rate(truth, samples, p);
    return out;
}

}  // namespace

std::string compare_json(const Dataset& full, std::int64_t boundary, const CompareOptions& opts) {
    validate(opts.eval);
    auto [train_ds, test_ds] = split(full, boundary);

    TrainResult xr = train(train_ds, opts.train, ModelKind::xrmdn);
    TrainResult cr = train_classic_rmdn(train_ds, opts.train);

    const EvalOutput xr_eval = evaluate_model(xr.model, test_ds, opts.eval);
    const EvalOutput cr_eval = evaluate_model(cr.model, test_ds, opts.eval);

    const std::vector<double> train_demands = train_ds.demands();
    const ArModel ar = fit_ar(train_demands, opts.ar_order);
    EvalOptions ar_opts = opts.eval;
    ar_opts.seed = fork_rng(RngState{opts.eval.seed, 0}, 101).seed;
    const EvalOutput ar_eval =
        evaluate_point_baseline(train_demands, test_ds, ar.resid_variance, ar_opts, true, ar);

    double diff_var = 0.0;
    {
        std::vector<double> diffs;
        for (std::size_t i = 1; i < train_demands.size(); ++i) {
            diffs.push_back(train_demands[i] - train_demands[i - 1]);
        }
        double mean = 0.0;
        for (double d : diffs) mean += d;
        mean /= static_cast<double>(diffs.size());
        for (double d : diffs) diff_var += (d - mean) * (d - mean);
        diff_var /= static_cast<double>(diffs.size());
    }
    EvalOptions pers_opts = opts.eval;
    pers_opts.seed = fork_rng(RngState{opts.eval.seed, 0}, 202).seed;
    const EvalOutput pers_eval = evaluate_point_baseline(train_demands, test_ds, diff_var,
                                                         pers_opts, false, ar);

    json models;
    models["xrmdn"] = report_to_json(xr_eval.report);
    models["classic_rmdn"] = report_to_json(cr_eval.report);
    models["ar"] = report_to_json(ar_eval.report);
    models["persistence"] = report_to_json(pers_eval.report);

    const std::vector<std::pair<std::string, const EvalReport*>> entries = {
        {"xrmdn", &xr_eval.report},
        {"classic_rmdn", &cr_eval.report},
        {"ar", &ar_eval.report},
        {"persistence", &pers_eval.report},
    };
    json winners;
    auto best_by = [&](auto key, bool higher_better) {
        std::string best_name;
        double best = 0.0;
        for (const auto& [name, rep] : entries) {
            const double v = key(*rep);
            if (best_name.empty() || (higher_better ? v > best : v < best)) {
                best_name = name;
                best = v;
            }
        }
        return best_name;
    };
    winners["llv"] = best_by([](const EvalReport& r) { return r.llv; }, true);
    winners["mae"] = best_by([](const EvalReport& r) { return r.mae; }, false);
    winners["rmse"] = best_by([](const EvalReport& r) { return r.rmse; }, false);
    winners["mape"] = best_by([](const EvalReport& r) { return r.mape; }, false);
    for (double p : opts.eval.percentiles) {
        winners["rr_" + percent_label(p)] =
            best_by([p](const EvalReport& r) { return r.rr.at(p); }, false);
    }

    json j;
    j["command"] = "compare";
    j["boundary"] = format_rfc3339(boundary);
    j["train_length"] = train_ds.size();
    j["test_length"] = test_ds.size();
    j["models"] = models;
    j["winners"] = winners;
    json cfg;
    cfg["train"] = to_json(opts.train);
    cfg["eval"] = to_json(opts.eval);
    cfg["ar_order"] = opts.ar_order;
    j["config"] = cfg;
    return j.dump(2) + "\n";
}

std::string synthetic_config_json(const SyntheticConfig& cfg) {
    json j;
    j["command"] = "synth";
    j["length"] = cfg.length;
    j["ar_c0"] = cfg.ar_c0;
    j["ar"] = cfg.ar;
    j["ma"] = cfg.ma;
    j["garch_gamma0"] = cfg.garch_gamma0;
    j["garch_alpha1"] = cfg.garch_alpha1;
    j["garch_beta1"] = cfg.garch_beta1;
    j["seasonal_amplitude"] = cfg.seasonal_amplitude;
    j["seasonal_period"] = cfg.seasonal_period;
    j["seed"] = cfg.seed;
    j["start_timestamp"] = format_rfc3339(cfg.start_timestamp);
    j["interval_seconds"] = cfg.interval_seconds;
    return j.dump(2) + "\n";
}

}  // namespace xrmdn
