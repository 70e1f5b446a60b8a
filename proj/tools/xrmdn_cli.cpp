// Command-line front end. Everything flows through the public C API in
// xrmdn/xrmdn.h; this file only parses flags, moves bytes to disk, and maps
// status codes to exit codes.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xrmdn/xrmdn.h"

namespace {

using nlohmann::json;

int fail(xrmdn_status status) {
    std::fprintf(stderr, "error: %s\n", xrmdn_last_error());
    return static_cast<int>(status);
}

int write_file(const std::string& path, const char* body) {
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) {
        std::fprintf(stderr, "error: cannot open %s for writing\n", path.c_str());
        return static_cast<int>(XRMDN_ERR_IO);
    }
    f << body;
    if (!f) {
        std::fprintf(stderr, "error: failed writing %s\n", path.c_str());
        return static_cast<int>(XRMDN_ERR_IO);
    }
    return 0;
}

int ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        std::fprintf(stderr, "error: cannot create directory %s: %s\n", dir.c_str(),
                     ec.message().c_str());
        return static_cast<int>(XRMDN_ERR_IO);
    }
    return 0;
}

struct DatasetHandle {
    xrmdn_dataset* ptr = nullptr;
    ~DatasetHandle() { xrmdn_dataset_free(ptr); }
};

struct ModelHandle {
    xrmdn_model* ptr = nullptr;
    ~ModelHandle() { xrmdn_model_free(ptr); }
};

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { xrmdn_string_free(ptr); }
};

/// Column mapping read from a --schema file: `timestamp = <col>`,
/// `demand = <col>`, `features = <col>,<col>,...` (one key per line, '#'
/// comments).
struct Schema {
    std::string timestamp = "timestamp";
    std::string demand = "demand";
    std::string features;  // comma separated; empty selects the rest
};

int read_schema(const std::string& path, Schema& out) {
    std::ifstream f(path);
    if (!f) {
        std::fprintf(stderr, "error: cannot open schema file %s\n", path.c_str());
        return static_cast<int>(XRMDN_ERR_IO);
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string s) {
            const std::size_t a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const std::size_t b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        if (strip(line).empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: %s:%zu: expected 'key = value'\n", path.c_str(), lineno);
            return static_cast<int>(XRMDN_ERR_CONFIG);
        }
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key == "timestamp") {
            out.timestamp = value;
        } else if (key == "demand") {
            out.demand = value;
        } else if (key == "features") {
            out.features = value;
        } else {
            std::fprintf(stderr, "error: %s:%zu: unknown schema key '%s'\n", path.c_str(), lineno,
                         key.c_str());
            return static_cast<int>(XRMDN_ERR_CONFIG);
        }
    }
    return 0;
}

/// Loads --data, applying --schema column mapping, --profile re-encoding,
/// and/or the --split boundary. `want` selects which side of the split the
/// command consumes.
enum class Side { whole, train, test };

int load_side(const std::string& data_path, const std::string& schema_path,
              const std::string& profile, const std::string& split_at, Side want,
              DatasetHandle& out) {
    DatasetHandle full;
    xrmdn_status st;
    if (!profile.empty()) {
        const std::string boundary = split_at.empty() ? "9999-01-01T00:00:00Z" : split_at;
        st = xrmdn_dataset_load_profile(data_path.c_str(), profile.c_str(), boundary.c_str(),
                                        &full.ptr);
    } else if (!schema_path.empty()) {
        Schema schema;
        if (int rc = read_schema(schema_path, schema)) return rc;
        st = xrmdn_dataset_load_csv_ex(data_path.c_str(), schema.timestamp.c_str(),
                                       schema.demand.c_str(),
                                       schema.features.empty() ? nullptr : schema.features.c_str(),
                                       &full.ptr);
    } else {
        st = xrmdn_dataset_load_csv(data_path.c_str(), &full.ptr);
    }
    if (st != XRMDN_OK) return fail(st);

    if (split_at.empty() || want == Side::whole) {
        out.ptr = full.ptr;
        full.ptr = nullptr;
        return 0;
    }
    DatasetHandle train, test;
    st = xrmdn_dataset_split(full.ptr, split_at.c_str(), &train.ptr, &test.ptr);
    if (st != XRMDN_OK) return fail(st);
    DatasetHandle& keep = want == Side::train ? train : test;
    out.ptr = keep.ptr;
    keep.ptr = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic demand forecasting with recurrent mixture density networks"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name
    app.set_config("--config", "", "Key-value config file with one [section] per command");

    std::uint64_t seed = 1;
    std::string out_dir = ".";
    app.add_option("--seed", seed, "Seed shared by every stochastic step")->capture_default_str();
    app.add_option("--out-dir", out_dir, "Directory for command outputs")->capture_default_str();

    // ---- synth ----------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate a heteroscedastic synthetic dataset");
    xrmdn_synthetic_config scfg = xrmdn_synthetic_config_default();
    std::string synth_out = "synthetic.csv";
    std::vector<double> ar_coeffs(scfg.ar_coeffs, scfg.ar_coeffs + scfg.ar_order);
    std::vector<double> ma_coeffs(scfg.ma_coeffs, scfg.ma_coeffs + scfg.ma_order);
    std::string synth_start = "2016-01-01T00:00:00Z";
    synth->add_option("--out", synth_out, "Output CSV path")->capture_default_str();
    synth->add_option("--length", scfg.length, "Number of steps")->capture_default_str();
    synth->add_option("--ar-c0", scfg.ar_c0, "Mean recursion intercept")->capture_default_str();
    synth->add_option("--ar", ar_coeffs, "AR coefficients a1,a2,...")->delimiter(',');
    synth->add_option("--ma", ma_coeffs, "MA coefficients b1,b2,...")->delimiter(',');
    synth->add_option("--gamma0", scfg.garch_gamma0, "GARCH baseline variance")
        ->capture_default_str();
    synth->add_option("--alpha1", scfg.garch_alpha1, "GARCH squared-innovation weight")
        ->capture_default_str();
    synth->add_option("--beta1", scfg.garch_beta1, "GARCH variance carry-over")
        ->capture_default_str();
    synth->add_option("--amplitude", scfg.seasonal_amplitude, "Seasonal sine amplitude")
        ->capture_default_str();
    synth->add_option("--period", scfg.seasonal_period, "Seasonal period in steps")
        ->capture_default_str();
    synth->add_option("--start", synth_start, "First timestamp (RFC 3339)")
        ->capture_default_str();
    synth->add_option("--interval", scfg.interval_seconds, "Step length in seconds")
        ->capture_default_str();

    // ---- shared train/compare options ------------------------------------
    xrmdn_train_config tcfg = xrmdn_train_config_default();
    std::string data_path;
    std::string profile;
    std::string split_at;
    std::string update_per = "batch";

    const auto add_train_options = [&](CLI::App* cmd) {
        cmd->add_option("--epochs", tcfg.epochs, "Training epochs")->capture_default_str();
        cmd->add_option("--batch-len", tcfg.batch_len, "Steps per batch segment")
            ->capture_default_str();
        cmd->add_option("--lookback", tcfg.lookback_k, "Lookback window length")
            ->capture_default_str();
        cmd->add_option("--lr", tcfg.learning_rate, "Adam learning rate")->capture_default_str();
        cmd->add_option("--components", tcfg.n_components, "Gaussian mixture components")
            ->capture_default_str();
        cmd->add_option("--units", tcfg.n_units, "Hidden units per sub-network")
            ->capture_default_str();
        cmd->add_option("--grad-clip", tcfg.grad_clip, "Global gradient norm cap (<=0 disables)")
            ->capture_default_str();
        cmd->add_option("--xi", tcfg.pelu_xi, "Variance floor of the PELU output")
            ->capture_default_str();
        cmd->add_option("--elu-alpha", tcfg.elu_alpha, "ELU negative-branch scale")
            ->capture_default_str();
        cmd->add_option("--update-per", update_per, "Optimizer step granularity: batch|epoch")
            ->capture_default_str();
        cmd->add_option("--patience", tcfg.early_stop_patience,
                        "Early-stopping patience in epochs (0 disables)")
            ->capture_default_str();
        cmd->add_option("--val-fraction", tcfg.validation_fraction,
                        "Validation tail fraction for early stopping")
            ->capture_default_str();
    };
    std::string schema_path;
    const auto add_data_options = [&](CLI::App* cmd, bool with_split = true) {
        cmd->add_option("--data", data_path, "Dataset CSV")->required();
        cmd->add_option("--schema", schema_path,
                        "Column mapping file (timestamp/demand/features keys)");
        cmd->add_option("--profile", profile,
                        "Feature profile: nyc-taxi-10min or uci-bike-daily");
        if (with_split) {
            cmd->add_option("--split", split_at, "Train/test boundary timestamp (RFC 3339)");
        }
    };

    auto* train_cmd = app.add_subcommand("train", "Train a model on a demand series");
    add_data_options(train_cmd);
    add_train_options(train_cmd);
    bool train_classic = false;
    train_cmd->add_flag("--classic", train_classic,
                        "Train the classic variant (variance recurrence only)");

    // ---- forecast ---------------------------------------------------------
    auto* forecast_cmd =
        app.add_subcommand("forecast", "Emit per-step forecast distributions for a series");
    std::string model_path;
    std::string forecast_out = "forecast.csv";
    forecast_cmd->add_option("--model", model_path, "Trained model file")->required();
    add_data_options(forecast_cmd);
    forecast_cmd->add_option("--out", forecast_out, "Output CSV path")->capture_default_str();

    // ---- evaluate ----------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a trained model on a test series");
    std::vector<double> percentiles = {0.75, 0.90, 0.95};
    std::uint64_t samples_per_step = 1000;
    eval_cmd->add_option("--model", model_path, "Trained model file")->required();
    add_data_options(eval_cmd);
    eval_cmd->add_option("--percentiles", percentiles, "Interval percentiles in (0,1)")
        ->delimiter(',');
    eval_cmd->add_option("--samples", samples_per_step, "Samples drawn per step")
        ->capture_default_str();

    // ---- diagnose ----------------------------------------------------------
    auto* diag_cmd =
        app.add_subcommand("diagnose", "Heteroscedasticity diagnostics on a demand series");
    std::uint32_t lags = 5;
    std::uint32_t ar_order = 3;
    std::string diag_out = "diagnose.json";
    add_data_options(diag_cmd, /*with_split=*/false);
    diag_cmd->add_option("--lags", lags, "Maximum tested lag")->capture_default_str();
    diag_cmd->add_option("--ar-order", ar_order, "Order of the residual-producing AR fit")
        ->capture_default_str();
    diag_cmd->add_option("--out", diag_out, "Output JSON path")->capture_default_str();

    // ---- compare ------------------------------------------------------------
    auto* compare_cmd = app.add_subcommand(
        "compare", "Train and score the model family plus baselines on one split");
    add_data_options(compare_cmd);
    add_train_options(compare_cmd);
    compare_cmd->add_option("--percentiles", percentiles, "Interval percentiles in (0,1)")
        ->delimiter(',');
    compare_cmd->add_option("--samples", samples_per_step, "Samples drawn per step")
        ->capture_default_str();
    compare_cmd->add_option("--ar-order", ar_order, "AR baseline order")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        (void)app.exit(e);
        return static_cast<int>(XRMDN_ERR_CONFIG);
    }

    tcfg.seed = seed;
    tcfg.update_per_epoch = (update_per == "epoch") ? 1 : 0;
    if (update_per != "batch" && update_per != "epoch") {
        std::fprintf(stderr, "error: --update-per must be 'batch' or 'epoch'\n");
        return static_cast<int>(XRMDN_ERR_CONFIG);
    }

    // daily data gets a 28-step default segment unless set explicitly
    if (profile == "uci-bike-daily") {
        for (CLI::App* cmd : {train_cmd, compare_cmd}) {
            if (!cmd->parsed()) continue;
            if (cmd->count("--batch-len") == 0) tcfg.batch_len = 28;
            if (cmd->count("--lookback") == 0) tcfg.lookback_k = 28;
        }
    }

    if (synth->parsed()) {
        if (ar_coeffs.size() > 8 || ma_coeffs.size() > 8) {
            std::fprintf(stderr, "error: at most 8 AR/MA coefficients are supported\n");
            return static_cast<int>(XRMDN_ERR_CONFIG);
        }
        scfg.ar_order = ar_coeffs.size();
        for (std::size_t i = 0; i < ar_coeffs.size(); ++i) scfg.ar_coeffs[i] = ar_coeffs[i];
        scfg.ma_order = ma_coeffs.size();
        for (std::size_t i = 0; i < ma_coeffs.size(); ++i) scfg.ma_coeffs[i] = ma_coeffs[i];
        scfg.seed = seed;
        if (xrmdn_status st = xrmdn_timestamp_parse(synth_start.c_str(), &scfg.start_timestamp);
            st != XRMDN_OK) {
            return fail(st);
        }

        DatasetHandle ds;
        xrmdn_status st = xrmdn_dataset_gen_synthetic(&scfg, &ds.ptr);
        if (st != XRMDN_OK) return fail(st);
        if (int rc = ensure_dir(std::filesystem::path(synth_out).parent_path().string().empty()
                                    ? "."
                                    : std::filesystem::path(synth_out).parent_path().string())) {
            return rc;
        }
        st = xrmdn_dataset_save_csv(ds.ptr, synth_out.c_str());
        if (st != XRMDN_OK) return fail(st);

        json sidecar;
        sidecar["command"] = "synth";
        sidecar["length"] = scfg.length;
        sidecar["ar_c0"] = scfg.ar_c0;
        sidecar["ar"] = ar_coeffs;
        sidecar["ma"] = ma_coeffs;
        sidecar["garch_gamma0"] = scfg.garch_gamma0;
        sidecar["garch_alpha1"] = scfg.garch_alpha1;
        sidecar["garch_beta1"] = scfg.garch_beta1;
        sidecar["seasonal_amplitude"] = scfg.seasonal_amplitude;
        sidecar["seasonal_period"] = scfg.seasonal_period;
        sidecar["seed"] = scfg.seed;
        sidecar["start_timestamp"] = scfg.start_timestamp;
        sidecar["interval_seconds"] = scfg.interval_seconds;
        sidecar["rows"] = xrmdn_dataset_size(ds.ptr);
        if (int rc = write_file(synth_out + ".json", (sidecar.dump(2) + "\n").c_str())) return rc;
        std::printf("wrote %s (%zu rows) and %s.json\n", synth_out.c_str(),
                    xrmdn_dataset_size(ds.ptr), synth_out.c_str());
        return 0;
    }

    if (train_cmd->parsed()) {
        DatasetHandle train_ds;
        if (int rc = load_side(data_path, schema_path, profile, split_at, Side::train, train_ds)) return rc;

        ModelHandle model;
        OwnedString report;
        const xrmdn_status st =
            train_classic
                ? xrmdn_train_classic_rmdn(train_ds.ptr, &tcfg, &model.ptr, &report.ptr)
                : xrmdn_train(train_ds.ptr, &tcfg, &model.ptr, &report.ptr);
        if (st != XRMDN_OK) return fail(st);

        if (int rc = ensure_dir(out_dir)) return rc;
        const std::string model_out = out_dir + "/model.bin";
        if (xrmdn_status s2 = xrmdn_model_save(model.ptr, model_out.c_str()); s2 != XRMDN_OK) {
            return fail(s2);
        }
        if (int rc = write_file(out_dir + "/train_report.json", report.ptr)) return rc;

        const json rep = json::parse(report.ptr);
        std::printf("trained %s: %zu epochs, NLL %.4f -> %.4f; model at %s\n",
                    train_classic ? "classic rmdn" : "xrmdn",
                    rep["epochs_run"].get<std::size_t>(), rep["initial_nll"].get<double>(),
                    rep["final_nll"].get<double>(), model_out.c_str());
        return 0;
    }

    if (forecast_cmd->parsed()) {
        ModelHandle model;
        if (xrmdn_status st = xrmdn_model_load(model_path.c_str(), &model.ptr); st != XRMDN_OK) {
            return fail(st);
        }
        DatasetHandle data;
        if (int rc = load_side(data_path, schema_path, profile, split_at, Side::test, data)) return rc;
        OwnedString csv;
        if (xrmdn_status st = xrmdn_forecast(model.ptr, data.ptr, &csv.ptr); st != XRMDN_OK) {
            return fail(st);
        }
        if (int rc = write_file(forecast_out, csv.ptr)) return rc;
        std::printf("wrote %s\n", forecast_out.c_str());
        return 0;
    }

    if (eval_cmd->parsed()) {
        ModelHandle model;
        if (xrmdn_status st = xrmdn_model_load(model_path.c_str(), &model.ptr); st != XRMDN_OK) {
            return fail(st);
        }
        DatasetHandle test_ds;
        if (int rc = load_side(data_path, schema_path, profile, split_at, Side::test, test_ds)) return rc;

        OwnedString report, steps;
        const xrmdn_status st =
            xrmdn_evaluate(model.ptr, test_ds.ptr, percentiles.data(), percentiles.size(),
                           samples_per_step, seed, &report.ptr, &steps.ptr);
        if (st != XRMDN_OK) return fail(st);
        if (int rc = ensure_dir(out_dir)) return rc;
        if (int rc = write_file(out_dir + "/eval_report.json", report.ptr)) return rc;
        if (int rc = write_file(out_dir + "/eval_steps.csv", steps.ptr)) return rc;

        const json rep = json::parse(report.ptr);
        std::printf("evaluated %zu steps: LLV %.2f, MAPE %.4f, MAE %.3f, RMSE %.3f\n",
                    rep["n_cases"].get<std::size_t>(), rep["llv"].get<double>(),
                    rep["mape"].get<double>(), rep["mae"].get<double>(),
                    rep["rmse"].get<double>());
        return 0;
    }

    if (diag_cmd->parsed()) {
        DatasetHandle ds;
        if (int rc = load_side(data_path, schema_path, profile, "", Side::whole, ds)) return rc;
        OwnedString report;
        if (xrmdn_status st = xrmdn_diagnose(ds.ptr, lags, ar_order, &report.ptr);
            st != XRMDN_OK) {
            return fail(st);
        }
        if (int rc = write_file(diag_out, report.ptr)) return rc;
        std::printf("wrote %s\n", diag_out.c_str());
        return 0;
    }

    if (compare_cmd->parsed()) {
        if (split_at.empty()) {
            std::fprintf(stderr, "error: compare requires --split\n");
            return static_cast<int>(XRMDN_ERR_CONFIG);
        }
        DatasetHandle ds;
        if (int rc = load_side(data_path, schema_path, profile, "", Side::whole, ds)) return rc;
        OwnedString report;
        const xrmdn_status st =
            xrmdn_compare(ds.ptr, split_at.c_str(), &tcfg, percentiles.data(),
                          percentiles.size(), samples_per_step, ar_order, &report.ptr);
        if (st != XRMDN_OK) return fail(st);
        if (int rc = ensure_dir(out_dir)) return rc;
        if (int rc = write_file(out_dir + "/compare.json", report.ptr)) return rc;

        const json rep = json::parse(report.ptr);
        std::printf("compared 4 models on %zu test steps; LLV winner: %s\n",
                    rep["test_length"].get<std::size_t>(),
                    rep["winners"]["llv"].get<std::string>().c_str());
        return 0;
    }

    return 0;
}
