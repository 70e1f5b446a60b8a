#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

#ifndef XRMDN_CLI_BINARY
#error "XRMDN_CLI_BINARY must point at the built command-line binary"
#endif

TEST_SUITE_BEGIN("cli");

namespace {

struct Workdir {
    std::filesystem::path dir;
    Workdir() {
        static int n = 0;
        dir = std::filesystem::temp_directory_path() / ("xrmdn_cli_" + std::to_string(n++));
        std::filesystem::create_directories(dir);
    }
    ~Workdir() {
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
    std::string operator()(const char* name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = std::string(XRMDN_CLI_BINARY) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string& body) {
    std::size_t n = 0;
    for (char c : body) {
        if (c == '\n') ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("synth writes the dataset plus sidecar, deterministically") {
    Workdir wd;
    const std::string out = wd("data.csv");
    CHECK(run("synth --out " + out + " --length 250 --seed 42") == 0);
    const std::string first = slurp(out);
    CHECK(line_count(first) == 251);  // header + rows
    CHECK(first.rfind("timestamp,demand", 0) == 0);

    const json sidecar = json::parse(slurp(out + ".json"));
    CHECK(sidecar["length"] == 250);
    CHECK(sidecar["seed"] == 42);

    CHECK(run("synth --out " + wd("again.csv") + " --length 250 --seed 42") == 0);
    CHECK(slurp(wd("again.csv")) == first);

    CHECK(run("synth --out " + wd("other.csv") + " --length 250 --seed 43") == 0);
    CHECK(slurp(wd("other.csv")) != first);
}

TEST_CASE("train emits the model and a report sized by the epoch budget") {
    Workdir wd;
    const std::string data = wd("data.csv");
    REQUIRE(run("synth --out " + data + " --length 60 --seed 7") == 0);

    const auto t0 = std::chrono::steady_clock::now();
    CHECK(run("train --data " + data + " --out-dir " + wd("run") +
              " --epochs 50 --components 1 --units 2 --batch-len 20 --lookback 20") == 0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 5.0);  // tiny-config smoke budget

    const json report = json::parse(slurp(wd("run") + "/train_report.json"));
    CHECK(report["epoch_nll"].size() == 50);
    CHECK(std::filesystem::exists(wd("run") + "/model.bin"));
}

TEST_CASE("exit codes separate config, data, and numeric failures") {
    Workdir wd;
    const std::string data = wd("data.csv");
    REQUIRE(run("synth --out " + data + " --length 300 --seed 3") == 0);

    SUBCASE("unknown flag is a usage error") {
        CHECK(run("train --data " + data + " --no-such-flag") == 2);
    }
    SUBCASE("bad training dimensions are a config error") {
        CHECK(run("train --data " + data + " --out-dir " + wd("r") + " --epochs 0") == 2);
    }
    SUBCASE("unknown profile is a config error") {
        CHECK(run("train --data " + data + " --out-dir " + wd("r") + " --profile bogus") == 2);
    }
    SUBCASE("missing file is an io error") {
        CHECK(run("train --data " + wd("absent.csv") + " --out-dir " + wd("r")) == 5);
    }
    SUBCASE("malformed csv is a data error") {
        const std::string bad = wd("bad.csv");
        std::ofstream f(bad);
        f << "timestamp,demand\n2016-01-01T00:00:00Z,oops\n";
        f.close();
        CHECK(run("train --data " + bad + " --out-dir " + wd("r")) == 3);
    }
    SUBCASE("series shorter than the lookback is a data error") {
        CHECK(run("train --data " + data + " --out-dir " + wd("r") + " --lookback 4000") == 3);
    }
    SUBCASE("runaway learning rate is a numeric error") {
        CHECK(run("train --data " + data + " --out-dir " + wd("r") +
                  " --lr 1000 --epochs 40 --lookback 20 --batch-len 144") == 4);
    }
    SUBCASE("compare without a split is a config error") {
        CHECK(run("compare --data " + data + " --out-dir " + wd("r")) == 2);
    }
}

TEST_CASE("evaluate leaves the model file untouched and sizes the per-step csv") {
    Workdir wd;
    const std::string data = wd("data.csv");
    REQUIRE(run("synth --out " + data + " --length 400 --seed 9") == 0);
    REQUIRE(run("train --data " + data + " --split 2016-01-03T00:00:00Z --out-dir " + wd("run") +
                " --epochs 5 --units 4 --batch-len 48 --lookback 48") == 0);

    const std::string model_before = slurp(wd("run") + "/model.bin");
    CHECK(run("evaluate --model " + wd("run") + "/model.bin --data " + data +
              " --split 2016-01-03T00:00:00Z --out-dir " + wd("run")) == 0);
    CHECK(slurp(wd("run") + "/model.bin") == model_before);

    // 400 steps at 10 minutes from Jan 1: 112 fall on or after Jan 3
    const std::string steps = slurp(wd("run") + "/eval_steps.csv");
    CHECK(line_count(steps) == 113);
    const json report = json::parse(slurp(wd("run") + "/eval_report.json"));
    CHECK(report["n_cases"] == 112);
    CHECK(report["rejection_rate"].size() == 3);

    // three configured percentiles produce three interval column pairs
    std::size_t lo_cols = 0;
    const std::string header = steps.substr(0, steps.find('\n'));
    for (std::size_t pos = header.find("lo_"); pos != std::string::npos;
         pos = header.find("lo_", pos + 1)) {
        ++lo_cols;
    }
    CHECK(lo_cols == 3);
}

TEST_CASE("config file values apply and flags override them") {
    Workdir wd;
    const std::string cfg = wd("run.ini");
    // pointing at a non-existent config file is a usage error
    CHECK(run("synth --config " + wd("absent.ini") + " --out " + wd("x.csv")) == 2);

    {
        std::ofstream f(cfg);
        f << "[synth]\n"
          << "length = 123\n";
    }
    CHECK(run("synth --config " + cfg + " --out " + wd("a.csv")) == 0);
    CHECK(line_count(slurp(wd("a.csv"))) == 124);

    CHECK(run("synth --config " + cfg + " --length 77 --out " + wd("b.csv")) == 0);
    CHECK(line_count(slurp(wd("b.csv"))) == 78);
}

TEST_CASE("the taxi profile derives features and keeps a 144-step test day") {
    Workdir wd;
    const std::string data = wd("taxi.csv");
    {
        // three days of 10-minute counts, timestamp and demand only
        std::ofstream f(data);
        f << "timestamp,demand\n";
        for (int day = 1; day <= 3; ++day) {
            for (int slot = 0; slot < 144; ++slot) {
                char ts[40];
                std::snprintf(ts, sizeof(ts), "2016-01-%02dT%02d:%02d:00Z", day, slot / 6,
                              (slot % 6) * 10);
                f << ts << "," << (40 + 25 * ((slot / 36) % 2) + day) << "\n";
            }
        }
    }
    REQUIRE(run("train --data " + data + " --profile nyc-taxi-10min --split 2016-01-03 "
                "--out-dir " + wd("run") + " --epochs 4 --units 4 --batch-len 48 --lookback 48") ==
            0);
    CHECK(run("evaluate --model " + wd("run") + "/model.bin --data " + data +
              " --profile nyc-taxi-10min --split 2016-01-03 --out-dir " + wd("run")) == 0);
    const json report = json::parse(slurp(wd("run") + "/eval_report.json"));
    CHECK(report["n_cases"] == 144);  // the held-out day at 10-minute resolution
    CHECK(line_count(slurp(wd("run") + "/eval_steps.csv")) == 145);
}

TEST_CASE("a schema file remaps column roles") {
    Workdir wd;
    const std::string data = wd("renamed.csv");
    {
        std::ofstream f(data);
        f << "when,rides,extra\n";
        for (int i = 0; i < 80; ++i) {
            char ts[40];
            std::snprintf(ts, sizeof(ts), "2016-01-01T%02d:%02d:00Z", i / 6, (i % 6) * 10);
            f << ts << "," << (10 + i % 5) << ",0.5\n";
        }
    }
    const std::string schema = wd("schema.txt");
    {
        std::ofstream f(schema);
        f << "# column roles\n"
          << "timestamp = when\n"
          << "demand = rides\n"
          << "features = extra\n";
    }
    CHECK(run("diagnose --data " + data + " --schema " + schema + " --out " + wd("d.json") +
              " --lags 2 --ar-order 1") == 0);
    // unknown schema key is a config error
    {
        std::ofstream f(schema, std::ios::trunc);
        f << "bogus = nope\n";
    }
    CHECK(run("diagnose --data " + data + " --schema " + schema + " --out " + wd("d.json")) == 2);
}

TEST_CASE("diagnose reports the critical value row") {
    Workdir wd;
    const std::string data = wd("data.csv");
    REQUIRE(run("synth --out " + data + " --length 2500 --seed 13") == 0);
    CHECK(run("diagnose --data " + data + " --out " + wd("diag.json") + " --lags 5") == 0);
    const json rep = json::parse(slurp(wd("diag.json")));
    REQUIRE(rep["rows"].size() == 5);
    CHECK(rep["rows"][4]["critical_value"].get<double>() == doctest::Approx(11.071).epsilon(1e-3));
    // volatility clustering in the default generator is detected at lags 3..5
    for (std::size_t h = 2; h < 5; ++h) {
        CHECK(rep["rows"][h]["p_value"].get<double>() < 0.05);
    }
}

TEST_SUITE_END();
