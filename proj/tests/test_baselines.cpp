#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/baselines.hpp"
#include "helpers.hpp"

using namespace xrmdn;

TEST_SUITE_BEGIN("baselines");

TEST_CASE("fit_ar recovers a noisy AR(1) coefficient") {
    RngState rng{11, 0};
    std::vector<double> x(4000, 0.0);
    for (std::size_t t = 1; t < x.size(); ++t) {
        x[t] = 0.8 * x[t - 1] + 1e-3 * next_normal(rng);
    }
    const ArModel m = fit_ar(x, 1);
    CHECK(m.coeffs[0] == doctest::Approx(0.8).epsilon(0.0125));  // within 0.01 absolute
    CHECK(std::abs(m.intercept) < 0.01);
    CHECK_FALSE(m.ill_conditioned);
}

TEST_CASE("fit_ar recovers noiseless AR(p) coefficients to 1e-6") {
    // slowly decaying oscillatory roots keep the design excited over T = 500
    const double r = 0.999, theta = 0.4, rho = 0.98;
    const double a1 = 2.0 * r * std::cos(theta);
    const double a2 = -r * r;

    SUBCASE("order 2") {
        std::vector<double> x = {1.0, 0.5};
        const double c0 = 0.1;
        for (std::size_t t = 2; t < 500; ++t) {
            x.push_back(c0 + a1 * x[t - 1] + a2 * x[t - 2]);
        }
        const ArModel m = fit_ar(x, 2);
        CHECK(std::abs(m.coeffs[0] - a1) < 1e-6);
        CHECK(std::abs(m.coeffs[1] - a2) < 1e-6);
        CHECK(std::abs(m.intercept - c0) < 1e-6);
        CHECK(m.resid_variance < 1e-12);
    }

    SUBCASE("order 3") {
        const double c1 = a1 + rho;
        const double c2 = a2 - rho * a1;
        const double c3 = -rho * a2;
        std::vector<double> x = {1.0, -0.4, 0.7};
        for (std::size_t t = 3; t < 800; ++t) {
            x.push_back(0.05 + c1 * x[t - 1] + c2 * x[t - 2] + c3 * x[t - 3]);
        }
        const ArModel m = fit_ar(x, 3);
        CHECK(std::abs(m.coeffs[0] - c1) < 1e-6);
        CHECK(std::abs(m.coeffs[1] - c2) < 1e-6);
        CHECK(std::abs(m.coeffs[2] - c3) < 1e-6);
    }
}

TEST_CASE("fit_ar flags the constant-series degenerate design") {
    const std::vector<double> flat(100, 10.0);
    const ArModel m = fit_ar(flat, 2);
    CHECK(m.ill_conditioned);
    // coefficients are not identifiable, but the prediction still is
    CHECK(predict_ar(m, flat) == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("fit_ar validates its inputs") {
    const std::vector<double> tiny = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS((void)fit_ar(tiny, 2), DataError);
    CHECK_THROWS_AS((void)fit_ar(tiny, 0), ConfigError);
}

TEST_CASE("in-sample residuals have (relatively) zero mean") {
    RngState rng{13, 0};
    std::vector<double> x(2000, 0.0);
    for (std::size_t t = 1; t < x.size(); ++t) {
        x[t] = 5.0 + 0.6 * x[t - 1] + next_normal(rng);
    }
    const ArModel m = fit_ar(x, 1);
    const std::vector<double> resid = ar_residuals(m, x);
    double mean = 0.0, scale = 0.0;
    for (double r : resid) mean += r;
    mean /= static_cast<double>(resid.size());
    for (double v : x) scale += std::abs(v);
    scale /= static_cast<double>(x.size());
    CHECK(std::abs(mean) < 1e-8 * scale);
}

TEST_CASE("recovered residual variance matches the injected noise") {
    RngState rng{17, 0};
    const double noise_sd = 2.5;
    std::vector<double> x(20000, 0.0);
    for (std::size_t t = 1; t < x.size(); ++t) {
        x[t] = 0.7 * x[t - 1] + noise_sd * next_normal(rng);
    }
    const ArModel m = fit_ar(x, 1);
    CHECK(m.resid_variance == doctest::Approx(noise_sd * noise_sd).epsilon(0.05));
}

TEST_CASE("predict_ar degenerates to persistence for a unit root fit") {
    ArModel unit;
    unit.order = 1;
    unit.intercept = 0.0;
    unit.coeffs = {1.0};
    const std::vector<double> hist = {3.0, 5.0, 9.0};
    CHECK(predict_ar(unit, hist) == 9.0);
    CHECK(persistence(hist) == 9.0);
    CHECK_THROWS_AS((void)predict_ar(unit, std::vector<double>{}), DataError);
    CHECK_THROWS_AS((void)persistence(std::vector<double>{}), DataError);
}

TEST_CASE("predict_ar is linear in the history when the intercept is zero") {
    ArModel m;
    m.order = 3;
    m.intercept = 0.0;
    m.coeffs = {0.5, -0.2, 0.1};
    RngState rng{19, 0};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> h1(6), h2(6), combo(6);
        const double a = next_normal(rng), b = next_normal(rng);
        for (std::size_t i = 0; i < 6; ++i) {
            h1[i] = next_normal(rng);
            h2[i] = next_normal(rng);
            combo[i] = a * h1[i] + b * h2[i];
        }
        const double lhs = predict_ar(m, combo);
        const double rhs = a * predict_ar(m, h1) + b * predict_ar(m, h2);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("persistence is exact on constant series") {
    const std::vector<double> flat(30, 7.5);
    std::vector<double> preds;
    for (std::size_t t = 1; t < flat.size(); ++t) {
        preds.push_back(persistence(std::span<const double>(flat).subspan(0, t)));
    }
    for (double p : preds) CHECK(p == 7.5);
}

TEST_CASE("persistence is near-optimal on a random walk") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RngState rng{seed, 0};
        std::vector<double> x(1500, 100.0);
        for (std::size_t t = 1; t < x.size(); ++t) {
            x[t] = x[t - 1] + next_normal(rng);
        }
        const std::span<const double> train(x.data(), 1000);
        const ArModel m = fit_ar(train, 1);

        double mae_pers = 0.0, mae_ar = 0.0;
        std::size_t n = 0;
        for (std::size_t t = 1000; t < x.size(); ++t) {
            const std::span<const double> hist(x.data(), t);
            mae_pers += std::abs(persistence(hist) - x[t]);
            mae_ar += std::abs(predict_ar(m, hist) - x[t]);
            ++n;
        }
        mae_pers /= static_cast<double>(n);
        mae_ar /= static_cast<double>(n);
        CHECK(mae_pers <= mae_ar + 0.05);
    }
}

TEST_CASE("classic variant is structurally non-recurrent in weights and means") {
    RngState rng{23, 0};
    const XrmdnModel c = init_model(2, 4, 3, rng, ModelKind::classic_rmdn);
    CHECK_FALSE(c.wrnn.recurrent);
    CHECK_FALSE(c.mrnn.recurrent);
    CHECK(c.vrnn.recurrent);
    CHECK(c.wrnn.mix_w[0].size() == 4);   // K units only
    CHECK(c.vrnn.mix_w[0].size() == 8);   // 2K with the recurrent group

    // zero-initialized classic model behaves like the zero full model
    XrmdnModel z = testhelp::zero_model(2, 4, 3, ModelKind::classic_rmdn);
    const RecurrentState s = initial_state(2, 0.4, 1.1);
    const std::vector<double> input = {0.2, 0.3, -0.1};
    const MixtureForecast f = xrmdn_step(z, std::span<const double>(input), s);
    CHECK(f.weights[0] == doctest::Approx(0.5));
    CHECK(f.means[0] == 0.0);
    CHECK(f.variances[0] == doctest::Approx(1.0 + z.activation.xi));
}

TEST_CASE("classic forecasts ignore the eta/mu state entirely") {
    RngState rng{29, 0};
    const XrmdnModel c = init_model(2, 4, 3, rng, ModelKind::classic_rmdn);
    RecurrentState s1 = initial_state(2, 0.0, 1.0);
    s1.resid_prev = 0.3;
    RecurrentState s2 = s1;
    s2.eta_prev = {0.01, 0.99};
    s2.mu_prev = {77.0, -77.0};
    const std::vector<double> input = {0.4, 0.5, 0.6};
    const MixtureForecast f1 = xrmdn_step(c, std::span<const double>(input), s1);
    const MixtureForecast f2 = xrmdn_step(c, std::span<const double>(input), s2);
    CHECK(f1.weights == f2.weights);
    CHECK(f1.means == f2.means);
    CHECK(f1.variances == f2.variances);

    // with the variance recurrence zeroed as well it is fully memoryless
    XrmdnModel frozen = c;
    frozen.vrnn.direct_rec_w = 0.0;
    for (double& w : frozen.vrnn.tanh_rec_w) w = 0.0;
    RecurrentState s3 = s1;
    s3.sigma2_prev = {9.0, 0.25};
    const MixtureForecast f3 = xrmdn_step(frozen, std::span<const double>(input), s1);
    const MixtureForecast f4 = xrmdn_step(frozen, std::span<const double>(input), s3);
    CHECK(f3.variances != f1.variances);
    CHECK(f3.variances == f4.variances);
}

TEST_CASE("classic forecasts keep every mixture invariant under random rollouts") {
    RngState rng{31, 0};
    for (int trial = 0; trial < 200; ++trial) {
        const XrmdnModel c = init_model(2, 3, 3, rng, ModelKind::classic_rmdn);
        RecurrentState s = initial_state(2, 0.0, 1.0);
        for (int t = 0; t < 20; ++t) {
            const std::vector<double> input = {next_normal(rng), next_uniform(rng),
                                               next_uniform(rng)};
            const MixtureForecast f = xrmdn_step(c, std::span<const double>(input), s);
            validate(f);
            s = advance_state(s, f, next_normal(rng));
        }
    }
}

TEST_CASE("classic training runs end to end and serializes with its own tag") {
    testhelp::TempDir tmp;
    SyntheticConfig scfg;
    scfg.length = 150;
    scfg.seed = 41;
    const Dataset ds = gen_synthetic(scfg);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_len = 50;
    cfg.lookback_k = 10;
    cfg.n_units = 4;
    const TrainResult res = train_classic_rmdn(ds, cfg);
    CHECK(res.model.kind == ModelKind::classic_rmdn);
    CHECK(std::isfinite(res.report.final_nll));

    const std::string path = tmp.path("classic.bin");
    save_model(res.model, path);
    const XrmdnModel loaded = load_model(path);
    CHECK(loaded.kind == ModelKind::classic_rmdn);
    CHECK(flatten_params(loaded) == flatten_params(res.model));
}

TEST_SUITE_END();
