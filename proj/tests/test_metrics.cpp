#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "core/metrics.hpp"
#include "core/rng.hpp"

using namespace xrmdn;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("point metrics hand cases") {
    const std::vector<double> same = {3.0, 4.0, 5.0};
    CHECK(mape(same, same) == 0.0);
    CHECK(mae(same, same) == 0.0);
    CHECK(rmse(same, same) == 0.0);

    const std::vector<double> truth = {10.0, 10.0};
    const std::vector<double> pred = {8.0, 12.0};
    CHECK(mae(truth, pred) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(rmse(truth, pred) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(mape(truth, pred) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("MAPE rejects zero true demand and reports the indices") {
    const std::vector<double> truth = {1.0, 0.0, 2.0, 0.0};
    const std::vector<double> pred = {1.0, 1.0, 2.0, 1.0};
    CHECK_THROWS_WITH_AS((void)mape(truth, pred), doctest::Contains("1, 3"), DomainError);
    CHECK_THROWS_AS((void)mape(std::vector<double>{}, std::vector<double>{}), DomainError);
    CHECK_THROWS_AS((void)mae(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    DomainError);
}

TEST_CASE("RMSE dominates MAE and both scale linearly") {
    RngState rng{61, 0};
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + next_u64(rng) % 40;
        std::vector<double> t(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = 1.0 + 10.0 * next_uniform(rng);
            p[i] = t[i] + 3.0 * next_normal(rng);
        }
        const double a = mae(t, p);
        const double r = rmse(t, p);
        CHECK(r >= a - 1e-12);

        const double c = 0.5 + 4.0 * next_uniform(rng);
        std::vector<double> ct = t, cp = p;
        for (double& x : ct) x *= c;
        for (double& x : cp) x *= c;
        CHECK(mape(ct, cp) == doctest::Approx(mape(t, p)).epsilon(1e-10));  // degree 0
        CHECK(mae(ct, cp) == doctest::Approx(c * a).epsilon(1e-10));        // degree 1
        CHECK(rmse(ct, cp) == doctest::Approx(c * r).epsilon(1e-10));       // degree 1

        // permutation invariance of the paired samples
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), std::mt19937(42));
        std::vector<double> pt(n), pp(n);
        for (std::size_t i = 0; i < n; ++i) {
            pt[i] = t[perm[i]];
            pp[i] = p[perm[i]];
        }
        CHECK(mae(pt, pp) == doctest::Approx(a).epsilon(1e-12));
        CHECK(rmse(pt, pp) == doctest::Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("llv closed forms and additivity") {
    // densities exactly one at every step
    const double unit_var = 1.0 / (2.0 * 3.14159265358979323846);
    std::vector<MixtureForecast> exact(4, MixtureForecast{{1.0}, {5.0}, {unit_var}});
    const std::vector<double> truth(4, 5.0);
    CHECK(std::abs(llv(truth, exact)) < 1e-12);

    const std::vector<double> one_truth = {3.0};
    std::vector<MixtureForecast> one{MixtureForecast{{1.0}, {3.0}, {1.0}}};
    CHECK(llv(one_truth, one) == doctest::Approx(-0.91893853320467274).epsilon(1e-14));

    RngState rng{67, 0};
    std::vector<double> t(20);
    std::vector<MixtureForecast> f;
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = next_normal(rng);
        f.push_back(MixtureForecast{{0.4, 0.6},
                                    {next_normal(rng), next_normal(rng)},
                                    {0.5 + next_uniform(rng), 0.5 + next_uniform(rng)}});
    }
    const double whole = llv(t, f);
    const double parts = llv(std::span<const double>(t).subspan(0, 12),
                             std::span<const MixtureForecast>(f).subspan(0, 12)) +
                         llv(std::span<const double>(t).subspan(12),
                             std::span<const MixtureForecast>(f).subspan(12));
    CHECK(whole == doctest::Approx(parts).epsilon(1e-12));

    // invariant under reordering of (step, forecast) pairs
    std::vector<double> rt(t.rbegin(), t.rend());
    std::vector<MixtureForecast> rf(f.rbegin(), f.rend());
    CHECK(llv(rt, rf) == doctest::Approx(whole).epsilon(1e-12));
}

TEST_CASE("rejection_rate boundary cases") {
    const std::vector<std::vector<double>> tight = {{4.9, 5.0, 5.1}, {4.8, 5.0, 5.2}};
    CHECK(rejection_rate(std::vector<double>{5.0, 5.0}, tight, 0.9) == 0.0);
    CHECK(rejection_rate(std::vector<double>{50.0, -50.0}, tight, 0.9) == 1.0);
    CHECK_THROWS_AS((void)rejection_rate(std::vector<double>{}, {}, 0.9), DomainError);
}

TEST_CASE("rejection_rate is antitone in the percentile") {
    RngState rng{71, 0};
    std::vector<double> truth(50);
    std::vector<std::vector<double>> samples(50);
    for (std::size_t t = 0; t < truth.size(); ++t) {
        truth[t] = next_normal(rng);
        samples[t].resize(200);
        for (double& x : samples[t]) x = next_normal(rng);
    }
    double prev = 1.0;
    for (double p : {0.5, 0.75, 0.9, 0.95, 0.99}) {
        const double rr = rejection_rate(truth, samples, p);
        CHECK(rr <= prev + 1e-12);
        prev = rr;
    }
}

TEST_CASE("rejection_rate is calibrated when samples come from the truth distribution") {
    const MixtureForecast gen{{0.5, 0.5}, {10.0, 30.0}, {4.0, 9.0}};
    RngState rng{1234, 0};
    const std::size_t steps = 300;
    std::vector<double> truth(steps);
    std::vector<std::vector<double>> samples(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        truth[t] = gmm_sample(gen, 1, rng)[0];
        samples[t] = gmm_sample(gen, 2000, rng);
    }
    CHECK(rejection_rate(truth, samples, 0.90) == doctest::Approx(0.10).epsilon(0.45));
}

TEST_CASE("acf basics") {
    std::vector<double> alternating(400);
    for (std::size_t i = 0; i < alternating.size(); ++i) {
        alternating[i] = (i % 2 == 0) ? 1.0 : -1.0;
    }
    const std::vector<double> rho = acf(alternating, 2);
    CHECK(rho[0] == 1.0);
    CHECK(rho[1] == doctest::Approx(-1.0).epsilon(0.01));
    CHECK(rho[2] == doctest::Approx(1.0).epsilon(0.01));

    RngState rng{73, 0};
    std::vector<double> noise(10000);
    for (double& x : noise) x = next_normal(rng);
    const std::vector<double> wr = acf(noise, 5);
    CHECK(wr[0] == 1.0);
    for (std::size_t k = 1; k <= 5; ++k) {
        CHECK(std::abs(wr[k]) < 3.0 / std::sqrt(10000.0));
    }

    CHECK_THROWS_AS((void)acf(std::vector<double>(10, 7.0), 3), DomainError);
    CHECK_THROWS_AS((void)acf(std::vector<double>{1.0, 2.0}, 5), DomainError);
}

TEST_CASE("ljung_box size stays near the nominal level on white noise") {
    std::size_t rejections = 0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        RngState rng{static_cast<std::uint64_t>(rep) + 500, 0};
        std::vector<double> resid(10000);
        for (double& x : resid) x = next_normal(rng);
        const LjungBoxResult lb = ljung_box(resid, 5, /*on_squares=*/true);
        if (lb.p_value < 0.05) ++rejections;
    }
    const double size = static_cast<double>(rejections) / reps;
    CHECK(size >= 0.02);
    CHECK(size <= 0.08);
}

TEST_CASE("ljung_box has power against GARCH volatility clustering") {
    RngState rng{321, 0};
    const double gamma0 = 1.0, alpha1 = 0.25, beta1 = 0.70;
    double sigma2 = gamma0 / (1.0 - alpha1 - beta1);
    double eps_prev = 0.0;
    std::vector<double> resid(5000);
    for (double& x : resid) {
        sigma2 = gamma0 + alpha1 * eps_prev * eps_prev + beta1 * sigma2;
        x = next_normal(rng) * std::sqrt(sigma2);
        eps_prev = x;
    }
    const LjungBoxResult lb = ljung_box(resid, 5);
    CHECK(lb.p_value < 0.01);

    // the raw-residual variant sees (nearly) no autocorrelation in the levels
    const LjungBoxResult raw = ljung_box(resid, 5, /*on_squares=*/false);
    CHECK(raw.q_stat < lb.q_stat);
}

TEST_CASE("ljung_box decision against the 0.05 critical value is consistent") {
    RngState rng{77, 0};
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> resid(800);
        for (double& x : resid) x = next_normal(rng);
        const LjungBoxResult lb = ljung_box(resid, 5);
        const bool reject_by_p = lb.p_value < 0.05;
        const bool reject_by_q = lb.q_stat > 11.071;
        CHECK(reject_by_p == reject_by_q);
    }
}

TEST_CASE("ljung_box statistic is invariant under residual scaling") {
    RngState rng{79, 0};
    std::vector<double> resid(600);
    for (double& x : resid) x = next_normal(rng) * (1.0 + 0.5 * std::sin(x));
    const double q_base = ljung_box(resid, 4).q_stat;
    for (double c : {0.3, 2.0, 115.0}) {
        std::vector<double> scaled = resid;
        for (double& x : scaled) x *= c;
        CHECK(std::abs(ljung_box(scaled, 4).q_stat - q_base) < 1e-9 * std::max(1.0, q_base));
    }
}

TEST_CASE("ljung_box rejects degenerate inputs") {
    CHECK_THROWS_AS((void)ljung_box(std::vector<double>(10, 1.0), 3), DomainError);
    CHECK_THROWS_AS((void)ljung_box(std::vector<double>{1.0, 2.0}, 5), DomainError);
    CHECK_THROWS_AS((void)ljung_box(std::vector<double>{1.0, 2.0, 3.0}, 0), DomainError);
}

TEST_SUITE_END();
