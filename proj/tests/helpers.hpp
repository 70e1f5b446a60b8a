#pragma once

// Shared fixtures for the unit and acceptance suites: hand-built miniature
// models with pinned parameter values, plus an evaluation of the forward
// equations written out longhand (independent of the library's forward path)
// to serve as the golden oracle.

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "core/model.hpp"

namespace testhelp {

/// Zeroed model of the requested shape.
inline xrmdn::XrmdnModel zero_model(int n, int k, int w,
                                    xrmdn::ModelKind kind = xrmdn::ModelKind::xrmdn,
                                    xrmdn::ActivationConfig act = {}) {
    xrmdn::RngState rng{0, 0};
    xrmdn::XrmdnModel m = xrmdn::init_model(n, k, w, rng, kind, act);
    xrmdn::visit_params(m, [](double& x) { x = 0.0; });
    return m;
}

/// Hand-set N=1, K=2 model over a 2-wide input (demand + one feature).
/// Every constant below is pinned; golden_* evaluates the same equations
/// longhand.
inline xrmdn::XrmdnModel golden_tiny_model() {
    xrmdn::XrmdnModel m = zero_model(1, 2, 2);
    m.activation = xrmdn::ActivationConfig{1e-6, 1.0};

    m.wrnn.direct_in_w = {0.30, -0.20};
    m.wrnn.direct_in_b = 0.10;
    m.wrnn.tanh_in_w = {{0.50, 0.40}};
    m.wrnn.tanh_in_b = {-0.20};
    m.wrnn.direct_rec_w = 0.70;
    m.wrnn.direct_rec_b = 0.05;
    m.wrnn.tanh_rec_w = {-0.60};
    m.wrnn.tanh_rec_b = {0.15};
    m.wrnn.mix_w = {{1.10, -0.90, 0.80, 0.60}};
    m.wrnn.mix_b = {0.20};

    m.mrnn.direct_in_w = {-0.40, 0.25};
    m.mrnn.direct_in_b = 0.05;
    m.mrnn.tanh_in_w = {{0.60, -0.30}};
    m.mrnn.tanh_in_b = {0.10};
    m.mrnn.direct_rec_w = 0.45;
    m.mrnn.direct_rec_b = -0.10;
    m.mrnn.tanh_rec_w = {0.80};
    m.mrnn.tanh_rec_b = {-0.20};
    m.mrnn.mix_w = {{0.70, 1.20, -0.50, 0.90}};
    m.mrnn.mix_b = {-0.15};

    m.vrnn.direct_in_w = {0.45};
    m.vrnn.direct_in_b = -0.10;
    m.vrnn.tanh_in_w = {{0.35}};
    m.vrnn.tanh_in_b = {0.25};
    m.vrnn.direct_rec_w = 0.55;
    m.vrnn.direct_rec_b = -0.05;
    m.vrnn.tanh_rec_w = {0.65};
    m.vrnn.tanh_rec_b = {0.10};
    m.vrnn.mix_w = {{0.90, 0.70, -0.80, 0.50}};
    m.vrnn.mix_b = {0.30};
    return m;
}

struct GoldenStep {
    double eta;
    double mu;
    double sigma2;
};

/// Longhand evaluation of one forward step of golden_tiny_model: the unit
/// sums are spelled out term by term with std:: calls only.
inline GoldenStep golden_forward(const std::vector<double>& input, double eta_prev, double mu_prev,
                                 double sigma2_prev, double resid_prev) {
    const double x0 = input[0];
    const double x1 = input[1];

    const double w_pre = 0.20 + 1.10 * (0.30 * x0 + (-0.20) * x1 + 0.10) +
                         (-0.90) * std::tanh(0.50 * x0 + 0.40 * x1 + (-0.20)) +
                         0.80 * (0.70 * eta_prev + 0.05) +
                         0.60 * std::tanh((-0.60) * eta_prev + 0.15);
    // single-component softmax
    const double eta = std::exp(w_pre - w_pre) / std::exp(w_pre - w_pre);

    const double mu = -0.15 + 0.70 * ((-0.40) * x0 + 0.25 * x1 + 0.05) +
                      1.20 * std::tanh(0.60 * x0 + (-0.30) * x1 + 0.10) +
                      (-0.50) * (0.45 * mu_prev + (-0.10)) +
                      0.90 * std::tanh(0.80 * mu_prev + (-0.20));

    const double v_pre = 0.30 + 0.90 * (0.45 * resid_prev + (-0.10)) +
                         0.70 * std::tanh(0.35 * resid_prev + 0.25) +
                         (-0.80) * (0.55 * sigma2_prev + (-0.05)) +
                         0.50 * std::tanh(0.65 * sigma2_prev + 0.10);
    const double elu = v_pre > 0.0 ? v_pre : std::exp(v_pre) - 1.0;
    const double sigma2 = elu + 1.0 + 1e-6;

    return GoldenStep{eta, mu, sigma2};
}

/// Longhand negative log-likelihood of golden_tiny_model over a window,
/// rolling the state with the observed targets.
inline double golden_nll(const std::vector<std::pair<std::vector<double>, double>>& window,
                         double eta0, double mu0, double sigma20, double resid0) {
    double eta = eta0, mu = mu0, sigma2 = sigma20, resid = resid0;
    double loss = 0.0;
    for (const auto& [input, target] : window) {
        const GoldenStep s = golden_forward(input, eta, mu, sigma2, resid);
        const double log_pdf = -0.5 * std::log(2.0 * 3.14159265358979323846 * s.sigma2) -
                               (target - s.mu) * (target - s.mu) / (2.0 * s.sigma2);
        loss -= std::log(s.eta * std::exp(log_pdf));
        eta = s.eta;
        mu = s.mu;
        sigma2 = s.sigma2;
        resid = (s.mu - target) * (s.mu - target);  // single component: E = mu
    }
    return loss;
}

/// Unique temporary directory for file-based tests.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        dir_ = std::filesystem::temp_directory_path() /
               ("xrmdn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

private:
    std::filesystem::path dir_;
};

}  // namespace testhelp
