#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "core/autodiff.hpp"

using xrmdn::ad::Tape;
using xrmdn::ad::Var;

namespace {

// central finite difference of a scalar function of n variables
std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> x, double h = 1e-6) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

std::vector<double> tape_gradient(const std::function<Var(std::vector<Var>&)>& build,
                                  const std::vector<double>& x, double* value = nullptr) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(x.size());
    for (double v : x) vars.push_back(xrmdn::ad::make_leaf(tape, v));
    const Var root = build(vars);
    if (value != nullptr) *value = root.value();
    std::vector<double> node_grads;
    tape.backward(root.index(), node_grads);
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = node_grads[i];
    return g;
}

}  // namespace

TEST_SUITE_BEGIN("autodiff");

TEST_CASE("arithmetic and transcendental partials match finite differences") {
    using std::exp;
    using std::log;
    using std::tanh;
    const std::vector<double> x0 = {0.7, -1.3, 2.1};

    auto f_double = [](const std::vector<double>& x) {
        return (x[0] * x[1] + tanh(x[2] - x[0]) * 3.0) / (1.5 + exp(x[1])) +
               log(2.0 + x[2] * x[2]) - (4.0 / (1.0 + x[0] * x[0])) + (2.0 - x[1]) * (x[2] - 0.5);
    };
    auto f_var = [](std::vector<Var>& x) {
        return (x[0] * x[1] + tanh(x[2] - x[0]) * 3.0) / (1.5 + exp(x[1])) +
               log(2.0 + x[2] * x[2]) - (4.0 / (1.0 + x[0] * x[0])) + (2.0 - x[1]) * (x[2] - 0.5);
    };

    double value = 0.0;
    const std::vector<double> g_ad = tape_gradient(f_var, x0, &value);
    const std::vector<double> g_fd = fd_gradient(f_double, x0);
    CHECK(value == doctest::Approx(f_double(x0)).epsilon(1e-14));
    for (std::size_t i = 0; i < x0.size(); ++i) {
        CHECK(g_ad[i] == doctest::Approx(g_fd[i]).epsilon(1e-7));
    }
}

TEST_CASE("fan-out accumulates gradients") {
    // y = x * x * x  built via shared subexpressions
    auto f_var = [](std::vector<Var>& x) {
        const Var sq = x[0] * x[0];
        return sq * x[0];
    };
    const std::vector<double> g = tape_gradient(f_var, {1.7});
    CHECK(g[0] == doctest::Approx(3.0 * 1.7 * 1.7).epsilon(1e-12));
}

TEST_CASE("recurrent chains propagate through many steps") {
    // x_{t+1} = tanh(a * x_t) + b, unrolled 50 times; d x_50 / d(a, b, x_0)
    const std::vector<double> x0 = {0.8, 0.1, 0.3};
    auto unroll_d = [](const std::vector<double>& p) {
        double x = p[2];
        for (int t = 0; t < 50; ++t) x = std::tanh(p[0] * x) + p[1];
        return x;
    };
    auto unroll_v = [](std::vector<Var>& p) {
        Var x = p[2];
        for (int t = 0; t < 50; ++t) x = tanh(p[0] * x) + p[1];
        return x;
    };
    const std::vector<double> g_ad = tape_gradient(unroll_v, x0);
    const std::vector<double> g_fd = fd_gradient(unroll_d, x0, 1e-7);
    for (std::size_t i = 0; i < x0.size(); ++i) {
        CHECK(g_ad[i] == doctest::Approx(g_fd[i]).epsilon(1e-5));
    }
}

TEST_CASE("unused leaves get zero gradient") {
    Tape tape;
    const Var a = xrmdn::ad::make_leaf(tape, 2.0);
    const Var b = xrmdn::ad::make_leaf(tape, 3.0);
    const Var y = a * a;
    std::vector<double> grads;
    tape.backward(y.index(), grads);
    CHECK(grads[static_cast<std::size_t>(a.index())] == 4.0);
    CHECK(grads[static_cast<std::size_t>(b.index())] == 0.0);
}

TEST_SUITE_END();
