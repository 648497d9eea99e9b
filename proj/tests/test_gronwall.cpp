#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "rpde/errors.hpp"
#include "rpde/gronwall.hpp"
#include "rpde/specfun.hpp"

using namespace rpde;

namespace {

BoundCurve constant_curve(double c, double horizon, std::size_t n) {
    BoundCurve h;
    for (std::size_t i = 0; i <= n; ++i) {
        h.times.push_back(horizon * static_cast<double>(i) / static_cast<double>(n));
        h.values.push_back(c);
    }
    return h;
}

}  // namespace

TEST_CASE("singular Gronwall: zero and classical cases") {
    auto h = constant_curve(0.0, 2.0, 50);
    const auto z = singular_gronwall(h, 1.5, 0.6);
    for (double v : z.values) CHECK(v == 0.0);

    h = constant_curve(2.0, 2.0, 200);
    const double m = 1.3;
    const auto b = singular_gronwall(h, m, 1.0);
    for (std::size_t i = 0; i < b.times.size(); ++i)
        CHECK(std::abs(b.values[i] / (2.0 * std::exp(m * b.times[i])) - 1.0) <= 1e-6);
}

TEST_CASE("singular Gronwall: constant h against E_{beta,1}") {
    for (double beta : {0.3, 0.5, 0.8}) {
        const double m = 0.9, c = 1.7;
        const auto h = constant_curve(c, 3.0, 300);
        const auto b = singular_gronwall(h, m, beta);
        const double kappa = std::pow(std::tgamma(beta) * m, 1.0 / beta);
        for (std::size_t i = 0; i < b.times.size(); i += 7) {
            const double want = c * mittag_leffler(beta, 1.0, b.times[i] * kappa);
            CHECK(std::abs(b.values[i] / want - 1.0) <= 1e-4);
        }
    }
}

TEST_CASE("singular Gronwall: quadrature refinement and monotonicity") {
    auto make = [](std::size_t n) {
        BoundCurve h;
        for (std::size_t i = 0; i <= n; ++i) {
            const double t = 2.0 * i / n;
            h.times.push_back(t);
            h.values.push_back(1.0 + std::sin(3.0 * t) * 0.5 + t * t);
        }
        return h;
    };
    const auto coarse = singular_gronwall(make(100), 1.1, 0.5);
    const auto fine = singular_gronwall(make(200), 1.1, 0.5);
    for (std::size_t i = 0; i < coarse.times.size(); ++i)
        CHECK(std::abs(coarse.values[i] / fine.values[2 * i] - 1.0) < 1e-3);
    const auto bigger = singular_gronwall(make(100), 1.3, 0.5);
    for (std::size_t i = 0; i < coarse.times.size(); ++i) CHECK(bigger.values[i] >= coarse.values[i]);
    auto neg = make(10);
    neg.values[3] = -1.0;
    CHECK_THROWS_AS(singular_gronwall(neg, 1.0, 0.5), InvalidInput);
}

TEST_CASE("discrete Gronwall: closed forms") {
    const std::vector<double> zeros(5, 0.0), ones(5, 1.0);
    auto u = discrete_gronwall(2.0, 1.0, zeros, zeros);
    for (double v : u) CHECK(v == 2.0);
    u = discrete_gronwall(0.0, 1.0, ones, zeros);
    for (std::size_t n = 0; n < u.size(); ++n) CHECK(u[n] == std::pow(2.0, static_cast<double>(n)));
    const std::vector<double> bad{1.0, -0.1};
    CHECK_THROWS_AS(discrete_gronwall(1.0, 1.0, bad, bad), InvalidInput);
}

TEST_CASE("discrete Gronwall dominates every admissible recursion") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int violations = 0;
    for (int inst = 0; inst < 1000; ++inst) {
        const std::size_t n = 10;
        const double a = 2.0 * u01(rng);
        std::vector<double> b(n), c(n), seq(n + 1);
        for (std::size_t k = 0; k < n; ++k) {
            b[k] = u01(rng);
            c[k] = u01(rng);
        }
        seq[0] = 2.0 * u01(rng);
        const bool extremal = inst % 2 == 0;
        for (std::size_t m = 1; m <= n; ++m) {
            double rhs = a;
            for (std::size_t k = 0; k < m; ++k) rhs += b[k] * seq[k] + c[k];
            seq[m] = extremal ? rhs : rhs * u01(rng);
        }
        const auto bound = discrete_gronwall(a, seq[0], b, c);
        for (std::size_t m = 0; m <= n; ++m)
            if (seq[m] > bound[m] * (1.0 + 1e-12)) ++violations;
    }
    CHECK(violations == 0);
}
