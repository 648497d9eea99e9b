#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "rpde/errors.hpp"
#include "rpde/kvconfig.hpp"
#include "rpde/spectral.hpp"

using namespace rpde;

namespace {

std::vector<double> random_state(std::size_t n, std::mt19937_64& rng, double decay = 1.0) {
    std::normal_distribution<double> nd;
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = nd(rng) / std::pow(static_cast<double>(k + 1), decay);
    return v;
}

}  // namespace

TEST_CASE("model construction and norms") {
    const auto m = SpectralModel::dirichlet(16, 2.0, 0.0);
    CHECK(m.mu[0] == doctest::Approx(std::numbers::pi * std::numbers::pi + 2.0));
    CHECK(m.lambda_tilde() == m.mu[0]);
    CHECK_THROWS_AS(SpectralModel::from_rates({1.0, 1.0}, 0.5, 0.0), InvalidInput);
    CHECK_THROWS_AS(SpectralModel::from_rates({1.0, 2.0}, 1.5, 0.0), InvalidInput);
    CHECK_THROWS_AS(SpectralModel::dirichlet(4, 0.0, 0.0), InvalidInput);

    std::vector<double> v{3.0, 4.0, 0.0};
    const auto m3 = SpectralModel::dirichlet(3, 1.0, 0.0);
    CHECK(frac_norm(m3, v, 0.0) == 5.0);
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<double> e(3, 0.0);
        e[k] = 1.0;
        CHECK(frac_norm(m3, e, 0.7) == doctest::Approx(std::pow(m3.mu[k], 0.7)));
    }
}

TEST_CASE("interpolation inequality") {
    const auto m = SpectralModel::dirichlet(32, 1.0, 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-0.5, 1.0);
    for (int i = 0; i < 100; ++i) {
        const auto x = random_state(32, rng);
        double a1 = u(rng), a2 = u(rng), a3 = u(rng);
        if (a1 > a2) std::swap(a1, a2);
        if (a2 > a3) std::swap(a2, a3);
        if (a1 > a2) std::swap(a1, a2);
        const double lhs = std::pow(frac_norm(m, x, a2), a3 - a1);
        const double rhs = std::pow(frac_norm(m, x, a1), a3 - a2) * std::pow(frac_norm(m, x, a3), a2 - a1);
        CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("semigroup") {
    const auto m = SpectralModel::dirichlet(16, 3.0, 0.0);
    std::mt19937_64 rng(2);
    SpectralState s{random_state(16, rng), 0.0};
    CHECK(semigroup_apply(m, 0.0, s).coeffs == s.coeffs);
    CHECK_THROWS_AS(semigroup_apply(m, -0.1, s), InvalidInput);
    for (double t : {0.01, 0.1, 1.0}) {
        CHECK(frac_norm(m, semigroup_apply(m, t, s), 0.0) <= std::exp(-3.0 * t) * frac_norm(m, s, 0.0));
        const auto ab = semigroup_apply(m, t, semigroup_apply(m, 0.3, s));
        const auto direct = semigroup_apply(m, t + 0.3, s);
        for (std::size_t k = 0; k < 16; ++k) CHECK(ab.coeffs[k] == doctest::Approx(direct.coeffs[k]).epsilon(1e-14));
    }
}

TEST_CASE("smoothing constant against per-mode maximization") {
    const double sigma = 0.5, lambda = 2.0;
    const auto m = SpectralModel::dirichlet(24, 3.0, 0.0);
    const double c = smoothing_constant(m, sigma, lambda);
    // oracle: brute-force sup over u on a fine grid, slowest mode
    const double a = 1.0 - lambda / m.mu[0];
    double best = 0.0;
    for (int i = 1; i <= 200000; ++i) {
        const double u = i * 1e-4;
        best = std::max(best, std::pow(u, sigma) * std::exp(-a * u));
    }
    CHECK(c == doctest::Approx(best).epsilon(1e-6));
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        SpectralState s{random_state(24, rng, 0.0), 0.0};
        for (int ti = 1; ti <= 100; ++ti) {
            const double t = ti / 100.0;
            const double r = std::pow(t, sigma) * std::exp(lambda * t) *
                             frac_norm(m, semigroup_apply(m, t, s), sigma) / frac_norm(m, s, 0.0);
            worst = std::max(worst, r);
        }
    }
    CHECK(worst <= c);
    CHECK(smoothing_constant(m, 0.0, lambda) == 1.0);
}

TEST_CASE("drift F: Lipschitz and growth") {
    const auto m = SpectralModel::dirichlet(16, 2.0, 0.25);
    DriftConfig cfg{DriftConfig::Kind::tanh, 0.7, 0.3, 1.0};
    const std::vector<double> zero(16, 0.0);
    CHECK(frac_norm(m, apply_F(m, cfg, zero), 0.25 - 0.3) <= 0.7 * (1 + 1e-12));
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        auto x = random_state(16, rng), z = random_state(16, rng);
        auto fx = apply_F(m, cfg, x), fz = apply_F(m, cfg, z);
        std::vector<double> df(16), dx(16);
        for (std::size_t k = 0; k < 16; ++k) {
            df[k] = fx[k] - fz[k];
            dx[k] = x[k] - z[k];
        }
        worst = std::max(worst, frac_norm(m, df, 0.25 - 0.3) / frac_norm(m, dx, 0.25));
        CHECK(frac_norm(m, fx, 0.25 - 0.3) <= 0.7 * (1.0 + frac_norm(m, x, 0.25)) * (1 + 1e-12));
    }
    CHECK(worst <= 0.7 * (1 + 1e-12));
    DriftConfig none;
    for (double v : apply_F(m, none, random_state(16, rng))) CHECK(v == 0.0);
}

TEST_CASE("diffusion G: linear kind") {
    const auto m = SpectralModel::dirichlet(8, 2.0, 0.0);
    DiffusionConfig cfg{DiffusionConfig::Kind::linear, 0.3, 0.1, DiffusionConfig::Kernel::sine, 0};
    Diffusion g(m, cfg);
    for (std::size_t k = 0; k < 8; ++k) {
        std::vector<double> e(8, 0.0);
        e[k] = 1.0;
        const double kk = (k + 1.0) * std::numbers::pi;
        CHECK(g.apply(e)[k] == doctest::Approx(0.3 * std::pow(kk * kk, 0.1)));
    }
    std::mt19937_64 rng(5);
    const auto y = random_state(8, rng);
    const auto gg = g.apply(g.apply(y));
    const auto gub = g.gubinelli(y);
    for (std::size_t k = 0; k < 8; ++k) CHECK(gub[k] == doctest::Approx(gg[k]).epsilon(1e-14));
    CHECK(g.bound_constant(0.4) == 0.3);
}

TEST_CASE("diffusion G: integral kind derivatives by finite differences") {
    const auto m = SpectralModel::dirichlet(8, 2.0, 0.0);
    for (auto kernel : {DiffusionConfig::Kernel::sine, DiffusionConfig::Kernel::tanh}) {
        DiffusionConfig cfg{DiffusionConfig::Kind::integral, 0.5, 0.0, kernel, 0};
        Diffusion g(m, cfg);
        std::mt19937_64 rng(6);
        for (int trial = 0; trial < 5; ++trial) {
            const auto u = random_state(8, rng);
            const auto h1 = random_state(8, rng);
            const auto h2 = random_state(8, rng);
            const auto h3 = random_state(8, rng);
            const double eps = 1e-4;
            auto shifted = [&](const std::vector<double>& h, double s) {
                auto v = u;
                for (std::size_t k = 0; k < 8; ++k) v[k] += s * h[k];
                return v;
            };
            const auto gp = g.apply(shifted(h1, eps)), gm = g.apply(shifted(h1, -eps));
            const auto d1 = g.derivative(u, h1);
            const auto dp = g.derivative(shifted(h2, eps), h1), dm = g.derivative(shifted(h2, -eps), h1);
            const auto d2 = g.second_derivative(u, h1, h2);
            const auto sp = g.second_derivative(shifted(h3, eps), h1, h2);
            const auto sm = g.second_derivative(shifted(h3, -eps), h1, h2);
            const auto d3 = g.third_derivative(u, h1, h2, h3);
            double n1 = 0, e1 = 0, n2 = 0, e2 = 0, n3 = 0, e3 = 0;
            for (std::size_t k = 0; k < 8; ++k) {
                e1 = std::max(e1, std::abs((gp[k] - gm[k]) / (2 * eps) - d1[k]));
                n1 = std::max(n1, std::abs(d1[k]));
                e2 = std::max(e2, std::abs((dp[k] - dm[k]) / (2 * eps) - d2[k]));
                n2 = std::max(n2, std::abs(d2[k]));
                e3 = std::max(e3, std::abs((sp[k] - sm[k]) / (2 * eps) - d3[k]));
                n3 = std::max(n3, std::abs(d3[k]));
            }
            CHECK(e1 <= 1e-5 * n1);
            CHECK(e2 <= 1e-5 * n2);
            CHECK(e3 <= 1e-5 * n3);
        }
        CHECK(g.bound_constant(0.4) > 0.0);
    }
    DiffusionConfig cubic{DiffusionConfig::Kind::integral, 0.5, 0.0, DiffusionConfig::Kernel::cubic, 0};
    CHECK_THROWS_AS(Diffusion(m, cubic), ConfigError);
}

TEST_CASE("model config parsing") {
    const auto kv = KeyValue::parse(
        "# model\nn_modes = 12\nlambda_a = 4\nalpha = 0\nsigma_f = 0.2\nc_f = 0.1\n"
        "f_kind = tanh\ng_kind = linear\nc_g = 0.01\nsigma_g = 0.05\n");
    const auto mc = ModelConfig::from_kv(kv);
    CHECK(mc.model.n_modes == 12);
    CHECK(mc.drift.kind == DriftConfig::Kind::tanh);
    CHECK(mc.diffusion.kind == DiffusionConfig::Kind::linear);
    CHECK_THROWS_AS(ModelConfig::from_kv(KeyValue::parse("lambda_a = 1\ng_kind = integral\ng_kernel = cubic\nc_g = 1\n")),
                    ConfigError);
    CHECK_THROWS_AS(ModelConfig::from_kv(KeyValue::parse("n_modes = 4\n")), ConfigError);
    CHECK_THROWS_AS(KeyValue::parse("just words\n"), ConfigError);
    CHECK_THROWS_AS(KeyValue::parse("a = 1\na = 2\n"), ConfigError);
}

TEST_CASE("norm ratio decays across modes (compactness surrogate)") {
    const auto m = SpectralModel::dirichlet(32, 1.0, 0.0);
    double prev = 1e300;
    for (std::size_t k = 0; k < 32; ++k) {
        std::vector<double> e(32, 0.0);
        e[k] = 1.0;
        const double ratio = frac_norm(m, e, 0.0) / frac_norm(m, e, 0.3);
        CHECK(ratio < prev);
        CHECK(ratio == doctest::Approx(std::pow(m.mu[k], -0.3)));
        prev = ratio;
    }
}
