#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "rpde/errors.hpp"
#include "rpde/specfun.hpp"

using namespace rpde;

TEST_CASE("Gamma function") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-13));
    const double g = gamma_fn(0.5);
    CHECK(std::abs(g * g - std::numbers::pi) <= 1e-10);
    CHECK_THROWS_AS(gamma_fn(0.0), DomainError);
    CHECK_THROWS_AS(gamma_fn(-1.5), DomainError);
}

TEST_CASE("Mittag-Leffler values") {
    for (double z = 0.0; z <= 10.0; z += 0.25)
        CHECK(std::abs(mittag_leffler(1.0, 1.0, z) / std::exp(z) - 1.0) <= 1e-10);
    for (double c : {0.3, 1.0, 2.5}) CHECK(mittag_leffler(0.7, c, 0.0) == doctest::Approx(1.0 / std::tgamma(c)));

    // extended-precision 200-term oracle at z = 1
    long double acc = 0.0L;
    for (int k = 0; k < 200; ++k) acc += 1.0L / std::tgammal(0.5L * k + 0.5L);
    CHECK(mittag_leffler(0.5, 0.5, 1.0) == doctest::Approx(static_cast<double>(acc)).epsilon(1e-13));

    double prev = -1.0;
    for (double z = 0.0; z < 30.0; z += 0.5) {
        const double v = mittag_leffler(0.6, 1.0, z);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(mittag_leffler(0.5, 1.0, 400.0), RangeError);
}

TEST_CASE("derivative identity against finite differences") {
    for (int bi = 0; bi < 20; ++bi) {
        const double beta = 0.05 + 0.9 * bi / 19.0;
        for (int zi = 0; zi < 20; ++zi) {
            const double z = 0.2 + 19.8 * zi / 19.0;
            const double h = 1e-5 * z;
            const double fd = (mittag_leffler(beta, 1.0, z + h) - mittag_leffler(beta, 1.0, z - h)) / (2 * h);
            const double id = ml_derivative(beta, z);
            CHECK(id > 0.0);
            CHECK(std::abs(fd / id - 1.0) <= 1e-6);
        }
    }
    for (double z : {0.5, 3.0, 9.0}) CHECK(ml_derivative(1.0, z) == doctest::Approx(std::exp(z)).epsilon(1e-12));
    CHECK_THROWS_AS(ml_derivative(0.5, 0.0), DomainError);
}

TEST_CASE("growth rate of E_{beta,beta}") {
    const double t1 = 50.0, t2 = 100.0;
    const double slope = (log_mittag_leffler(0.5, 0.5, t2) - log_mittag_leffler(0.5, 0.5, t1)) / (t2 - t1);
    CHECK(std::abs(slope - 1.0) <= 0.05);
}

TEST_CASE("exponential bound certificate") {
    const auto c1 = certify_ml_bound(1.0, 2.0, 30.0);
    CHECK(c1.m_beta <= 1.1);
    std::mt19937_64 rng(5);
    for (double beta : {0.2, 0.5, 0.8, 1.0}) {
        const auto cert = certify_ml_bound(beta, 1.5, 40.0);
        CHECK(cert.m_beta > 0.0);
        std::uniform_real_distribution<double> u(cert.z_min, cert.z_max);
        std::vector<double> zs(2000);
        for (double& z : zs) z = u(rng);
        CHECK(verify_ml_bound(cert, zs.data(), static_cast<int>(zs.size())));
    }
    CHECK_THROWS_AS(certify_ml_bound(0.5, 0.5, 3.0), InvalidInput);
}
