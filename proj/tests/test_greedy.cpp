#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "rpde/errors.hpp"
#include "rpde/greedy.hpp"
#include "rpde/roughpath.hpp"

using namespace rpde;

namespace {

GridRoughPath fbm_path(double hurst, std::size_t n, std::uint64_t seed, double gamma = 0.4,
                       double scale = 1.0) {
    auto x = sample_fbm(hurst, n, seed);
    for (double& v : x) v *= scale;
    return lift_piecewise_linear(x, 0.0, 1.0 / static_cast<double>(n), gamma);
}

// Exhaustive supremum over all subsets of interior grid points.
double brute_w(const GridRoughPath& rp, double eta, std::size_t first, std::size_t last) {
    const std::size_t inner = last - first - 1;
    double best = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << inner); ++mask) {
        double acc = 0.0;
        std::size_t prev = first;
        for (std::size_t b = 0; b < inner; ++b)
            if (mask & (std::size_t{1} << b)) {
                acc += control_weight(rp, eta, prev, first + 1 + b);
                prev = first + 1 + b;
            }
        acc += control_weight(rp, eta, prev, last);
        best = std::max(best, acc);
    }
    return best;
}

}  // namespace

TEST_CASE("control W: trivial cases") {
    const auto zero = GridRoughPath::zero(0.0, 0.1, 11, 0.4);
    CHECK(control_w(zero, 0.1, 0, 10) == 0.0);
    const auto rp = fbm_path(0.45, 32, 1);
    CHECK(control_w(rp, 0.1, 5, 5) == 0.0);
    CHECK_THROWS_AS(control_w(rp, 0.4, 0, 10), InvalidInput);
}

TEST_CASE("control W: dynamic program equals exhaustive enumeration") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd;
    for (int inst = 0; inst < 200; ++inst) {
        std::vector<double> x(12, 0.0);
        for (std::size_t i = 1; i < x.size(); ++i) x[i] = x[i - 1] + nd(rng) * 0.3;
        const auto rp = lift_piecewise_linear(x, 0.0, 1.0 / 11, 0.4);
        const double eta = 0.05 + 0.3 * (inst % 7) / 7.0;
        const double dp = control_w(rp, eta, 0, 11);
        const double bf = brute_w(rp, eta, 0, 11);
        CHECK(std::abs(dp - bf) <= 1e-12 * std::max(1.0, bf));
    }
}

TEST_CASE("greedy times: structure") {
    const auto zero = GridRoughPath::zero(0.0, 0.1, 11, 0.4);
    auto gp = greedy_times(zero, 0.1, 0.5, 0, 10);
    CHECK(gp.count == 1);
    CHECK(gp.taus.front() == 0.0);
    CHECK(gp.taus.back() == doctest::Approx(1.0));

    const auto rp = fbm_path(0.45, 128, 4, 0.4, 0.2);
    const double eta = 0.1, gamma = 0.4;
    const double w = control_w(rp, eta, 0, 128);
    gp = greedy_times(rp, eta, std::pow(w, gamma - eta) * 1.01, 0, 128);
    CHECK(gp.count == 1);

    const double chi = 0.3;
    gp = greedy_times(rp, eta, chi, 0, 128);
    CHECK(gp.count == gp.taus.size() - 1);
    CHECK(gp.count >= 1);
    for (std::size_t n = 0; n < gp.count; ++n) {
        const auto a = gp.indices[n], b = gp.indices[n + 1];
        CHECK(a < b);
        CHECK(std::pow(control_w(rp, eta, a, b), gamma - eta) <= chi);
        if (n + 1 < gp.count) CHECK(std::pow(control_w(rp, eta, a, b + 1), gamma - eta) > chi);
    }
}

TEST_CASE("greedy times: too coarse grid reports the cell") {
    std::vector<double> x{0.0, 10.0, 0.0};
    const auto rp = lift_piecewise_linear(x, 0.0, 0.5, 0.4);
    CHECK_THROWS_WITH_AS(greedy_times(rp, 0.1, 0.01, 0, 2), doctest::Contains("cell"), InvalidInput);
}

TEST_CASE("count bound and superadditivity on fBm samples") {
    const double gamma = 0.4, eta = 0.1, chi = 0.5;
    const double p = 1.0 / (gamma - eta);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto rp = fbm_path(0.45, 1024, 1000 + seed, gamma);
        const double w = control_w(rp, eta, 0, 1024);
        const auto n = count_in_window(rp, eta, chi, 0, 1024);
        CHECK(static_cast<double>(n) <= w * std::pow(chi, -p) + 1.0);
        const double hx = holder_seminorm(rp, Level::first, 0, 1024);
        const double hxx = holder_seminorm(rp, Level::second, 0, 1024);
        CHECK(w <= 1.0 * (std::pow(hx, p) + std::pow(hxx, p / 2.0)) * (1.0 + 1e-12));
    }
}

TEST_CASE("superadditivity, monotonicity and shift equivariance") {
    const double eta = 0.1;
    const auto rp = fbm_path(0.45, 48, 77, 0.4, 0.05);
    for (std::size_t s = 0; s < 48; s += 5)
        for (std::size_t u = s; u < 48; u += 3)
            for (std::size_t t = u; t <= 48; t += 4)
                CHECK(control_w(rp, eta, s, u) + control_w(rp, eta, u, t) <=
                      control_w(rp, eta, s, t) + 1e-12);
    std::size_t prev = 1u << 30;
    for (double chi : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        const auto n = count_in_window(rp, eta, chi, 0, 48);
        CHECK(n <= prev);
        prev = n;
    }
    const auto big = fbm_path(0.45, 256, 78, 0.4, 0.1);
    const auto sh = shift(big, 0.25);
    for (std::size_t i = 0; i + 64 < sh.points(); i += 23) {
        CHECK(count_in_window(sh, eta, 0.1, i, i + 64) == count_in_window(big, eta, 0.1, i + 64, i + 128));
        // W sees re-based values, so it agrees to rounding; N is exact.
        CHECK(control_w(sh, eta, i, i + 64) ==
              doctest::Approx(control_w(big, eta, i + 64, i + 128)).epsilon(1e-12));
    }
}
