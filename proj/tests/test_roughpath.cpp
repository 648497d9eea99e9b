#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "rpde/errors.hpp"
#include "rpde/roughpath.hpp"

using namespace rpde;

namespace {

std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) v[i] = v[i - 1] + nd(rng);
    return v;
}

// Midpoint Riemann sum of int_s^t X_{s,r} dX_r for the piecewise-linear interpolant,
// evaluated on `sub` sub-steps per cell.
double riemann_area(const std::vector<double>& x, std::size_t i, std::size_t j, int sub) {
    double acc = 0.0;
    for (std::size_t k = i; k < j; ++k) {
        const double d = (x[k + 1] - x[k]) / sub;
        for (int m = 0; m < sub; ++m) {
            const double left = x[k] + d * m;
            acc += (left + 0.5 * d - x[i]) * d;
        }
    }
    return acc;
}

// Lift of a fine path seen on every other grid point (second level via Chen).
GridRoughPath coarsen(const GridRoughPath& fine) {
    std::vector<double> x, xx;
    for (std::size_t i = 0; i < fine.points(); i += 2) x.push_back(fine.x()[i]);
    for (std::size_t i = 0; i + 2 < fine.points(); i += 2) xx.push_back(fine.area(i, i + 2));
    return {fine.t0(), 2.0 * fine.dt(), x, xx, fine.gamma()};
}

}  // namespace

TEST_CASE("linear path lifts to (t-s)^2/2") {
    const std::vector<double> one{0.0, 1.0};
    const auto rp = lift_piecewise_linear(one, 0.0, 1.0, 0.4);
    CHECK(rp.area(0, 1) == doctest::Approx(0.5).epsilon(1e-15));

    std::vector<double> lin(33);
    for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = static_cast<double>(i) / 32.0;
    const auto r2 = lift_piecewise_linear(lin, 0.0, 1.0 / 32.0, 0.4);
    for (std::size_t i = 0; i < lin.size(); ++i)
        for (std::size_t j = i; j < lin.size(); ++j) {
            const double h = (j - i) / 32.0;
            CHECK(std::abs(r2.area(i, j) - h * h / 2) <= 1e-15);
        }
    CHECK(holder_seminorm(r2, Level::first, 0, 32) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("constant path has vanishing levels") {
    const std::vector<double> c(10, 3.5);
    const auto rp = lift_piecewise_linear(c, 0.0, 0.1, 0.4);
    for (std::size_t i = 0; i < rp.points(); ++i) CHECK(rp.x()[i] == 0.0);
    for (double v : rp.xx_cells()) CHECK(v == 0.0);
    CHECK(holder_seminorm(rp, Level::first, 0, 9) == 0.0);
    CHECK(holder_seminorm(rp, Level::second, 0, 9) == 0.0);
}

TEST_CASE("second level matches a Riemann oracle on every pair") {
    const auto x = random_walk(8, 7);
    const auto rp = lift_piecewise_linear(x, 0.0, 0.125, 0.4);
    std::vector<double> shifted(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = x[i] - x[0];
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double want = riemann_area(shifted, i, j, 10000 / static_cast<int>(j - i) + 1);
            CHECK(rp.area(i, j) == doctest::Approx(want).epsilon(1e-6));
        }
}

TEST_CASE("Chen defect on all grid triples") {
    const auto x = random_walk(40, 3);
    const auto rp = lift_piecewise_linear(x, 0.0, 0.025, 0.4);
    double worst = 0.0;
    for (std::size_t s = 0; s < rp.points(); ++s)
        for (std::size_t u = s; u < rp.points(); ++u)
            for (std::size_t t = u; t < rp.points(); ++t) {
                const double d = rp.area(s, t) - rp.area(s, u) - rp.area(u, t) -
                                 rp.increment(s, u) * rp.increment(u, t);
                worst = std::max(worst, std::abs(d) / (1.0 + std::abs(rp.area(s, t))));
            }
    CHECK(worst <= 1e-12);
}

TEST_CASE("lift rejects short input") {
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(lift_piecewise_linear(one, 0.0, 0.1, 0.4), InvalidInput);
}

TEST_CASE("fBm sampler: law checks") {
    SUBCASE("start at zero and determinism") {
        const auto a = sample_fbm(0.4, 64, 11);
        const auto b = sample_fbm(0.4, 64, 11);
        CHECK(a.front() == 0.0);
        CHECK(a == b);
        CHECK(a.size() == 65);
    }
    SUBCASE("Brownian increments have variance dt") {
        const std::size_t n = 16, seeds = 10000;
        double ss = 0.0;
        for (std::size_t s = 0; s < seeds; ++s) {
            const auto x = sample_fbm(0.5, n, s);
            for (std::size_t k = 0; k < n; ++k) ss += (x[k + 1] - x[k]) * (x[k + 1] - x[k]);
        }
        const double var = ss / static_cast<double>(seeds * n);
        CHECK(std::abs(var - 1.0 / n) <= 0.05 / n);
        // first increment alone
        double s1 = 0.0;
        for (std::size_t s = 0; s < seeds; ++s) {
            const auto x = sample_fbm(0.5, n, 50000 + s);
            s1 += x[1] * x[1];
        }
        CHECK(std::abs(s1 / seeds - 1.0 / n) <= 0.05 / n);
    }
    SUBCASE("H = 0.4 has Var(X_1) = 1") {
        double ss = 0.0, sh = 0.0;
        const std::size_t seeds = 10000;
        for (std::size_t s = 0; s < seeds; ++s) {
            const auto x = sample_fbm(0.4, 32, s);
            ss += x.back() * x.back();
            sh += x[16] * x[16];
        }
        CHECK(std::abs(ss / seeds - 1.0) <= 0.05);
        CHECK(std::abs(sh / seeds - std::pow(0.5, 0.8)) <= 0.05 * std::pow(0.5, 0.8));
    }
    SUBCASE("range") {
        CHECK_THROWS_AS(sample_fbm(0.3, 16, 1), InvalidInput);
        CHECK_THROWS_AS(sample_fbm(1.2, 16, 1), InvalidInput);
        CHECK_THROWS_AS(sample_fbm(0.5, 1, 1), InvalidInput);
    }
}

TEST_CASE("grid seminorm is monotone under refinement") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto x = sample_fbm(0.45, 128, seed);
        const auto fine = lift_piecewise_linear(x, 0.0, 1.0 / 128, 0.4);
        const auto coarse = coarsen(fine);
        CHECK(holder_seminorm(coarse, Level::first, 0, coarse.points() - 1) <=
              holder_seminorm(fine, Level::first, 0, fine.points() - 1));
        CHECK(holder_seminorm(coarse, Level::second, 0, coarse.points() - 1) <=
              holder_seminorm(fine, Level::second, 0, fine.points() - 1) + 1e-15);
    }
}

TEST_CASE("rough metric") {
    const auto x = sample_fbm(0.45, 64, 5);
    const auto a = lift_piecewise_linear(x, 0.0, 1.0 / 64, 0.4);
    const auto zero = GridRoughPath::zero(0.0, 1.0 / 64, 65, 0.4);
    CHECK(rough_metric(a, a, 0, 64) == 0.0);
    const auto rep = holder_report(a, 0, 64);
    CHECK(rough_metric(a, zero, 0, 64) == doctest::Approx(rep.rho).epsilon(1e-14));
    CHECK(rep.rho == rep.seminorm_x + rep.seminorm_xx);
    const auto y = sample_fbm(0.45, 64, 6);
    const auto b = lift_piecewise_linear(y, 0.0, 1.0 / 64, 0.4);
    CHECK(rough_metric(a, b, 0, 64) == rough_metric(b, a, 0, 64));
    CHECK(rough_metric(a, b, 0, 64) > 0.0);
    const auto other = GridRoughPath::zero(0.0, 1.0 / 32, 33, 0.4);
    CHECK_THROWS_AS(rough_metric(a, other, 0, 32), InvalidInput);
}

TEST_CASE("dyadic lifts form a Cauchy sequence for gamma' < H") {
    // d(lift_n, lift_2n), both interpolated onto a common grid of 512 cells, averaged over seeds.
    // On grid n itself the two lifts agree exactly, so the comparison grid must be finer.
    const std::size_t fine_n = 1024, common = 512;
    std::vector<double> dist(4, 0.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = sample_fbm(0.5, fine_n, 100 + seed);
        auto lift_at = [&](std::size_t n) {
            std::vector<double> xn;
            for (std::size_t i = 0; i <= fine_n; i += fine_n / n) xn.push_back(x[i]);
            return refine_linear(lift_piecewise_linear(xn, 0.0, 1.0 / n, 0.3), common / n);
        };
        for (std::size_t lvl = 0; lvl < 4; ++lvl) {
            const std::size_t n = 16u << lvl;
            dist[lvl] += rough_metric(lift_at(n), lift_at(2 * n), 0, common);
        }
    }
    for (std::size_t lvl = 1; lvl < 4; ++lvl) CHECK(dist[lvl] < dist[lvl - 1]);
}

TEST_CASE("shift realizes theta_r") {
    const auto x = sample_fbm(0.45, 256, 9);
    const auto rp = lift_piecewise_linear(x, 0.0, 1.0 / 64, 0.4);
    const auto same = shift(rp, 0.0);
    CHECK(same.points() == rp.points());
    CHECK(rough_metric(same, rp, 0, rp.points() - 1) == 0.0);

    const double r = 0.5;
    const auto s = shift(rp, r);
    const std::size_t m = 32;
    for (std::size_t i = 0; i + 64 < s.points(); i += 17) {
        CHECK(holder_seminorm(s, Level::first, i, i + 64) ==
              holder_seminorm(rp, Level::first, i + m, i + m + 64));
        CHECK(s.cell_increment(i) == rp.cell_increment(i + m));
        CHECK(s.xx_cells()[i] == rp.xx_cells()[i + m]);
    }
    const auto twice = shift(shift(rp, 0.25), 0.5);
    const auto once = shift(rp, 0.75);
    CHECK(twice.points() == once.points());
    for (std::size_t i = 0; i < once.cells(); ++i) {
        CHECK(twice.cell_increment(i) == once.cell_increment(i));
        CHECK(twice.xx_cells()[i] == once.xx_cells()[i]);
    }
    CHECK_THROWS_AS(shift(rp, 0.01), InvalidInput);
    CHECK_THROWS_AS(shift(rp, 4.0), InvalidInput);
}

TEST_CASE("csv round trip") {
    const auto x = sample_fbm(0.45, 16, 2);
    const auto rp = lift_piecewise_linear(x, 0.5, 1.0 / 16, 0.4);
    std::stringstream ss;
    write_path_csv(ss, rp);
    const auto back = read_path_csv(ss, 0.4);
    CHECK(back.points() == rp.points());
    for (std::size_t i = 0; i < rp.points(); ++i) CHECK(back.x()[i] == rp.x()[i]);
    for (std::size_t i = 0; i < rp.cells(); ++i) CHECK(back.xx_cells()[i] == rp.xx_cells()[i]);
    std::stringstream again;
    write_path_csv(again, back);
    std::stringstream first;
    write_path_csv(first, rp);
    CHECK(again.str() == first.str());
}
