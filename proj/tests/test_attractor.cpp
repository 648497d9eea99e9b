#include "doctest.h"

#include <cfloat>
#include <cmath>
#include <sstream>

#include "rpde/attractor.hpp"
#include "rpde/errors.hpp"
#include "rpde/roughpath.hpp"

using namespace rpde;

namespace {

Dynamics heat_only(double lambda_a = 3.0, std::size_t modes = 8) {
    ModelConfig mc;
    mc.model = SpectralModel::dirichlet(modes, lambda_a, 0.0);
    return Dynamics(mc);
}

Dynamics small_noise_model() {
    ModelConfig mc;
    mc.model = SpectralModel::dirichlet(8, 3.0, 0.0);
    mc.drift = {DriftConfig::Kind::tanh, 0.5, 0.0, 0.0};
    mc.diffusion = {DiffusionConfig::Kind::linear, 1e-6, 0.0, DiffusionConfig::Kernel::sine, 0};
    return Dynamics(mc);
}

}  // namespace

TEST_CASE("polynomial P") {
    CHECK(p_poly(0, 0) == 1.0);
    CHECK(p_poly(1, 1) == 5.0);
    CHECK(p_poly(2, 0.5) == doctest::Approx(1 + 2 + 0.5 + 2 * 4.5));
}

TEST_CASE("greedy step length and N~") {
    BoundPrimitives p;
    p.m_tilde = 1.0;
    p.gamma = 0.4;
    const auto k = BoundConstants::derive(p, heat_only());
    CHECK(k.d_step == doctest::Approx(9.765625e-4).epsilon(1e-12));
    CHECK(k.n_tilde == 1024.0);
    CHECK(k.n_tilde_for(2.0) == 2048.0);

    BoundPrimitives small;
    const auto ks = BoundConstants::derive(small, heat_only());
    CHECK(ks.n_tilde == 1.0);
}

TEST_CASE("moment order from N~ and unsafe moments") {
    BoundPrimitives p;
    p.gamma = 0.4;
    p.eta = 0.35;
    // d = (4 M~)^{-5} = 0.6 gives N~ = 2.
    p.m_tilde = std::pow(0.6, -0.2) / 4.0;
    const auto k = BoundConstants::derive(p, heat_only());
    CHECK(k.n_tilde == 2.0);
    CHECK(k.q_moment == doctest::Approx(240.0).epsilon(1e-12));

    NoiseConfig nc;
    std::vector<GridRoughPath> ens;
    for (std::uint64_t s = 0; s < 8; ++s) ens.push_back(make_noise(nc, s, 0, 1));
    const auto long_path = make_noise(nc, 99, 0, 8);
    try {
        (void)ergodic_moments(ens, long_path, k.q_moment);
        FAIL("expected a range error");
    } catch (const RangeError& e) {
        CHECK(std::string(e.what()).find("overflow-unsafe") != std::string::npos);
    }
    CHECK(max_safe_moment(1.0, 1) == doctest::Approx(std::log(DBL_MAX) / 4.0));
    CHECK(max_safe_moment(100.0, 10) < max_safe_moment(10.0, 10));
}

TEST_CASE("gap condition") {
    const auto dyn = small_noise_model();
    const auto k = BoundConstants::derive(BoundPrimitives{}, dyn);
    ErgodicReport e;
    e.k_bold = 0.0;
    auto g = check_gap_condition(k, e);
    CHECK(g.lhs == doctest::Approx(k.lambda_a - k.big_l));
    CHECK(g.rhs == doctest::Approx(k.c_const));
    e.k_bold = 1e300;
    g = check_gap_condition(k, e);
    CHECK_FALSE(g.pass);

    const auto heat = BoundConstants::derive(BoundPrimitives{}, heat_only());
    CHECK(heat.big_l == 0.0);
    CHECK(heat.l_tilde == 1.0);
    CHECK(std::isinf(heat.t0));
    CHECK(check_gap_condition(heat, ErgodicReport{}).lhs == 3.0);
}

TEST_CASE("regularity variant") {
    BoundPrimitives p;
    p.beta = 0.5;
    CHECK_THROWS_AS(BoundConstants::derive(p, small_noise_model()), InvalidInput);
    p.beta = 0.2;
    const auto kb = BoundConstants::derive(p, small_noise_model());
    const auto k0 = BoundConstants::derive(BoundPrimitives{}, small_noise_model());
    CHECK(kb.c_beta > 0.0);
    CHECK(kb.big_l != k0.big_l);
    CHECK(kb.cross_check(small_noise_model()).empty());
}

TEST_CASE("zero noise: H values and the absorbing series") {
    const auto dyn = small_noise_model();
    auto k = BoundConstants::derive(BoundPrimitives{}, dyn);
    const std::size_t K = 20;
    const auto rp = GridRoughPath::zero(-static_cast<double>(K) - 1.0, 1.0 / 64, 64 * (K + 2) + 1, 0.4);
    const auto h = eval_h(rp, k, 0, 64);
    CHECK(h.h1 == 0.0);
    const double h2 = std::max(k.c_tilde_a * std::exp(k.lambda), k.c_tilde_1 * k.c_g);
    CHECK(h.h2 == doctest::Approx(h2).epsilon(1e-14));

    const auto rep = absorbing_radius(rp, k, K);
    const double q = std::exp(-k.lambda);
    const double full = h2 * q / (1.0 - q);
    CHECK(std::abs(rep.r_series + rep.tail - full) <= 1e-10 * full);
    CHECK(rep.rate == doctest::Approx(q).epsilon(1e-10));
    CHECK(rep.ball == doctest::Approx(rep.radius + k.delta_bar));
}

TEST_CASE("H is shift equivariant") {
    const auto dyn = small_noise_model();
    const auto k = BoundConstants::derive(BoundPrimitives{}, dyn);
    NoiseConfig nc;
    nc.noise_scale = 0.1;
    const auto rp = make_noise(nc, 17, -3, 2);
    const auto sh = shift(rp, 2.0);
    const auto a = eval_h(rp, k, rp.index_of(-1.0), rp.index_of(0.0));
    const auto b = eval_h(sh, k, sh.index_of(-3.0), sh.index_of(-2.0));
    CHECK(a.h1 == doctest::Approx(b.h1).epsilon(1e-12));
    CHECK(a.h2 == doctest::Approx(b.h2).epsilon(1e-12));
}

TEST_CASE("ensemble and time averages agree for Brownian noise") {
    NoiseConfig nc;
    nc.hurst = 0.5;
    nc.gamma = 0.4;
    std::vector<GridRoughPath> ens;
    for (std::uint64_t s = 0; s < 1000; ++s) ens.push_back(make_noise(nc, 10000 + s, 0, 1));
    const auto long_path = make_noise(nc, 7, 0, 1000);
    const auto r = ergodic_moments(ens, long_path, 2.0);
    MESSAGE("ensemble " << r.k_bold << " +- " << r.std_err << ", time " << r.time_k_bold << " +- "
                        << r.time_std_err);
    CHECK(r.n_windows == 1000);
    CHECK(r.agree);
}

TEST_CASE("pullback contraction without coefficients") {
    const auto dyn = heat_only(2.0, 8);
    NoiseConfig nc;
    const auto rp = make_noise(nc, 3, -8, 0);
    const auto cloud = make_cloud(dyn.model(), 12, 5.0, 1);
    const double d0 = cloud_diameter(dyn.model(), cloud);
    std::size_t failures = 99;
    const auto rows = pullback_estimate(dyn, rp, 3, {1, 2, 4, 8}, cloud, 10.0, 0.25, &failures);
    CHECK(failures == 0);
    const double mu1 = dyn.model().mu.front();
    for (const auto& row : rows) {
        CHECK(row.diameter <= d0 * std::exp(-mu1 * row.t) * (1 + 1e-9));
        CHECK(row.accepted);
    }
    CHECK(std::isnan(rows.front().semidistance));
    CHECK(rows.back().semidistance <= rows[1].semidistance);
    CHECK(hausdorff_semidistance(dyn.model(), cloud, cloud) == 0.0);
}

TEST_CASE("a-priori and chained bounds hold without coefficients") {
    const auto dyn = heat_only(3.0, 8);
    const auto k = BoundConstants::derive(BoundPrimitives{}, dyn);
    NoiseConfig nc;
    nc.noise_scale = 0.05;
    const auto rp = make_noise(nc, 5, 0, 4);
    std::vector<double> y0(8, 0.5);
    const auto path = solve_mild(dyn, y0, rp, 0, rp.points() - 1);
    for (double t : {0.5, 1.0, 2.5, 3.0}) CHECK(apriori_bound(dyn, path, rp, k, t).pass);
    CHECK(chain_bound(dyn, path, rp, k, 3).pass);
}

TEST_CASE("constants record") {
    const auto dyn = small_noise_model();
    auto k = BoundConstants::derive(BoundPrimitives{}, dyn);
    CHECK_NOTHROW(k.validate());
    CHECK(k.cross_check(dyn).empty());
    k.c_tilde_2 *= 2.0;
    const auto bad = k.cross_check(dyn);
    REQUIRE(bad.size() == 1);
    CHECK(bad[0] == "c_tilde_2");

    k.m_calibrated = true;
    std::stringstream ss;
    k.dump_csv(ss);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "name,value,provenance");
    bool saw = false;
    while (std::getline(ss, line))
        if (line.rfind("m_big,", 0) == 0) saw = line.find(",calibrated") != std::string::npos;
    CHECK(saw);

    BoundPrimitives p;
    p.chi = 0.5;
    CHECK_THROWS_AS(BoundConstants::derive(p, dyn).validate(), ConfigError);
}
