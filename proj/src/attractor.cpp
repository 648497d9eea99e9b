#include "rpde/attractor.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <utility>

#include "rpde/csv.hpp"
#include "rpde/errors.hpp"
#include "rpde/greedy.hpp"
#include "rpde/gronwall.hpp"
#include "rpde/kvconfig.hpp"
#include "rpde/specfun.hpp"

namespace rpde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t steps_per_unit(const GridRoughPath& rp) {
    const double s = 1.0 / rp.dt();
    const double r = std::round(s);
    if (std::abs(s - r) > 1e-9 || r < 1.0) throw InvalidInput("grid step must divide the unit interval");
    return static_cast<std::size_t>(r);
}

}  // namespace

NoiseConfig NoiseConfig::from_kv(const KeyValue& kv) {
    NoiseConfig c;
    c.hurst = kv.get_double("hurst", c.hurst);
    c.gamma = kv.get_double("gamma", c.gamma);
    c.noise_scale = kv.get_double("noise_scale", c.noise_scale);
    const long spu = kv.get_int("steps_per_unit", static_cast<long>(c.steps_per_unit));
    if (!(c.hurst > 1.0 / 3.0 && c.hurst <= 1.0)) throw ConfigError("hurst must lie in (1/3, 1]");
    if (!(c.gamma > 1.0 / 3.0 && c.gamma <= 0.5)) throw ConfigError("gamma must lie in (1/3, 1/2]");
    if (!(c.gamma < c.hurst)) throw ConfigError("gamma must be below hurst for a gamma-Hoelder lift");
    if (!(c.noise_scale >= 0.0) || !std::isfinite(c.noise_scale))
        throw ConfigError("noise_scale must be finite and >= 0");
    if (spu < 2) throw ConfigError("steps_per_unit must be >= 2");
    c.steps_per_unit = static_cast<std::size_t>(spu);
    return c;
}

GridRoughPath make_noise(const NoiseConfig& cfg, std::uint64_t seed, long t_start, long t_end) {
    if (t_end <= t_start) throw InvalidInput("noise interval must be nonempty");
    const auto units = static_cast<std::size_t>(t_end - t_start);
    const std::size_t n = units * cfg.steps_per_unit;
    auto x = sample_fbm(cfg.hurst, n, seed, static_cast<double>(units));
    for (double& v : x) v *= cfg.noise_scale;
    return lift_piecewise_linear(x, static_cast<double>(t_start), cfg.dt(), cfg.gamma);
}

BoundPrimitives BoundPrimitives::from_kv(const KeyValue& kv) {
    BoundPrimitives p;
    p.gamma = kv.get_double("gamma", p.gamma);
    p.eta = kv.get_double("eta", p.eta);
    p.chi = kv.get_double("chi", p.chi);
    p.m_tilde = kv.get_double("m_tilde", p.m_tilde);
    p.m_big = kv.get_double("m_big", p.m_big);
    p.c_i = kv.get_double("c_i", p.c_i);
    p.delta_bar = kv.get_double("delta_bar", p.delta_bar);
    p.z_min = kv.get_double("z_min", p.z_min);
    p.z_max = kv.get_double("z_max", p.z_max);
    p.beta = kv.get_double("beta", p.beta);
    return p;
}

BoundConstants BoundConstants::derive(const BoundPrimitives& prim, const Dynamics& dyn) {
    BoundConstants k;
    k.prim = prim;
    const auto& model = dyn.model();
    const auto& drift = dyn.drift();
    k.gamma = prim.gamma;
    k.eta = prim.eta;
    k.chi = prim.chi;
    k.sigma_f = drift.sigma_f;
    k.sigma_g = dyn.diffusion().config().sigma_g;
    k.c_f = drift.kind == DriftConfig::Kind::zero ? 0.0 : drift.c_f;
    k.c_g = dyn.diffusion().bound_constant(prim.gamma);
    k.lambda_a = model.lambda_a;
    k.lambda_tilde = model.lambda_tilde();
    k.m_tilde = prim.m_tilde;
    k.m_big = prim.m_big;
    k.c_i = prim.c_i;
    k.delta_bar = prim.delta_bar;
    k.beta = prim.beta;
    k.z_min = prim.z_min;

    if (!(prim.m_tilde > 0.0)) throw ConfigError("m_tilde must be positive");
    if (!(prim.gamma > 0.0 && prim.gamma <= 0.5)) throw ConfigError("gamma must lie in (0, 1/2]");
    if (prim.beta < 0.0) throw ConfigError("beta must be >= 0");
    if (prim.beta > 0.0 &&
        !(k.sigma_f + prim.beta < 1.0 && k.sigma_g + prim.beta < prim.gamma))
        throw InvalidInput("invalid regularity: need 0 < beta < min{1 - sigma_F, gamma - sigma_G}");

    k.d_step = std::pow(4.0 * k.m_tilde, -1.0 / (1.0 - std::max(k.sigma_f, 2.0 * k.gamma)));
    k.n_tilde = k.n_tilde_for(1.0);

    const double sf = k.sigma_f + k.beta;
    k.c_sigma_f = smoothing_constant(model, sf, k.lambda_a);
    k.c_beta = smoothing_constant(model, k.beta, k.lambda_a);
    k.big_l = k.c_f > 0.0
                  ? 2.0 * std::pow(k.c_sigma_f * k.c_f * gamma_fn(1.0 - sf), 1.0 / (1.0 - sf))
                  : 0.0;
    const double order = 1.0 - sf;
    k.m_beta = certify_ml_bound(order, prim.z_min, prim.z_max).m_beta;
    k.ml_at_zmin = mittag_leffler(order, 1.0, prim.z_min);
    if (k.big_l > 0.0) {
        k.t0 = 2.0 * prim.z_min / k.big_l;
        k.l_tilde = 2.0 * k.ml_at_zmin / k.big_l + 1.0;
    } else {
        // Without drift the Gronwall step is void: t0 is unbounded and L~ = 1.
        k.t0 = std::numeric_limits<double>::infinity();
        k.l_tilde = 1.0;
    }
    k.lambda = k.lambda_a - k.big_l;
    k.c_1 = k.c_i;
    k.c_2 = k.c_f > 0.0 ? k.c_sigma_f * k.c_f * std::pow(k.lambda_a, sf - 1.0) * gamma_fn(1.0 - sf)
                        : 0.0;
    const double spread = std::max(k.l_tilde, k.m_beta / 2.0);
    if (k.beta > 0.0) {
        k.c_tilde_1 = std::max(k.c_i, k.c_beta * k.c_i) * std::exp(k.lambda_a) *
                      std::min(k.l_tilde, k.m_beta / 2.0);
        k.c_tilde_a = k.c_beta * spread;
    } else {
        k.c_tilde_1 = k.c_1 * std::exp(k.lambda_a) * spread;
        k.c_tilde_a = spread;
    }
    k.c_tilde_2 =
        k.c_2 * (k.l_tilde + (k.big_l > 0.0 ? k.big_l * k.m_beta / (2.0 * k.lambda) : 0.0));
    const double n1 = 1.0 + k.n_tilde;
    k.c_of_n = std::max({n1, 2.0 * n1, 3.0 * std::pow(2.0, 4.0 * n1) * std::pow(k.m_big, n1)});
    k.c_const = k.c_of_n * std::max(k.m_tilde, k.c_tilde_1 * k.c_g);
    k.q_moment = 4.0 * n1 / (k.gamma - k.eta);
    return k;
}

double BoundConstants::n_tilde_for(double length) const {
    return std::max(1.0, std::ceil(length / d_step - 1e-9));
}

void BoundConstants::validate() const {
    auto fail = [](const std::string& s) { throw ConfigError(s); };
    if (!(gamma > 1.0 / 3.0 && gamma <= 0.5)) fail("gamma must lie in (1/3, 1/2]");
    if (!(eta > sigma_g && eta < gamma)) fail("eta must lie in (sigma_G, gamma)");
    if (!(sigma_g < gamma)) fail("sigma_G must be below gamma");
    if (!(chi > 0.0 && chi < 1.0)) fail("chi must lie in (0, 1)");
    if (!(m_big > 0.0)) fail("M must be positive");
    if (!(std::exp(m_tilde) * std::pow(chi, gamma - eta) <= 0.5))
        fail("e^{M~} chi^{gamma-eta} <= 1/2 violated; lower chi or M~");
    if (!(lambda > 0.0)) fail("lambda = lambda_A - L must be positive");
    if (!(c_i > 0.0)) fail("c_i must be positive");
    if (!(delta_bar > 0.0)) fail("delta_bar must be positive");
}

std::vector<std::string> BoundConstants::cross_check(const Dynamics& dyn) const {
    const auto fresh = derive(prim, dyn);
    std::vector<std::string> bad;
    auto cmp = [&](const char* name, double a, double b) {
        if (a == b || (std::isnan(a) && std::isnan(b))) return;
        if (std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b))) return;
        bad.emplace_back(name);
    };
#define RPDE_CMP(f) cmp(#f, f, fresh.f)
    RPDE_CMP(d_step); RPDE_CMP(n_tilde); RPDE_CMP(c_sigma_f); RPDE_CMP(c_beta);
    RPDE_CMP(big_l); RPDE_CMP(t0); RPDE_CMP(m_beta); RPDE_CMP(l_tilde); RPDE_CMP(lambda);
    RPDE_CMP(c_1); RPDE_CMP(c_2); RPDE_CMP(c_tilde_1); RPDE_CMP(c_tilde_2); RPDE_CMP(c_tilde_a);
    RPDE_CMP(c_of_n); RPDE_CMP(c_const); RPDE_CMP(q_moment); RPDE_CMP(c_g);
#undef RPDE_CMP
    return bad;
}

void BoundConstants::dump_csv(std::ostream& out) const {
    const char* P = "primitive";
    const char* D = "derived";
    const char* C = "calibrated";
    const std::pair<const char*, std::pair<double, const char*>> rows[] = {
        {"gamma", {gamma, P}},
        {"eta", {eta, P}},
        {"chi", {chi, P}},
        {"sigma_f", {sigma_f, P}},
        {"sigma_g", {sigma_g, P}},
        {"c_f", {c_f, P}},
        {"c_g", {c_g, D}},
        {"lambda_a", {lambda_a, P}},
        {"lambda_tilde", {lambda_tilde, D}},
        {"m_tilde", {m_tilde, P}},
        {"m_big", {m_big, m_calibrated ? C : P}},
        {"d_step", {d_step, D}},
        {"n_tilde", {n_tilde, D}},
        {"c_minus_sigma_f", {c_sigma_f, D}},
        {"c_minus_beta", {c_beta, D}},
        {"big_l", {big_l, D}},
        {"z_min", {z_min, P}},
        {"t0", {t0, D}},
        {"m_beta", {m_beta, D}},
        {"l_tilde", {l_tilde, D}},
        {"lambda", {lambda, D}},
        {"c_i", {c_i, c_i_calibrated ? C : P}},
        {"c_1", {c_1, D}},
        {"c_2", {c_2, D}},
        {"c_tilde_1", {c_tilde_1, D}},
        {"c_tilde_2", {c_tilde_2, D}},
        {"c_tilde_a", {c_tilde_a, D}},
        {"c_of_n", {c_of_n, D}},
        {"c_const", {c_const, D}},
        {"q_moment", {q_moment, D}},
        {"delta_bar", {delta_bar, P}},
        {"beta", {beta, P}},
    };
    out << "name,value,provenance\n";
    for (const auto& [name, vp] : rows) out << name << ',' << csv::num(vp.first) << ',' << vp.second << '\n';
}

double p_poly(double x, double y) { return 1.0 + x + y + x * (x * x + y); }

namespace {

PConstants p_from_stats(std::size_t n, double hx, double hxx, double n_tilde, double m_big,
                        double m_tilde) {
    PConstants p;
    p.n_greedy = n;
    p.n_tilde = n_tilde;
    p.holder_x = hx;
    p.holder_xx = hxx;
    p.rho = hx + hxx;
    const double nn = static_cast<double>(n);
    p.p_tilde = m_big * nn * (1.0 + hx) * std::exp(nn * m_tilde);
    p.p1 = n_tilde * std::pow(p.p_tilde, n_tilde + 1.0);
    double geom;
    if (std::abs(p.p_tilde - 1.0) < 1e-12) {
        geom = n_tilde;
    } else {
        geom = std::expm1(n_tilde * std::log(p.p_tilde)) / (p.p_tilde - 1.0);
    }
    p.p2 = m_big * n_tilde * nn * (1.0 + hx) * std::expm1((nn + 1.0) * m_tilde) /
           std::expm1(m_tilde) * p_poly(hx, hxx) * geom;
    return p;
}

}  // namespace

PConstants eval_p_constants(const GridRoughPath& rp, const BoundConstants& k, std::size_t first,
                            std::size_t last) {
    if (first >= last || last >= rp.points()) throw InvalidInput("interval must contain a grid cell");
    const double length = static_cast<double>(last - first) * rp.dt();
    const auto n = count_in_window(rp, k.eta, k.chi, first, last);
    const auto hr = holder_report(rp, first, last);
    return p_from_stats(n, hr.seminorm_x, hr.seminorm_xx, k.n_tilde_for(length), k.m_big, k.m_tilde);
}

BoundCheck check_solution_bound(const Dynamics& dyn, const ControlledPath& path,
                                const GridRoughPath& rp, const BoundConstants& k,
                                std::size_t first, std::size_t last) {
    const std::size_t offset = rp.index_of(path.t0);
    if (first < offset || last - offset >= path.points())
        throw InvalidInput("interval outside the solved path");
    const auto cn = controlled_norm(dyn.model(), path, rp, first - offset, last - offset);
    const auto p = eval_p_constants(rp, k, first, last);
    BoundCheck b;
    b.lhs = cn.total;
    b.rhs = frac_norm(dyn.model(), path.y[first - offset], dyn.model().alpha) * p.p1 + p.p2;
    b.margin = b.rhs - b.lhs;
    b.pass = b.lhs <= b.rhs;
    return b;
}

UnitWindowData unit_windows(const Dynamics& dyn, const ControlledPath& path, const GridRoughPath& rp,
                            std::size_t units) {
    const std::size_t spu = steps_per_unit(rp);
    const std::size_t offset = rp.index_of(path.t0);
    if (units * spu >= path.points()) throw InvalidInput("path shorter than the requested unit windows");
    UnitWindowData w;
    for (std::size_t l = 0; l < units; ++l) {
        const std::size_t a = l * spu, b = (l + 1) * spu;
        w.rho.push_back(holder_report(rp, offset + a, offset + b).rho);
        w.sol_norm.push_back(controlled_norm(dyn.model(), path, rp, a, b).total);
        w.start_norm.push_back(frac_norm(dyn.model(), path.y[a], dyn.model().alpha));
    }
    return w;
}

namespace {

struct AprioriParts {
    double lhs, fixed, noise_sum;  // rhs = fixed + C~_1 C_G noise_sum
};

AprioriParts apriori_parts(const Dynamics& dyn, const ControlledPath& path, const GridRoughPath& rp,
                           const BoundConstants& k, double t) {
    if (!(k.lambda > 0.0)) throw ConfigError("lambda = lambda_A - L must be positive");
    const std::size_t spu = steps_per_unit(rp);
    const double steps = t * static_cast<double>(spu);
    const auto idx = static_cast<std::size_t>(std::llround(steps));
    if (std::abs(steps - static_cast<double>(idx)) > 1e-7 || t <= 0.0)
        throw InvalidInput("a-priori time must be a positive grid time");
    const double tf = std::floor(t + 1e-12);
    const std::size_t n = (std::abs(t - tf) < 1e-12) ? static_cast<std::size_t>(tf) - 1
                                                    : static_cast<std::size_t>(tf);
    const auto w = unit_windows(dyn, path, rp, n + 1);
    double sum = 0.0;
    for (std::size_t l = 0; l <= n; ++l)
        sum += std::exp(k.lambda * static_cast<double>(l)) * w.rho[l] * w.rho[l] * (1.0 + w.sol_norm[l]);
    const auto& model = dyn.model();
    AprioriParts ap;
    ap.lhs = frac_norm(model, path.y[idx], model.alpha) * std::exp(k.lambda * t);
    ap.fixed = k.c_tilde_a * frac_norm(model, path.y[0], model.alpha) + k.c_tilde_2 * std::exp(k.lambda * t);
    ap.noise_sum = sum;
    return ap;
}

}  // namespace

BoundCheck apriori_bound(const Dynamics& dyn, const ControlledPath& path, const GridRoughPath& rp,
                         const BoundConstants& k, double t) {
    const auto ap = apriori_parts(dyn, path, rp, k, t);
    BoundCheck b;
    b.lhs = ap.lhs;
    b.rhs = ap.fixed + k.c_tilde_1 * k.c_g * ap.noise_sum;
    b.margin = b.rhs - b.lhs;
    b.pass = b.lhs <= b.rhs;
    return b;
}

HValues eval_h(const GridRoughPath& rp, const BoundConstants& k, std::size_t first, std::size_t last) {
    const auto p = eval_p_constants(rp, k, first, last);
    HValues h;
    const double rho2 = p.rho * p.rho;
    h.h1 = k.c_tilde_1 * k.c_g * rho2 * p.p1;
    h.h2 = std::max(k.c_tilde_a * std::exp(k.lambda), k.c_tilde_1 * k.c_g) * (1.0 + rho2 * (1.0 + p.p2));
    return h;
}

BoundCheck chain_bound(const Dynamics& dyn, const ControlledPath& path, const GridRoughPath& rp,
                       const BoundConstants& k, std::size_t n) {
    const std::size_t spu = steps_per_unit(rp);
    const std::size_t offset = rp.index_of(path.t0);
    if (n * spu >= path.points()) throw InvalidInput("path shorter than the chained horizon");
    std::vector<double> b(n), c(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto h = eval_h(rp, k, offset + j * spu, offset + (j + 1) * spu);
        b[j] = h.h1;
        c[j] = h.h2 * std::exp(k.lambda * static_cast<double>(j));
    }
    const auto& model = dyn.model();
    const double a = k.c_tilde_a * frac_norm(model, path.y[0], model.alpha);
    const auto u = discrete_gronwall(a, a, b, c);
    BoundCheck out;
    out.lhs = frac_norm(model, path.y[n * spu], model.alpha);
    out.rhs = u.back() * std::exp(-k.lambda * static_cast<double>(n));
    out.margin = out.rhs - out.lhs;
    out.pass = out.lhs <= out.rhs;
    return out;
}

double max_safe_moment(double s_max, std::size_t n) {
    const double budget = std::log(DBL_MAX) / 4.0 - std::log(static_cast<double>(std::max<std::size_t>(n, 1)));
    const double scale = s_max > 0.0 ? std::max(1.0, std::log(s_max)) : 1.0;
    return budget / scale;
}

namespace {

struct MeanSe {
    double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    if (v.empty()) return r;
    double s = 0.0;
    for (double x : v) s += x;
    r.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return r;
}

}  // namespace

ErgodicReport ergodic_moments(const std::vector<GridRoughPath>& ensemble,
                              const GridRoughPath& long_path, double q) {
    if (!(q >= 1.0)) throw InvalidInput("moment order q must be >= 1");
    std::vector<std::pair<double, double>> ens;
    for (const auto& rp : ensemble) {
        const std::size_t spu = steps_per_unit(rp);
        if (rp.points() <= spu) throw InvalidInput("ensemble members must cover a unit window");
        const auto hr = holder_report(rp, 0, spu);
        ens.emplace_back(hr.seminorm_x, hr.seminorm_xx);
    }
    std::vector<std::pair<double, double>> tim;
    const std::size_t spu = steps_per_unit(long_path);
    const std::size_t windows = (long_path.points() - 1) / spu;
    for (std::size_t j = 0; j < windows; ++j) {
        const auto hr = holder_report(long_path, j * spu, (j + 1) * spu);
        tim.emplace_back(hr.seminorm_x, hr.seminorm_xx);
    }
    double s_max = 0.0;
    for (const auto& [a, b] : ens) s_max = std::max({s_max, a, b});
    for (const auto& [a, b] : tim) s_max = std::max({s_max, a, b});
    const std::size_t count = std::max(ens.size(), tim.size());
    const double safe = max_safe_moment(s_max, count);
    if (q > safe) {
        std::ostringstream os;
        os << "moment order q=" << q << " is overflow-unsafe (max safe q=" << safe << ")";
        throw RangeError(os.str());
    }

    ErgodicReport r;
    r.q = q;
    r.n_samples = ens.size();
    std::vector<double> xs, xxs, tot;
    for (const auto& [a, b] : ens) {
        xs.push_back(std::pow(a, q));
        xxs.push_back(std::pow(b, q));
        tot.push_back(xs.back() + xxs.back());
    }
    r.k_q = mean_se(xs).mean;
    r.kk_q = mean_se(xxs).mean;
    r.k_bold = r.k_q + r.kk_q;
    r.std_err = mean_se(tot).se;

    std::vector<double> ttot;
    for (const auto& [a, b] : tim) ttot.push_back(std::pow(a, q) + std::pow(b, q));
    r.n_windows = ttot.size();
    if (ttot.empty()) {
        r.time_k_bold = kNaN;
        r.time_std_err = kNaN;
        r.agree = false;
    } else {
        const auto m = mean_se(ttot);
        r.time_k_bold = m.mean;
        r.time_std_err = m.se;
        const double se = std::sqrt(r.std_err * r.std_err + m.se * m.se);
        r.agree = std::abs(r.k_bold - m.mean) <= 3.0 * se;
    }
    return r;
}

GapReport check_gap_condition(const BoundConstants& k, const ErgodicReport& ergodic) {
    GapReport g;
    g.lhs = k.lambda_a - k.big_l;
    g.rhs = k.c_const * (ergodic.k_bold + 1.0);
    g.margin = g.lhs - g.rhs;
    g.pass = g.lhs > g.rhs;
    return g;
}

AbsorbReport absorbing_radius(const GridRoughPath& rp, const BoundConstants& k,
                              std::size_t truncation_k, std::size_t eps_points) {
    if (truncation_k < 2) throw InvalidInput("truncation_k must be >= 2");
    if (eps_points < 1) throw InvalidInput("eps_points must be >= 1");
    const std::size_t spu = steps_per_unit(rp);
    const double kk = static_cast<double>(truncation_k);
    if (rp.t0() > -kk - 1.0 + 1e-9 || rp.end_time() < 1.0 - 1e-9)
        throw InvalidInput("noise must cover [-truncation_k - 1, 1]");

    AbsorbReport rep;
    rep.truncation_k = truncation_k;
    double best = -1.0;
    for (std::size_t e = 0; e < eps_points; ++e) {
        const double eps = eps_points == 1 ? 0.0 : static_cast<double>(e) / static_cast<double>(eps_points - 1);
        const auto shift_steps = static_cast<std::size_t>(std::llround(eps * static_cast<double>(spu)));
        std::vector<double> terms;
        double prod = 1.0, sum = 0.0;
        for (std::size_t j = 1; j <= truncation_k; ++j) {
            const std::size_t a = rp.index_of(-static_cast<double>(j)) - shift_steps;
            const auto h = eval_h(rp, k, a, a + spu);
            const double term = std::exp(-k.lambda * static_cast<double>(j)) * h.h2 * prod;
            terms.push_back(term);
            sum += term;
            prod *= 1.0 + h.h1;
        }
        if (sum > best) {
            best = sum;
            rep.series_terms = std::move(terms);
        }
    }
    rep.r_series = best;

    // Geometric rate from a least-squares fit of log terms over the second half.
    const std::size_t lo = truncation_k / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    bool finite = true;
    for (std::size_t j = lo; j < truncation_k; ++j) {
        const double t = rep.series_terms[j];
        if (!(t > 0.0) || !std::isfinite(t)) {
            finite = false;
            break;
        }
        const double x = static_cast<double>(j + 1), y = std::log(t);
        sx += x; sy += y; sxx += x * x; sxy += x * y; cnt += 1.0;
    }
    const double slope = finite ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : kNaN;
    rep.rate = std::exp(slope);
    if (!finite || !(rep.rate < 1.0) || !std::isfinite(best)) {
        std::ostringstream os;
        os << "absorbing series does not decay by k=" << truncation_k << " (ratio " << rep.rate
           << "); gap condition violated empirically";
        throw NumericalDiagnostic(os.str(), -kk);
    }
    rep.tail = rep.series_terms.back() * rep.rate / (1.0 - rep.rate);

    const auto p = eval_p_constants(rp, k, rp.index_of(-1.0), rp.index_of(1.0));
    rep.p1_val = p.p1;
    rep.p2_val = p.p2;
    rep.radius = 1.0 + p.p1 * (rep.r_series + rep.tail) + p.p2;
    rep.ball = rep.radius + k.delta_bar;
    return rep;
}

double tempered_slope(const std::vector<double>& radii) {
    if (radii.size() < 2) throw InvalidInput("need at least two radii");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double x = static_cast<double>(i);
        const double y = std::max(0.0, std::log(radii[i]));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double hausdorff_semidistance(const SpectralModel& model, const std::vector<std::vector<double>>& a,
                              const std::vector<std::vector<double>>& b) {
    if (a.empty()) return 0.0;
    if (b.empty()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    std::vector<double> diff(model.n_modes);
    for (const auto& u : a) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& v : b) {
            for (std::size_t m = 0; m < diff.size(); ++m) diff[m] = u[m] - v[m];
            nearest = std::min(nearest, frac_norm(model, diff, model.alpha));
        }
        worst = std::max(worst, nearest);
    }
    return worst;
}

double cloud_diameter(const SpectralModel& model, const std::vector<std::vector<double>>& cloud) {
    double d = 0.0;
    std::vector<double> diff(model.n_modes);
    for (std::size_t i = 0; i < cloud.size(); ++i)
        for (std::size_t j = i + 1; j < cloud.size(); ++j) {
            for (std::size_t m = 0; m < diff.size(); ++m) diff[m] = cloud[i][m] - cloud[j][m];
            d = std::max(d, frac_norm(model, diff, model.alpha));
        }
    return d;
}

std::vector<PullbackRow> pullback_estimate(const Dynamics& dyn, const GridRoughPath& rp,
                                           std::uint64_t seed, const std::vector<double>& t_list,
                                           const std::vector<std::vector<double>>& cloud,
                                           double ball, double beta_norm, std::size_t* failures) {
    const auto& model = dyn.model();
    std::vector<PullbackRow> rows;
    std::size_t failed = 0;
    const std::size_t end = rp.index_of(0.0);
    for (std::size_t i = 0; i < t_list.size(); ++i) {
        if (i > 0 && !(t_list[i] > t_list[i - 1])) throw InvalidInput("t_list must be increasing");
        const std::size_t start = rp.index_of(-t_list[i]);
        PullbackRow row;
        row.seed = seed;
        row.t = t_list[i];
        for (const auto& y0 : cloud) {
            try {
                auto path = solve_mild(dyn, y0, rp, start, end);
                row.cloud.push_back(std::move(path.y.back()));
            } catch (const NumericalDiagnostic&) {
                ++failed;
            }
        }
        row.diameter = cloud_diameter(model, row.cloud);
        row.semidistance = i == 0 ? kNaN : hausdorff_semidistance(model, row.cloud, rows.back().cloud);
        row.radius = ball > 0.0 ? ball : kNaN;
        for (const auto& y : row.cloud) {
            row.max_norm = std::max(row.max_norm, frac_norm(model, y, model.alpha));
            row.max_norm_beta = std::max(row.max_norm_beta, frac_norm(model, y, model.alpha + beta_norm));
        }
        row.accepted = ball > 0.0 && !row.cloud.empty() && row.max_norm <= ball;
        rows.push_back(std::move(row));
    }
    if (failures) *failures = failed;
    return rows;
}

std::vector<std::vector<double>> make_cloud(const SpectralModel& model, std::size_t count,
                                            double radius, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> cloud;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> v(model.n_modes);
        // Decaying mode weights keep the states smooth; the norm is then rescaled.
        for (std::size_t m = 0; m < v.size(); ++m) v[m] = normal(rng) / static_cast<double>((m + 1) * (m + 1));
        const double nrm = frac_norm(model, v, model.alpha);
        for (double& c : v) c *= radius / nrm;
        cloud.push_back(std::move(v));
    }
    return cloud;
}

double calibrate_m(const Dynamics& dyn, const std::vector<ControlledPath>& paths,
                   const std::vector<GridRoughPath>& noises, const BoundConstants& k) {
    if (paths.size() != noises.size() || paths.empty()) throw InvalidInput("need matching samples");
    double need = 0.0;
    for (std::size_t s = 0; s < paths.size(); ++s) {
        const auto& rp = noises[s];
        const auto& path = paths[s];
        const std::size_t offset = rp.index_of(path.t0);
        const std::size_t last = offset + path.points() - 1;
        const double lhs = controlled_norm(dyn.model(), path, rp, 0, path.points() - 1).total;
        const double y0 = frac_norm(dyn.model(), path.y[0], dyn.model().alpha);
        const double length = static_cast<double>(path.points() - 1) * rp.dt();
        const auto n = count_in_window(rp, k.eta, k.chi, offset, last);
        const auto hr = holder_report(rp, offset, last);
        const double nt = k.n_tilde_for(length);
        auto rhs = [&](double m) {
            const auto p = p_from_stats(n, hr.seminorm_x, hr.seminorm_xx, nt, m, k.m_tilde);
            return y0 * p.p1 + p.p2;
        };
        double lo = 1e-12, hi = 1.0;
        while (rhs(hi) < lhs) {
            hi *= 2.0;
            if (hi > 1e12) throw NumericalDiagnostic("cannot calibrate M: bound unreachable", path.t0);
        }
        if (rhs(lo) >= lhs) continue;
        for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
            const double mid = std::sqrt(lo * hi);
            (rhs(mid) >= lhs ? hi : lo) = mid;
        }
        need = std::max(need, hi);
    }
    return 1.1 * need;
}

double calibrate_c_i(const Dynamics& dyn, const std::vector<ControlledPath>& paths,
                     const std::vector<GridRoughPath>& noises, const BoundConstants& k, double t) {
    if (paths.size() != noises.size() || paths.empty()) throw InvalidInput("need matching samples");
    // C~_1 is linear in C_I with this slope (base record, beta = 0).
    const double slope = std::exp(k.lambda_a) * std::max(k.l_tilde, k.m_beta / 2.0) * k.c_g;
    double need = 0.0;
    for (std::size_t s = 0; s < paths.size(); ++s) {
        const auto ap = apriori_parts(dyn, paths[s], noises[s], k, t);
        const double excess = ap.lhs - ap.fixed;
        if (excess <= 0.0) continue;
        if (!(slope * ap.noise_sum > 0.0))
            throw NumericalDiagnostic("cannot calibrate C_I: noise term vanishes", t);
        need = std::max(need, excess / (slope * ap.noise_sum));
    }
    return std::max(k.prim.c_i, 1.1 * need);
}

}  // namespace rpde
