#include "rpde/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "rpde/acceptance.hpp"
#include "rpde/csv.hpp"
#include "rpde/errors.hpp"
#include "rpde/greedy.hpp"
#include "rpde/gronwall.hpp"
#include "rpde/parallel.hpp"
#include "rpde/specfun.hpp"

namespace rpde {

namespace {

using csv::num;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& name) {
    std::filesystem::path p(name);
    return p.is_absolute() ? p : base.parent_path() / p;
}

std::string seed_list(const std::vector<std::uint64_t>& seeds) {
    std::string s;
    for (std::size_t i = 0; i < seeds.size(); ++i) s += (i ? "," : "") + std::to_string(seeds[i]);
    return s;
}

void note(std::ostream* log, const std::string& msg) {
    if (log) *log << msg << '\n';
}

ControlledPath head(const ControlledPath& p, std::size_t points) {
    ControlledPath out = p;
    out.y.resize(points);
    out.y_prime.resize(points);
    return out;
}

}  // namespace

Experiment Experiment::load(const std::filesystem::path& path) {
    Experiment ex;
    ex.path = std::filesystem::absolute(path);
    ex.kv = KeyValue::load(ex.path);
    ex.model_kv = KeyValue::load(resolve(ex.path, ex.kv.get_string("model")));
    ex.constants_kv = KeyValue::load(resolve(ex.path, ex.kv.get_string("constants")));
    ex.model = ModelConfig::from_kv(ex.model_kv);
    ex.noise = NoiseConfig::from_kv(ex.kv);
    ex.prim = BoundPrimitives::from_kv(ex.constants_kv);
    if (ex.prim.gamma != ex.noise.gamma)
        throw ConfigError("gamma differs between the experiment and the constants file");
    ex.calibrate = ex.constants_kv.get_int("calibrate", 1) != 0;
    for (long s : parse_int_list(ex.kv.get_string("seeds", "1"))) {
        if (s < 0) throw ConfigError("seeds must be nonnegative");
        ex.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (ex.seeds.empty()) throw ConfigError("seeds must be nonempty");
    ex.hash = [&] {
        char buf[17];
        const auto h = fnv1a(ex.constants_kv.text(), fnv1a(ex.model_kv.text(), fnv1a(ex.kv.text())));
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return std::string(buf);
    }();

    // Derived constants must be reproducible and admissible before any run.
    const Dynamics dyn(ex.model);
    try {
        const auto k = BoundConstants::derive(ex.prim, dyn);
        k.validate();
        const auto bad = k.cross_check(dyn);
        if (!bad.empty()) throw ConfigError("constants cross-check failed for " + bad.front());
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    return ex;
}

std::size_t Experiment::count(const std::string& key, std::size_t fallback) const {
    const long v = kv.get_int(key, static_cast<long>(fallback));
    if (v < 0) throw ConfigError(key + " must be nonnegative");
    return static_cast<std::size_t>(v);
}

std::uint64_t fnv1a(const std::string& text, std::uint64_t h) {
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
    // splitmix64 finalizer over a combined key
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + purpose * 0xBF58476D1CE4E5B9ull + index * 0x94D049BB133111EBull;
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

Sample make_sample(const Experiment& ex, const Dynamics& dyn, std::uint64_t seed, Purpose purpose,
                   long units) {
    const auto p = static_cast<std::uint64_t>(purpose);
    Sample s{make_noise(ex.noise, stream_seed(seed, p, 0), 0, units), {}};
    std::mt19937_64 rng(stream_seed(seed, p, 2));
    const double radius = std::uniform_real_distribution<double>(0.1, 1.0)(rng) * ex.knob("cloud_radius", 2.0);
    const auto y0 = make_cloud(dyn.model(), 1, radius, stream_seed(seed, p, 1)).front();
    s.path = solve_mild(dyn, y0, s.noise, 0, s.noise.points() - 1);
    return s;
}

BoundConstants experiment_constants(const Experiment& ex, const Dynamics& dyn, unsigned jobs,
                                    std::ostream* log) {
    auto k = BoundConstants::derive(ex.prim, dyn);
    if (!ex.calibrate) return k;
    const double t = ex.knob("apriori_t", 2.0);
    const long units = static_cast<long>(std::ceil(t - 1e-12));
    const std::size_t n = ex.count("train_samples", 100);
    if (n == 0) throw ConfigError("train_samples must be positive when calibrating");
    const auto samples = parallel_map(n, jobs, [&](std::size_t i) {
        return make_sample(ex, dyn, i, Purpose::train, units);
    });
    std::vector<ControlledPath> paths, unit_paths;
    std::vector<GridRoughPath> noises;
    for (const auto& s : samples) {
        paths.push_back(s.path);
        unit_paths.push_back(head(s.path, ex.noise.steps_per_unit + 1));
        noises.push_back(s.noise);
    }
    auto prim = ex.prim;
    prim.m_big = calibrate_m(dyn, unit_paths, noises, k);
    k = BoundConstants::derive(prim, dyn);
    prim.c_i = calibrate_c_i(dyn, paths, noises, k, t);
    k = BoundConstants::derive(prim, dyn);
    k.m_calibrated = true;
    k.c_i_calibrated = true;
    note(log, "calibrated on " + std::to_string(n) + " samples: M=" + num(prim.m_big) + " C_I=" + num(prim.c_i));
    return k;
}

BoundConstants with_beta(const BoundConstants& k, const Dynamics& dyn, double beta) {
    auto prim = k.prim;
    prim.beta = beta;
    auto kb = BoundConstants::derive(prim, dyn);
    kb.m_calibrated = k.m_calibrated;
    kb.c_i_calibrated = k.c_i_calibrated;
    return kb;
}

ErgodicReport ergodic_for(const Experiment& ex, std::uint64_t seed, double q, unsigned jobs) {
    const std::size_t n = ex.count("ergodic_samples", 1000);
    const long windows = static_cast<long>(ex.count("ergodic_windows", 1000));
    if (n < 2 || windows < 2) throw ConfigError("ergodic_samples and ergodic_windows must be >= 2");
    const auto p = static_cast<std::uint64_t>(Purpose::ergodic);
    const auto ens = parallel_map(n, jobs, [&](std::size_t i) {
        return make_noise(ex.noise, stream_seed(seed, p, i + 1), 0, 1);
    });
    const auto long_path = make_noise(ex.noise, stream_seed(seed, p, 0), 0, windows);
    return ergodic_moments(ens, long_path, q);
}

GridRoughPath attractor_noise(const Experiment& ex, std::uint64_t seed, long extra_units) {
    const auto t_list = ex.list("t_list", {2, 4, 8, 16});
    const long k = static_cast<long>(ex.count("truncation_k", 40));
    const long left = std::max(k + 1, static_cast<long>(std::ceil(*std::max_element(t_list.begin(), t_list.end()))));
    return make_noise(ex.noise, stream_seed(seed, static_cast<std::uint64_t>(Purpose::attractor)),
                      -left - extra_units, 1);
}

AttractorSeed attractor_seed(const Experiment& ex, const Dynamics& dyn, const BoundConstants& k,
                             std::uint64_t seed, double beta_norm) {
    const auto rp = attractor_noise(ex, seed);
    AttractorSeed out;
    out.seed = seed;
    out.absorb = absorbing_radius(rp, k, ex.count("truncation_k", 40), ex.count("eps_points", 11));
    const auto cloud = make_cloud(dyn.model(), ex.count("cloud_size", 16), ex.knob("cloud_radius", 2.0),
                                  stream_seed(seed, static_cast<std::uint64_t>(Purpose::cloud)));
    out.initial_diameter = cloud_diameter(dyn.model(), cloud);
    out.rows = pullback_estimate(dyn, rp, seed, ex.list("t_list", {2, 4, 8, 16}), cloud, out.absorb.ball,
                                 beta_norm, &out.failures);
    return out;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"lift",   "greedy", "specfun-cert", "gronwall", "solve",
                                                "bounds", "ergodic", "absorb",      "pullback", "accept"};
    return names;
}

namespace {

std::string join_rows(const std::vector<std::string>& parts, const std::string& header) {
    std::string s = header + "\n";
    for (const auto& p : parts) s += p;
    return s;
}

std::string constants_csv(const BoundConstants& k) {
    std::ostringstream os;
    k.dump_csv(os);
    return os.str();
}

RunOutcome cmd_lift(const Experiment& ex, const RunOptions& opt) {
    const long units = static_cast<long>(std::ceil(ex.knob("horizon", 4.0) - 1e-12));
    RunOutcome out;
    const auto results = parallel_map(opt.seeds.size(), opt.jobs, [&](std::size_t i) {
        const auto seed = opt.seeds[i];
        const auto rp = make_noise(ex.noise, stream_seed(seed, static_cast<std::uint64_t>(Purpose::lift)), 0, units);
        const auto hr = holder_report(rp, 0, rp.points() - 1);
        // Chen defect on all triples of the first unit
        const std::size_t m = std::min<std::size_t>(rp.points(), ex.noise.steps_per_unit + 1);
        double defect = 0.0;
        for (std::size_t s = 0; s < m; ++s)
            for (std::size_t u = s; u < m; ++u)
                for (std::size_t t = u; t < m; ++t) {
                    const double d = rp.area(s, t) - rp.area(s, u) - rp.area(u, t) - rp.increment(s, u) * rp.increment(u, t);
                    defect = std::max(defect, std::abs(d) / (1.0 + std::abs(rp.area(s, t))));
                }
        std::ostringstream path_csv;
        write_path_csv(path_csv, rp);
        std::ostringstream row;
        row << seed << ',' << num(hr.seminorm_x) << ',' << num(hr.seminorm_xx) << ',' << num(hr.rho) << ','
            << num(defect) << '\n';
        return std::make_pair(row.str(), path_csv.str());
    });
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < results.size(); ++i) {
        rows.push_back(results[i].first);
        out.files.push_back({"lift_" + std::to_string(opt.seeds[i]) + ".csv", results[i].second});
    }
    out.files.insert(out.files.begin(), {"lift.csv", join_rows(rows, "seed,seminorm_x,seminorm_xx,rho,chen_defect")});
    return out;
}

RunOutcome cmd_greedy(const Experiment& ex, const RunOptions& opt) {
    const long units = static_cast<long>(std::ceil(ex.knob("horizon", 4.0) - 1e-12));
    const std::size_t spu = ex.noise.steps_per_unit;
    const auto rows = parallel_map(opt.seeds.size(), opt.jobs, [&](std::size_t i) {
        const auto seed = opt.seeds[i];
        const auto rp = make_noise(ex.noise, stream_seed(seed, static_cast<std::uint64_t>(Purpose::lift)), 0, units);
        std::ostringstream os;
        for (long u = 0; u < units; ++u) {
            const std::size_t a = static_cast<std::size_t>(u) * spu, b = a + spu;
            const auto gp = greedy_times(rp, ex.prim.eta, ex.prim.chi, a, b);
            os << seed << ',' << num(rp.time(a)) << ',' << num(rp.time(b)) << ',' << gp.count << ','
               << num(control_w(rp, ex.prim.eta, a, b)) << ',' << num(ex.prim.chi) << ',' << num(ex.prim.eta) << '\n';
        }
        return os.str();
    });
    return {{{"greedy.csv", join_rows(rows, "seed,a,b,N,W,chi,eta")}}, false};
}

RunOutcome cmd_specfun(const Experiment& ex, const RunOptions& opt) {
    const double order = 1.0 - ex.model.drift.sigma_f;
    auto betas = ex.list("cert_betas", {0.25, 0.5, 0.75, 1.0});
    if (std::find(betas.begin(), betas.end(), order) == betas.end()) betas.insert(betas.begin(), order);
    std::mt19937_64 rng(stream_seed(opt.seeds.front(), static_cast<std::uint64_t>(Purpose::specfun)));
    std::vector<std::string> rows;
    for (double b : betas) {
        const auto cert = certify_ml_bound(b, ex.prim.z_min, ex.prim.z_max);
        std::uniform_real_distribution<double> u(cert.z_min, cert.z_max);
        std::vector<double> zs(2000);
        for (double& z : zs) z = u(rng);
        const bool ok = verify_ml_bound(cert, zs.data(), static_cast<int>(zs.size()));
        rows.push_back(num(b) + ',' + num(cert.z_min) + ',' + num(cert.z_max) + ',' + num(cert.m_beta) + ',' +
                       num(mittag_leffler(b, 1.0, cert.z_min)) + ',' + (ok ? "1" : "0") + '\n');
    }
    return {{{"specfun.csv", join_rows(rows, "beta,z_min,z_max,m_beta,ml_at_z_min,verified")}}, false};
}

RunOutcome cmd_gronwall(const Experiment& ex, const RunOptions&) {
    const Dynamics dyn(ex.model);
    const auto k = BoundConstants::derive(ex.prim, dyn);
    const double beta = ex.knob("gronwall_beta", 1.0 - k.sigma_f);
    const double m = ex.knob("gronwall_m", k.c_sigma_f * k.c_f);
    const double horizon = ex.knob("gronwall_t", 2.0);
    const double h0 = ex.knob("gronwall_h", 1.0);
    const std::size_t steps = ex.count("gronwall_steps", 200);
    if (steps == 0 || !(horizon > 0.0)) throw ConfigError("gronwall_t and gronwall_steps must be positive");
    BoundCurve h;
    for (std::size_t i = 0; i <= steps; ++i) {
        h.times.push_back(horizon * static_cast<double>(i) / static_cast<double>(steps));
        h.values.push_back(h0);
    }
    const auto b = singular_gronwall(h, m, beta);
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < b.times.size(); ++i) rows.push_back(num(b.times[i]) + ',' + num(b.values[i]) + '\n');
    return {{{"gronwall.csv", join_rows(rows, "t,bound")}}, false};
}

RunOutcome cmd_solve(const Experiment& ex, const RunOptions& opt) {
    const Dynamics dyn(ex.model);
    const double horizon = ex.knob("horizon", 4.0);
    const long units = static_cast<long>(std::ceil(horizon - 1e-12));
    const std::size_t sub = std::max<std::size_t>(1, ex.count("substeps", 1));
    const auto files = parallel_map(opt.seeds.size(), opt.jobs, [&](std::size_t i) {
        const auto seed = opt.seeds[i];
        const auto rp = make_noise(ex.noise, stream_seed(seed, static_cast<std::uint64_t>(Purpose::solve)), 0, units);
        const auto y0 = make_cloud(dyn.model(), 1, ex.knob("cloud_radius", 2.0),
                                   stream_seed(seed, static_cast<std::uint64_t>(Purpose::cloud))).front();
        const auto path = solve_over(dyn, y0, rp, horizon, sub);
        std::ostringstream os;
        write_trajectory_csv(os, dyn.model(), path);
        return OutputFile{"trajectory_" + std::to_string(seed) + ".csv", os.str()};
    });
    return {files, false};
}

RunOutcome cmd_bounds(const Experiment& ex, const RunOptions& opt) {
    const Dynamics dyn(ex.model);
    const auto k = experiment_constants(ex, dyn, opt.jobs, opt.log);
    const double t = ex.knob("apriori_t", 2.0);
    const long units = static_cast<long>(std::ceil(t - 1e-12));
    const std::size_t spu = ex.noise.steps_per_unit;
    const auto rows = parallel_map(opt.seeds.size(), opt.jobs, [&](std::size_t i) {
        const auto s = make_sample(ex, dyn, opt.seeds[i], Purpose::validate, units);
        const auto sol = check_solution_bound(dyn, s.path, s.noise, k, 0, spu);
        const auto apr = apriori_bound(dyn, s.path, s.noise, k, t);
        std::ostringstream os;
        for (const auto& [name, b] : {std::pair{"solution", sol}, std::pair{"apriori", apr}})
            os << opt.seeds[i] << ',' << name << ',' << num(b.lhs) << ',' << num(b.rhs) << ',' << num(b.margin) << ','
               << (b.pass ? 1 : 0) << '\n';
        return os.str();
    });
    return {{{"bounds.csv", join_rows(rows, "seed,check,lhs,rhs,margin,pass")}, {"constants.csv", constants_csv(k)}},
            false};
}

RunOutcome cmd_ergodic(const Experiment& ex, const RunOptions& opt) {
    const Dynamics dyn(ex.model);
    const auto k = experiment_constants(ex, dyn, opt.jobs, opt.log);
    const double q = ex.knob("q", k.q_moment);
    std::vector<std::string> rows;
    for (auto seed : opt.seeds) {
        const auto r = ergodic_for(ex, seed, q, opt.jobs);
        const auto g = check_gap_condition(k, r);
        std::ostringstream os;
        os << seed << ',' << num(r.q) << ',' << r.n_samples << ',' << num(r.k_q) << ',' << num(r.kk_q) << ','
           << num(r.k_bold) << ',' << num(r.std_err) << ',' << r.n_windows << ',' << num(r.time_k_bold) << ','
           << num(r.time_std_err) << ',' << (r.agree ? 1 : 0) << ',' << num(g.lhs) << ',' << num(g.rhs) << ','
           << (g.pass ? 1 : 0) << '\n';
        rows.push_back(os.str());
    }
    return {{{"ergodic.csv", join_rows(rows, "seed,q,n_samples,k_q,kk_q,k_bold,std_err,n_windows,time_k_bold,"
                                             "time_std_err,agree,gap_lhs,gap_rhs,gap_pass")},
             {"constants.csv", constants_csv(k)}},
            false};
}

RunOutcome cmd_absorb(const Experiment& ex, const RunOptions& opt) {
    const Dynamics dyn(ex.model);
    const auto k = experiment_constants(ex, dyn, opt.jobs, opt.log);
    const std::size_t kk = ex.count("truncation_k", 40), eps = ex.count("eps_points", 11);
    const std::size_t shifts = ex.count("tempered_shifts", 8);
    const auto results = parallel_map(opt.seeds.size(), opt.jobs, [&](std::size_t i) {
        const auto seed = opt.seeds[i];
        const auto rp = attractor_noise(ex, seed, static_cast<long>(shifts));
        const long left = static_cast<long>(kk) + 1;
        std::vector<double> radii;
        std::ostringstream trow;
        AbsorbReport base;
        for (std::size_t s = 0; s <= shifts; ++s) {
            // theta_{-s} omega on the window [-K-1, 1]
            const double sh = static_cast<double>(s);
            const auto w = rp.slice(rp.index_of(-static_cast<double>(left) - sh), rp.index_of(1.0 - sh),
                                    -static_cast<double>(left));
            const auto rep = absorbing_radius(w, k, kk, eps);
            if (s == 0) base = rep;
            radii.push_back(rep.radius);
            trow << seed << ',' << s << ',' << num(rep.radius) << '\n';
        }
        std::ostringstream row;
        row << seed << ',' << num(base.radius) << ',' << num(base.ball) << ',' << num(base.r_series) << ','
            << num(base.tail) << ',' << num(base.rate) << ',' << num(base.p1_val) << ',' << num(base.p2_val) << ','
            << num(shifts > 0 ? tempered_slope(radii) : std::nan("")) << '\n';
        return std::make_pair(row.str(), trow.str());
    });
    std::vector<std::string> rows, trows;
    for (const auto& [a, b] : results) {
        rows.push_back(a);
        trows.push_back(b);
    }
    return {{{"absorb.csv", join_rows(rows, "seed,radius,ball,r_series,tail,rate,p1,p2,tempered_slope")},
             {"tempered.csv", join_rows(trows, "seed,shift,radius")},
             {"constants.csv", constants_csv(k)}},
            false};
}

RunOutcome cmd_pullback(const Experiment& ex, const RunOptions& opt) {
    const Dynamics dyn(ex.model);
    const auto k = experiment_constants(ex, dyn, opt.jobs, opt.log);
    const double beta_norm = ex.knob("beta_norm", 0.0);
    const auto results = parallel_map(opt.seeds.size(), opt.jobs, [&](std::size_t i) {
        return attractor_seed(ex, dyn, k, opt.seeds[i], beta_norm);
    });
    std::vector<std::string> rows, norms;
    for (const auto& r : results) {
        std::ostringstream os, ns;
        for (const auto& row : r.rows) {
            os << row.seed << ',' << num(row.t) << ',' << num(row.diameter) << ',' << num(row.semidistance) << ','
               << num(row.radius) << ',' << (row.accepted ? 1 : 0) << '\n';
            ns << row.seed << ',' << num(row.t) << ',' << num(row.max_norm) << ',' << num(row.max_norm_beta) << ','
               << r.failures << '\n';
        }
        rows.push_back(os.str());
        norms.push_back(ns.str());
    }
    return {{{"pullback.csv", join_rows(rows, "seed,t,diameter,semidistance,radius,accepted")},
             {"pullback_norms.csv", join_rows(norms, "seed,t,max_norm,max_norm_beta,failures")},
             {"constants.csv", constants_csv(k)}},
            false};
}

}  // namespace

RunOutcome run_command(const std::string& command, const Experiment& ex, const RunOptions& opt) {
    if (opt.seeds.empty()) throw ConfigError("seeds must be nonempty");
    if (command == "lift") return cmd_lift(ex, opt);
    if (command == "greedy") return cmd_greedy(ex, opt);
    if (command == "specfun-cert") return cmd_specfun(ex, opt);
    if (command == "gronwall") return cmd_gronwall(ex, opt);
    if (command == "solve") return cmd_solve(ex, opt);
    if (command == "bounds") return cmd_bounds(ex, opt);
    if (command == "ergodic") return cmd_ergodic(ex, opt);
    if (command == "absorb") return cmd_absorb(ex, opt);
    if (command == "pullback") return cmd_pullback(ex, opt);
    if (command == "accept") return run_acceptance_command(ex, opt);
    throw ConfigError("unknown command '" + command + "'");
}

std::string render_manifest(const std::string& command, const Experiment& ex, const RunOptions& opt,
                            double wall_seconds) {
    std::ostringstream os;
    os << "command = " << command << '\n'
       << "config = " << ex.path.string() << '\n'
       << "config_hash = " << ex.hash << '\n'
       << "seeds = " << seed_list(opt.seeds) << '\n'
       << "jobs = " << opt.jobs << '\n'
       << "version = " << kVersion << '\n'
       << "wall_time_s = " << num(wall_seconds) << '\n';
    return os.str();
}

void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files) {
    std::filesystem::create_directories(dir);
    for (const auto& f : files) {
        std::ofstream out(dir / f.name, std::ios::binary);
        out << f.content;
        if (!out) throw ConfigError("cannot write " + (dir / f.name).string());
    }
}

Manifest parse_manifest(const std::filesystem::path& path) {
    const auto kv = KeyValue::load(path);
    Manifest m;
    m.command = kv.get_string("command");
    m.config = kv.get_string("config");
    m.hash = kv.get_string("config_hash");
    for (long s : parse_int_list(kv.get_string("seeds"))) m.seeds.push_back(static_cast<std::uint64_t>(s));
    m.jobs = static_cast<unsigned>(std::max(1L, kv.get_int("jobs", 1)));
    return m;
}

}  // namespace rpde
