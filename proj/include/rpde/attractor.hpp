#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rpde/roughpath.hpp"
#include "rpde/solver.hpp"
#include "rpde/spectral.hpp"

namespace rpde {

class KeyValue;

/// Noise law used by every ensemble: X = noise_scale * fBm(hurst), canonically lifted.
struct NoiseConfig {
    double hurst = 0.5;
    double gamma = 0.4;
    double noise_scale = 1.0;
    std::size_t steps_per_unit = 64;

    static NoiseConfig from_kv(const KeyValue& kv);
    double dt() const { return 1.0 / static_cast<double>(steps_per_unit); }
};

/// Lifted noise on [t_start, t_end] (integer times), deterministic in seed.
GridRoughPath make_noise(const NoiseConfig& cfg, std::uint64_t seed, long t_start, long t_end);

/// Constants that the theory leaves unspecified and that the run fixes (or calibrates).
struct BoundPrimitives {
    double gamma = 0.4;
    double eta = 0.1;
    double chi = 0.05;
    double m_tilde = 1e-4;
    double m_big = 1.0;
    double c_i = 1.0;
    double delta_bar = 1.0;
    double z_min = 2.0;
    double z_max = 60.0;
    double beta = 0.0;  // regularity shift; 0 for the base estimates

    static BoundPrimitives from_kv(const KeyValue& kv);
};

enum class Provenance { primitive, derived, calibrated };

/// Every named constant of the bound pipeline in one record.
struct BoundConstants {
    BoundPrimitives prim;
    double gamma = 0, eta = 0, chi = 0;
    double sigma_f = 0, sigma_g = 0;
    double c_f = 0, c_g = 0;
    double lambda_a = 0;
    double lambda_tilde = 0;
    double m_tilde = 0, m_big = 0;
    double d_step = 0;
    double n_tilde = 0;  // for unit intervals
    double c_sigma_f = 0;  // C_{-sigma_F} (C_{-sigma_F-beta} when beta > 0)
    double c_beta = 1;     // C_{-beta}
    double big_l = 0;
    double z_min = 0, t0 = 0;
    double m_beta = 0;
    double ml_at_zmin = 0;
    double l_tilde = 0;
    double lambda = 0;
    double c_i = 0, c_1 = 0, c_2 = 0;
    double c_tilde_1 = 0, c_tilde_2 = 0, c_tilde_a = 0;
    double c_of_n = 0;
    double c_const = 0;
    double q_moment = 0;
    double delta_bar = 0;
    double beta = 0;
    bool m_calibrated = false;
    bool c_i_calibrated = false;

    /// Recompute every derived field from primitives and the model. beta > 0 gives
    /// the regularity-shifted record (smoothing C_{-sigma_F-beta}, order 1-sigma_F-beta).
    static BoundConstants derive(const BoundPrimitives& prim, const Dynamics& dyn);

    /// Throws ConfigError on violated preconditions (e^{M~} chi^{gamma-eta} <= 1/2,
    /// eta in (sigma_G, gamma), lambda > 0, regularity range of beta).
    void validate() const;

    /// Re-derive and compare field by field; returns the names that disagree.
    std::vector<std::string> cross_check(const Dynamics& dyn) const;

    /// Greedy-step count bound N~ = ceil(length / d).
    double n_tilde_for(double length) const;

    /// CSV `name,value,provenance`.
    void dump_csv(std::ostream& out) const;
};

/// P(x, y) = 1 + x + y + x (x^2 + y).
double p_poly(double x, double y);

struct PConstants {
    std::size_t n_greedy = 0;
    double n_tilde = 0;
    double holder_x = 0, holder_xx = 0, rho = 0;
    double p_tilde = 0, p1 = 0, p2 = 0;
};

/// P~, P1, P2 on rp indices [first, last].
PConstants eval_p_constants(const GridRoughPath& rp, const BoundConstants& k, std::size_t first,
                            std::size_t last);

struct BoundCheck {
    double lhs = 0;
    double rhs = 0;
    double margin = 0;  // rhs - lhs
    bool pass = false;
};

/// ||y,y'||_D on [first,last] <= ||y_first|| P1 + P2. Indices are rp indices; the
/// path must start on rp's grid at or before `first`.
BoundCheck check_solution_bound(const Dynamics& dyn, const ControlledPath& path,
                                const GridRoughPath& rp, const BoundConstants& k,
                                std::size_t first, std::size_t last);

/// Per-unit-window data along a solved path: rho^2 and the controlled norm on [l, l+1].
struct UnitWindowData {
    std::vector<double> rho;
    std::vector<double> sol_norm;
    std::vector<double> start_norm;  // ||y_l||_alpha
};
UnitWindowData unit_windows(const Dynamics& dyn, const ControlledPath& path, const GridRoughPath& rp,
                            std::size_t units);

/// ||y_t|| e^{lambda t} <= C~_A ||y_0|| + C~_2 e^{lambda t} + C~_1 C_G sum_{l<=n} e^{lambda l} P3_l.
/// t counts units from the path start; at integer t the sum stops at n = t - 1.
BoundCheck apriori_bound(const Dynamics& dyn, const ControlledPath& path, const GridRoughPath& rp,
                         const BoundConstants& k, double t);

struct HValues {
    double h1 = 0;
    double h2 = 0;
};
HValues eval_h(const GridRoughPath& rp, const BoundConstants& k, std::size_t first, std::size_t last);

/// Chained discrete bound for ||y_n|| at integer n (path starting at unit 0).
BoundCheck chain_bound(const Dynamics& dyn, const ControlledPath& path, const GridRoughPath& rp,
                       const BoundConstants& k, std::size_t n);

struct ErgodicReport {
    double q = 0;
    std::size_t n_samples = 0;
    double k_q = 0, kk_q = 0, k_bold = 0, std_err = 0;  // ensemble estimate
    std::size_t n_windows = 0;
    double time_k_bold = 0, time_std_err = 0;            // shifted unit windows
    bool agree = false;                                  // within 3 combined std errors
};

/// Largest q for which s_max^q over n samples stays far from overflow.
double max_safe_moment(double s_max, std::size_t n);

/// K_q, KK_q from the first unit window of each ensemble member, and the time average
/// over the consecutive unit windows of `long_path`. Throws RangeError when q is unsafe.
ErgodicReport ergodic_moments(const std::vector<GridRoughPath>& ensemble,
                              const GridRoughPath& long_path, double q);

struct GapReport {
    double lhs = 0;  // lambda_A - L
    double rhs = 0;  // c (K_q + 1)
    double margin = 0;
    bool pass = false;
};
/// Evaluated with the record's own L and c; pass a beta-shifted record for the
/// regularity variant (derive rejects beta outside (0, min{1-sigma_F, gamma-sigma_G})).
GapReport check_gap_condition(const BoundConstants& k, const ErgodicReport& ergodic);

struct AbsorbReport {
    double radius = 0;      // R(omega) = 1 + P1 (r + tail) + P2
    double ball = 0;        // radius + delta_bar
    double r_series = 0;
    double tail = 0;
    double rate = 0;        // empirical geometric ratio of the terms
    std::vector<double> series_terms;
    std::size_t truncation_k = 0;
    double p1_val = 0, p2_val = 0;
    bool accepted = false;  // filled by callers comparing trajectory norms
};

/// rp must cover [-truncation_k - 1, 1] with integer-aligned grid (t0 = -truncation_k - 1).
/// Throws NumericalDiagnostic when the terms do not decay geometrically.
AbsorbReport absorbing_radius(const GridRoughPath& rp, const BoundConstants& k,
                              std::size_t truncation_k, std::size_t eps_points = 11);

/// Slope of log+ R(theta_{-k} omega) against k; near zero for tempered radii.
double tempered_slope(const std::vector<double>& radii);

struct PullbackRow {
    std::uint64_t seed = 0;
    double t = 0;
    double diameter = 0;
    double semidistance = 0;  // nan for the first t
    double radius = 0;        // nan when not requested
    bool accepted = false;
    double max_norm = 0;
    double max_norm_beta = 0;
    std::vector<std::vector<double>> cloud;
};

/// d(A, B) = max_{a in A} min_{b in B} ||a - b||_alpha.
double hausdorff_semidistance(const SpectralModel& model, const std::vector<std::vector<double>>& a,
                              const std::vector<std::vector<double>>& b);
double cloud_diameter(const SpectralModel& model, const std::vector<std::vector<double>>& cloud);

/// Evolve the cloud as phi(t, theta_{-t} omega, .) for each t in t_list, using noise
/// on [-t, 0] taken from rp (which must contain [-max t, 0]). `ball` <= 0 skips acceptance.
/// Trajectories that blow up are dropped from the cloud and counted in `failures`.
std::vector<PullbackRow> pullback_estimate(const Dynamics& dyn, const GridRoughPath& rp,
                                           std::uint64_t seed, const std::vector<double>& t_list,
                                           const std::vector<std::vector<double>>& cloud,
                                           double ball, double beta_norm, std::size_t* failures);

/// Deterministic cloud of `count` random states, each of alpha-norm `radius`.
std::vector<std::vector<double>> make_cloud(const SpectralModel& model, std::size_t count,
                                            double radius, std::uint64_t seed);

/// Smallest M (times 1.1) with the solution bound holding on every sample; the
/// samples are (path, noise) pairs solved on [0,1].
double calibrate_m(const Dynamics& dyn, const std::vector<ControlledPath>& paths,
                   const std::vector<GridRoughPath>& noises, const BoundConstants& k);

/// Smallest C_I (times 1.1, at least the configured floor) with the a-priori bound
/// holding at time t on every sample.
double calibrate_c_i(const Dynamics& dyn, const std::vector<ControlledPath>& paths,
                     const std::vector<GridRoughPath>& noises, const BoundConstants& k, double t);

}  // namespace rpde
