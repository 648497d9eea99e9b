#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace rpde {

class KeyValue;

/// Diagonal realization of A = Delta_D - lambda_A on (0,1) in the sine basis:
/// mode k has rate mu_k = k^2 pi^2 + lambda_A. Only the truncation is represented.
struct SpectralModel {
    std::size_t n_modes = 0;
    double lambda_a = 0.0;
    double alpha = 0.0;
    std::vector<double> mu;

    static SpectralModel dirichlet(std::size_t n_modes, double lambda_a, double alpha);
    /// Arbitrary strictly increasing rates with mu_1 >= lambda_a > 0.
    static SpectralModel from_rates(std::vector<double> mu, double lambda_a, double alpha);

    double lambda_tilde() const { return mu.front(); }
};

struct SpectralState {
    std::vector<double> coeffs;
    double alpha = 0.0;
};

double frac_norm(const SpectralModel& model, const SpectralState& state, double alpha);
double frac_norm(const SpectralModel& model, const std::vector<double>& coeffs, double alpha);

SpectralState semigroup_apply(const SpectralModel& model, double t, const SpectralState& state);

/// C_{-sigma}: sup_{u>0} u^sigma exp(-(1 - lambda/mu_1) u), the smoothing constant
/// of the diagonal semigroup at decay rate lambda < mu_1 (closed form at u = sigma/(1-lambda/mu_1)).
double smoothing_constant(const SpectralModel& model, double sigma, double lambda);

/// Drift F: E_alpha -> E_{alpha-sigma_F}.
///   tanh: F(x)_k = c_F mu_k^{sigma_F} tanh(x_k) + forcing * c_F mu_1^{sigma_F-alpha} [k = 1]
/// which is Lipschitz with constant c_F and has ||F(0)||_{alpha-sigma_F} = |forcing| c_F <= c_F.
struct DriftConfig {
    enum class Kind { zero, tanh };
    Kind kind = Kind::zero;
    double c_f = 0.0;
    double sigma_f = 0.0;
    double forcing = 0.0;
};

std::vector<double> apply_F(const SpectralModel& model, const DriftConfig& cfg,
                            const std::vector<double>& x);

struct DiffusionConfig {
    enum class Kind { zero, linear, integral };
    enum class Kernel { sine, tanh, cubic };
    Kind kind = Kind::zero;
    double c_g = 0.0;
    double sigma_g = 0.0;
    Kernel kernel = Kernel::sine;
    std::size_t quad_points = 0;  // 0: 4 n_modes + 16
};

/// Diffusion G with its Frechet derivatives in the truncated basis.
///   linear:   G(x)_k = c_G (k^2 pi^2)^{sigma_G} x_k
///   integral: G(u) = c_G int_0^1 psi(.) s(u(x)) dx, psi = sum_k k^{-2} e_k / ||.||,
///             s in {sin, tanh}; cubic kernels are rejected (unbounded derivatives).
class Diffusion {
public:
    Diffusion(const SpectralModel& model, const DiffusionConfig& cfg);

    const DiffusionConfig& config() const noexcept { return cfg_; }
    bool is_zero() const noexcept { return cfg_.kind == DiffusionConfig::Kind::zero || cfg_.c_g == 0.0; }

    std::vector<double> apply(const std::vector<double>& x) const;
    std::vector<double> derivative(const std::vector<double>& x, const std::vector<double>& h) const;
    std::vector<double> second_derivative(const std::vector<double>& x, const std::vector<double>& h1,
                                          const std::vector<double>& h2) const;
    std::vector<double> third_derivative(const std::vector<double>& x, const std::vector<double>& h1,
                                         const std::vector<double>& h2,
                                         const std::vector<double>& h3) const;
    /// Gubinelli derivative of G(y): DG(y) G(y).
    std::vector<double> gubinelli(const std::vector<double>& x) const;

    /// Bound on the derivative norms E_{alpha-v} -> E_{alpha-v-sigma_G}, v in {0, gamma, 2 gamma}.
    /// Exact (= c_G) for the linear kind; truncation-dependent for the integral kind.
    double bound_constant(double gamma) const;

private:
    std::vector<double> field(const std::vector<double>& coeffs) const;  // values at quad nodes
    std::vector<double> project(double scalar) const;                    // scalar * c_G * psi

    SpectralModel model_;
    DiffusionConfig cfg_;
    std::vector<double> linear_scale_;
    std::vector<double> psi_;
    std::vector<double> basis_;  // quad_points x n_modes, row-major
    std::size_t q_ = 0;
};

/// Model description from a `key = value` file:
/// n_modes, lambda_a, alpha, sigma_f, sigma_g, c_f, c_g, g_kind, f_kind, f_forcing, g_kernel.
struct ModelConfig {
    SpectralModel model;
    DriftConfig drift;
    DiffusionConfig diffusion;

    static ModelConfig from_kv(const KeyValue& kv);
};

}  // namespace rpde
