#include "rpde/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rpde/errors.hpp"
#include "rpde/kvconfig.hpp"

namespace rpde {

namespace {

void check_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(name) + " must be finite");
}

}  // namespace

SpectralModel SpectralModel::dirichlet(std::size_t n_modes, double lambda_a, double alpha) {
    if (n_modes == 0) throw InvalidInput("n_modes must be positive");
    std::vector<double> mu(n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
        const double kk = static_cast<double>(k + 1) * std::numbers::pi;
        mu[k] = kk * kk + lambda_a;
    }
    return from_rates(std::move(mu), lambda_a, alpha);
}

SpectralModel SpectralModel::from_rates(std::vector<double> mu, double lambda_a, double alpha) {
    check_finite(lambda_a, "lambda_a");
    check_finite(alpha, "alpha");
    if (mu.empty()) throw InvalidInput("spectral model needs at least one mode");
    if (!(lambda_a > 0.0)) throw InvalidInput("lambda_a must be positive");
    if (!(mu.front() >= lambda_a)) throw InvalidInput("mu_1 must be >= lambda_a");
    for (std::size_t k = 1; k < mu.size(); ++k)
        if (!(mu[k] > mu[k - 1])) throw InvalidInput("rates must be strictly increasing");
    SpectralModel m;
    m.n_modes = mu.size();
    m.lambda_a = lambda_a;
    m.alpha = alpha;
    m.mu = std::move(mu);
    return m;
}

double frac_norm(const SpectralModel& model, const std::vector<double>& coeffs, double alpha) {
    if (coeffs.size() != model.n_modes) throw InvalidInput("state dimension does not match model");
    double acc = 0.0;
    if (alpha == 0.0) {
        for (double c : coeffs) acc += c * c;
    } else {
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            const double w = std::pow(model.mu[k], alpha) * coeffs[k];
            acc += w * w;
        }
    }
    return std::sqrt(acc);
}

double frac_norm(const SpectralModel& model, const SpectralState& state, double alpha) {
    return frac_norm(model, state.coeffs, alpha);
}

SpectralState semigroup_apply(const SpectralModel& model, double t, const SpectralState& state) {
    if (!(t >= 0.0)) throw InvalidInput("semigroup time must be nonnegative");
    if (state.coeffs.size() != model.n_modes)
        throw InvalidInput("state dimension does not match model");
    SpectralState out = state;
    for (std::size_t k = 0; k < model.n_modes; ++k) out.coeffs[k] *= std::exp(-model.mu[k] * t);
    return out;
}

double smoothing_constant(const SpectralModel& model, double sigma, double lambda) {
    if (!(sigma >= 0.0)) throw InvalidInput("smoothing order must be nonnegative");
    if (!(lambda < model.mu.front())) throw InvalidInput("decay rate must stay below mu_1");
    if (sigma == 0.0) return 1.0;
    // Per mode: (mu_k t)^sigma exp(-(1 - lambda/mu_k) mu_k t); the slowest decay factor
    // over k is 1 - lambda/mu_1 when lambda >= 0, and 1 otherwise.
    const double a = lambda >= 0.0 ? 1.0 - lambda / model.mu.front() : 1.0;
    return std::pow(sigma / a, sigma) * std::exp(-sigma);
}

std::vector<double> apply_F(const SpectralModel& model, const DriftConfig& cfg,
                            const std::vector<double>& x) {
    if (x.size() != model.n_modes) throw InvalidInput("state dimension does not match model");
    std::vector<double> out(model.n_modes, 0.0);
    if (cfg.kind == DriftConfig::Kind::zero || cfg.c_f == 0.0) return out;
    for (std::size_t k = 0; k < model.n_modes; ++k)
        out[k] = cfg.c_f * std::pow(model.mu[k], cfg.sigma_f) * std::tanh(x[k]);
    out[0] += cfg.forcing * cfg.c_f * std::pow(model.mu[0], cfg.sigma_f - model.alpha);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct KernelDerivs {
    double d0, d1, d2, d3;
};

KernelDerivs kernel_at(DiffusionConfig::Kernel kernel, double u) {
    if (kernel == DiffusionConfig::Kernel::sine) {
        const double s = std::sin(u), c = std::cos(u);
        return {s, c, -s, -c};
    }
    const double t = std::tanh(u);
    const double sech2 = 1.0 - t * t;
    return {t, sech2, -2.0 * t * sech2, sech2 * (6.0 * t * t - 2.0)};
}

}  // namespace

Diffusion::Diffusion(const SpectralModel& model, const DiffusionConfig& cfg)
    : model_(model), cfg_(cfg) {
    if (!(cfg.c_g >= 0.0) || !std::isfinite(cfg.c_g)) throw ConfigError("c_g must be finite and >= 0");
    if (!(cfg.sigma_g >= 0.0)) throw ConfigError("sigma_g must be >= 0");
    const std::size_t n = model.n_modes;
    if (cfg.kind == DiffusionConfig::Kind::linear) {
        linear_scale_.resize(n);
        for (std::size_t k = 0; k < n; ++k)
            linear_scale_[k] = cfg.c_g * std::pow(model.mu[k] - model.lambda_a, cfg.sigma_g);
    } else if (cfg.kind == DiffusionConfig::Kind::integral) {
        if (cfg.kernel == DiffusionConfig::Kernel::cubic)
            throw ConfigError("integral kernel 'cubic' has unbounded derivatives; use sine or tanh");
        q_ = cfg.quad_points ? cfg.quad_points : 4 * n + 16;
        psi_.resize(n);
        double nrm = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double kk = static_cast<double>(k + 1);
            psi_[k] = 1.0 / (kk * kk);
            nrm += psi_[k] * psi_[k];
        }
        nrm = std::sqrt(nrm);
        for (double& p : psi_) p /= nrm;
        basis_.resize(q_ * n);
        for (std::size_t q = 0; q < q_; ++q) {
            const double xq = (static_cast<double>(q) + 0.5) / static_cast<double>(q_);
            for (std::size_t k = 0; k < n; ++k)
                basis_[q * n + k] =
                    std::numbers::sqrt2 * std::sin(static_cast<double>(k + 1) * std::numbers::pi * xq);
        }
    }
}

std::vector<double> Diffusion::field(const std::vector<double>& coeffs) const {
    const std::size_t n = model_.n_modes;
    std::vector<double> u(q_, 0.0);
    for (std::size_t q = 0; q < q_; ++q) {
        const double* row = &basis_[q * n];
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += row[k] * coeffs[k];
        u[q] = acc;
    }
    return u;
}

std::vector<double> Diffusion::project(double scalar) const {
    std::vector<double> out(psi_.size());
    for (std::size_t k = 0; k < psi_.size(); ++k) out[k] = cfg_.c_g * scalar * psi_[k];
    return out;
}

std::vector<double> Diffusion::apply(const std::vector<double>& x) const {
    if (x.size() != model_.n_modes) throw InvalidInput("state dimension does not match model");
    switch (cfg_.kind) {
        case DiffusionConfig::Kind::zero:
            return std::vector<double>(x.size(), 0.0);
        case DiffusionConfig::Kind::linear: {
            std::vector<double> out(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) out[k] = linear_scale_[k] * x[k];
            return out;
        }
        case DiffusionConfig::Kind::integral: {
            const auto u = field(x);
            double s = 0.0;
            for (double v : u) s += kernel_at(cfg_.kernel, v).d0;
            return project(s / static_cast<double>(q_));
        }
    }
    return {};
}

std::vector<double> Diffusion::derivative(const std::vector<double>& x,
                                          const std::vector<double>& h) const {
    if (x.size() != model_.n_modes || h.size() != model_.n_modes)
        throw InvalidInput("state dimension does not match model");
    switch (cfg_.kind) {
        case DiffusionConfig::Kind::zero:
            return std::vector<double>(x.size(), 0.0);
        case DiffusionConfig::Kind::linear:
            return apply(h);
        case DiffusionConfig::Kind::integral: {
            const auto u = field(x);
            const auto hv = field(h);
            double s = 0.0;
            for (std::size_t q = 0; q < q_; ++q) s += kernel_at(cfg_.kernel, u[q]).d1 * hv[q];
            return project(s / static_cast<double>(q_));
        }
    }
    return {};
}

std::vector<double> Diffusion::second_derivative(const std::vector<double>& x,
                                                 const std::vector<double>& h1,
                                                 const std::vector<double>& h2) const {
    if (cfg_.kind != DiffusionConfig::Kind::integral) return std::vector<double>(x.size(), 0.0);
    const auto u = field(x);
    const auto a = field(h1);
    const auto b = field(h2);
    double s = 0.0;
    for (std::size_t q = 0; q < q_; ++q) s += kernel_at(cfg_.kernel, u[q]).d2 * a[q] * b[q];
    return project(s / static_cast<double>(q_));
}

std::vector<double> Diffusion::third_derivative(const std::vector<double>& x,
                                                const std::vector<double>& h1,
                                                const std::vector<double>& h2,
                                                const std::vector<double>& h3) const {
    if (cfg_.kind != DiffusionConfig::Kind::integral) return std::vector<double>(x.size(), 0.0);
    const auto u = field(x);
    const auto a = field(h1);
    const auto b = field(h2);
    const auto c = field(h3);
    double s = 0.0;
    for (std::size_t q = 0; q < q_; ++q) s += kernel_at(cfg_.kernel, u[q]).d3 * a[q] * b[q] * c[q];
    return project(s / static_cast<double>(q_));
}

std::vector<double> Diffusion::gubinelli(const std::vector<double>& x) const {
    return derivative(x, apply(x));
}

double Diffusion::bound_constant(double gamma) const {
    if (is_zero()) return 0.0;
    if (cfg_.kind == DiffusionConfig::Kind::linear) return cfg_.c_g;
    // |h(x)| <= sqrt2 sum|h_k| <= sqrt2 (sum mu_k^{-2 a})^{1/2} ||h||_a, and the kernel
    // derivatives are bounded by one, so each derivative order costs one factor K_v.
    double best = 0.0;
    for (double v : {0.0, gamma, 2.0 * gamma}) {
        const double a = model_.alpha - v;
        double acc = 0.0;
        for (double m : model_.mu) acc += std::pow(m, -2.0 * a);
        const double kv = std::numbers::sqrt2 * std::sqrt(acc);
        const double psi_norm = frac_norm(model_, psi_, a - cfg_.sigma_g);
        const double tanh_d2 = cfg_.kernel == DiffusionConfig::Kernel::tanh ? 0.77 : 1.0;
        const double worst = std::max({1.0, kv, tanh_d2 * kv * kv, 2.0 * kv * kv * kv});
        best = std::max(best, cfg_.c_g * psi_norm * worst);
    }
    return best;
}

ModelConfig ModelConfig::from_kv(const KeyValue& kv) {
    ModelConfig mc;
    const long n = kv.get_int("n_modes", 64);
    if (n <= 0) throw ConfigError("n_modes must be positive");
    const double lambda_a = kv.get_double("lambda_a");
    const double alpha = kv.get_double("alpha", 0.0);
    try {
        mc.model = SpectralModel::dirichlet(static_cast<std::size_t>(n), lambda_a, alpha);
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }

    const auto f_kind = kv.get_string("f_kind", kv.has("c_f") ? "tanh" : "zero");
    if (f_kind == "zero") {
        mc.drift.kind = DriftConfig::Kind::zero;
    } else if (f_kind == "tanh") {
        mc.drift.kind = DriftConfig::Kind::tanh;
    } else {
        throw ConfigError("f_kind must be zero|tanh, got '" + f_kind + "'");
    }
    mc.drift.c_f = kv.get_double("c_f", 0.0);
    mc.drift.sigma_f = kv.get_double("sigma_f", 0.0);
    mc.drift.forcing = kv.get_double("f_forcing", 0.0);
    if (!(mc.drift.c_f >= 0.0)) throw ConfigError("c_f must be >= 0");
    if (!(mc.drift.sigma_f >= 0.0 && mc.drift.sigma_f < 1.0))
        throw ConfigError("sigma_f must lie in [0,1)");
    if (!(std::abs(mc.drift.forcing) <= 1.0))
        throw ConfigError("|f_forcing| must be <= 1 so that ||F(0)|| <= C_F");

    const auto g_kind = kv.get_string("g_kind", "zero");
    if (g_kind == "zero") {
        mc.diffusion.kind = DiffusionConfig::Kind::zero;
    } else if (g_kind == "linear") {
        // Unbounded G: admissible under the relaxed hypothesis that only
        // DG(.) o G(.) needs a bounded derivative, which holds for linear maps.
        mc.diffusion.kind = DiffusionConfig::Kind::linear;
    } else if (g_kind == "integral") {
        mc.diffusion.kind = DiffusionConfig::Kind::integral;
    } else {
        throw ConfigError("g_kind must be zero|linear|integral, got '" + g_kind + "'");
    }
    const auto kernel = kv.get_string("g_kernel", "sine");
    if (kernel == "sine") {
        mc.diffusion.kernel = DiffusionConfig::Kernel::sine;
    } else if (kernel == "tanh") {
        mc.diffusion.kernel = DiffusionConfig::Kernel::tanh;
    } else if (kernel == "cubic") {
        mc.diffusion.kernel = DiffusionConfig::Kernel::cubic;
    } else {
        throw ConfigError("g_kernel must be sine|tanh|cubic, got '" + kernel + "'");
    }
    mc.diffusion.c_g = kv.get_double("c_g", 0.0);
    mc.diffusion.sigma_g = kv.get_double("sigma_g", 0.0);
    mc.diffusion.quad_points = static_cast<std::size_t>(std::max(0L, kv.get_int("g_quad_points", 0)));
    // Constructing the operator runs the remaining validation (cubic kernel, signs).
    Diffusion probe(mc.model, mc.diffusion);
    (void)probe;
    return mc;
}

}  // namespace rpde
