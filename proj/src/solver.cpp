#include "rpde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "rpde/csv.hpp"
#include "rpde/errors.hpp"

namespace rpde {

Dynamics::Dynamics(const ModelConfig& cfg) : cfg_(cfg), g_(cfg.model, cfg.diffusion) {}

std::vector<double> rough_convolution(const SpectralModel& model, const ControlledPath& z,
                                      const GridRoughPath& rp, std::size_t first,
                                      std::size_t last, double beta_out) {
    if (!(beta_out < 3.0 * rp.gamma()))
        throw InvalidInput("beta_out must be below 3 gamma for the compensated sum to converge");
    if (first > last || last >= rp.points()) throw InvalidInput("index range outside the path");
    if (z.points() != rp.points()) throw InvalidInput("integrand must be indexed like the noise");
    const std::size_t n = model.n_modes;
    std::vector<double> acc(n, 0.0);
    const double t = rp.time(last);
    for (std::size_t k = first; k < last; ++k) {
        const double dx = rp.cell_increment(k);
        const double xx = rp.xx_cells()[k];
        const double lag = t - rp.time(k);
        const auto& zu = z.y[k];
        const auto& zp = z.y_prime[k];
        for (std::size_t m = 0; m < n; ++m)
            acc[m] += std::exp(-model.mu[m] * lag) * (zu[m] * dx + zp[m] * xx);
    }
    return acc;
}

ControlledPath solve_mild(const Dynamics& dyn, const std::vector<double>& y0,
                          const GridRoughPath& rp, std::size_t first, std::size_t last) {
    const auto& model = dyn.model();
    const std::size_t n = model.n_modes;
    if (y0.size() != n) throw InvalidInput("initial state dimension does not match model");
    if (first > last || last >= rp.points()) throw InvalidInput("index range outside the path");
    const double dt = rp.dt();
    std::vector<double> decay(n);
    for (std::size_t m = 0; m < n; ++m) decay[m] = std::exp(-model.mu[m] * dt);

    const auto& g = dyn.diffusion();
    const bool has_g = !g.is_zero();
    const bool has_f = dyn.drift().kind != DriftConfig::Kind::zero && dyn.drift().c_f != 0.0;

    ControlledPath out;
    out.t0 = rp.time(first);
    out.dt = dt;
    out.gamma = rp.gamma();
    out.y.reserve(last - first + 1);
    out.y_prime.reserve(last - first + 1);
    out.y.push_back(y0);
    out.y_prime.push_back(has_g ? g.apply(y0) : std::vector<double>(n, 0.0));

    std::vector<double> next(n);
    for (std::size_t k = first; k < last; ++k) {
        const auto& y = out.y.back();
        const auto& gy = out.y_prime.back();
        next = y;
        if (has_f) {
            const auto f = apply_F(model, dyn.drift(), y);
            for (std::size_t m = 0; m < n; ++m) next[m] += f[m] * dt;
        }
        if (has_g) {
            const double dx = rp.cell_increment(k);
            const double xx = rp.xx_cells()[k];
            const auto dgg = g.derivative(y, gy);
            for (std::size_t m = 0; m < n; ++m) next[m] += gy[m] * dx + dgg[m] * xx;
        }
        bool finite = true;
        for (std::size_t m = 0; m < n; ++m) {
            next[m] *= decay[m];
            finite = finite && std::isfinite(next[m]);
        }
        if (!finite) {
            std::ostringstream os;
            os << "non-finite state at t=" << rp.time(k + 1);
            throw NumericalDiagnostic(os.str(), rp.time(k + 1));
        }
        out.y.push_back(next);
        out.y_prime.push_back(has_g ? g.apply(next) : std::vector<double>(n, 0.0));
    }
    return out;
}

ControlledPath solve_over(const Dynamics& dyn, const std::vector<double>& y0,
                          const GridRoughPath& rp, double horizon, std::size_t substeps) {
    if (substeps == 0) throw InvalidInput("substeps must be positive");
    if (!(horizon >= 0.0)) throw InvalidInput("horizon must be nonnegative");
    if (substeps == 1) return solve_mild(dyn, y0, rp, std::size_t{0}, rp.index_of(rp.t0() + horizon));
    const auto fine = refine_linear(rp, substeps);
    return solve_mild(dyn, y0, fine, std::size_t{0}, fine.index_of(fine.t0() + horizon));
}

ControlledNorm controlled_norm(const SpectralModel& model, const ControlledPath& path,
                               const GridRoughPath& rp, std::size_t first, std::size_t last,
                               double base_alpha) {
    if (first > last || last >= path.points()) throw InvalidInput("index range outside the path");
    const std::size_t offset = rp.index_of(path.t0);
    if (offset + last >= rp.points()) throw InvalidInput("path extends beyond the noise grid");
    const double gamma = rp.gamma();
    const std::size_t n = model.n_modes;
    std::vector<double> w0(n), w1(n), w2(n);
    for (std::size_t m = 0; m < n; ++m) {
        w0[m] = std::pow(model.mu[m], 2.0 * base_alpha);
        w1[m] = std::pow(model.mu[m], 2.0 * (base_alpha - gamma));
        w2[m] = std::pow(model.mu[m], 2.0 * (base_alpha - 2.0 * gamma));
    }
    auto wnorm = [n](const std::vector<double>& w, const std::vector<double>& v) {
        double acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) acc += w[m] * v[m] * v[m];
        return std::sqrt(acc);
    };

    ControlledNorm cn;
    for (std::size_t i = first; i <= last; ++i) {
        cn.sup_y = std::max(cn.sup_y, wnorm(w0, path.y[i]));
        cn.sup_yp = std::max(cn.sup_yp, wnorm(w1, path.y_prime[i]));
    }
    for (std::size_t i = first; i < last; ++i) {
        const auto& yi = path.y[i];
        const auto& pi = path.y_prime[i];
        for (std::size_t j = i + 1; j <= last; ++j) {
            const auto& yj = path.y[j];
            const auto& pj = path.y_prime[j];
            const double dx = rp.increment(offset + i, offset + j);
            double r1 = 0.0, r2 = 0.0, p2 = 0.0;
            for (std::size_t m = 0; m < n; ++m) {
                const double r = yj[m] - yi[m] - pi[m] * dx;
                const double dp = pj[m] - pi[m];
                r1 += w1[m] * r * r;
                r2 += w2[m] * r * r;
                p2 += w2[m] * dp * dp;
            }
            const double h = static_cast<double>(j - i) * path.dt;
            const double hg = std::pow(h, gamma);
            cn.hol_yp = std::max(cn.hol_yp, std::sqrt(p2) / hg);
            cn.rem_g = std::max(cn.rem_g, std::sqrt(r1) / hg);
            cn.rem_2g = std::max(cn.rem_2g, std::sqrt(r2) / (hg * hg));
        }
    }
    cn.total = cn.sup_y + cn.sup_yp + cn.hol_yp + cn.rem_g + cn.rem_2g;
    return cn;
}

ControlledNorm controlled_norm(const SpectralModel& model, const ControlledPath& path,
                               const GridRoughPath& rp, std::size_t first, std::size_t last) {
    return controlled_norm(model, path, rp, first, last, model.alpha);
}

ControlledPath compose_diffusion(const Dynamics& dyn, const ControlledPath& path) {
    ControlledPath out;
    out.t0 = path.t0;
    out.dt = path.dt;
    out.gamma = path.gamma;
    out.y.reserve(path.points());
    out.y_prime.reserve(path.points());
    const auto& g = dyn.diffusion();
    for (std::size_t i = 0; i < path.points(); ++i) {
        out.y.push_back(g.apply(path.y[i]));
        out.y_prime.push_back(g.derivative(path.y[i], path.y_prime[i]));
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const SpectralModel& model, const ControlledPath& path) {
    const std::size_t m = std::min<std::size_t>(8, model.n_modes);
    out << "t,norm_alpha";
    for (std::size_t k = 1; k <= m; ++k) out << ",coeff_" << k;
    out << '\n';
    for (std::size_t i = 0; i < path.points(); ++i) {
        out << csv::num(path.time(i)) << ',' << csv::num(frac_norm(model, path.y[i], model.alpha));
        for (std::size_t k = 0; k < m; ++k) out << ',' << csv::num(path.y[i][k]);
        out << '\n';
    }
}

}  // namespace rpde
