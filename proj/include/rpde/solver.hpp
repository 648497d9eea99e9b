#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "rpde/roughpath.hpp"
#include "rpde/spectral.hpp"

namespace rpde {

/// Model plus coefficients, ready to integrate.
class Dynamics {
public:
    explicit Dynamics(const ModelConfig& cfg);

    const ModelConfig& config() const noexcept { return cfg_; }
    const SpectralModel& model() const noexcept { return cfg_.model; }
    const DriftConfig& drift() const noexcept { return cfg_.drift; }
    const Diffusion& diffusion() const noexcept { return g_; }

private:
    ModelConfig cfg_;
    Diffusion g_;
};

/// (y, y') on a uniform grid; y' is the Gubinelli derivative (G(y) for solutions).
struct ControlledPath {
    double t0 = 0.0;
    double dt = 0.0;
    double gamma = 0.0;
    std::vector<std::vector<double>> y;
    std::vector<std::vector<double>> y_prime;

    std::size_t points() const noexcept { return y.size(); }
    double time(std::size_t i) const noexcept { return t0 + static_cast<double>(i) * dt; }
};

struct ControlledNorm {
    double sup_y = 0.0;   // ||y||_{inf, a}
    double sup_yp = 0.0;  // ||y'||_{inf, a - gamma}
    double hol_yp = 0.0;  // [y']_{gamma, a - 2 gamma}
    double rem_g = 0.0;   // [R]_{gamma, a - gamma}
    double rem_2g = 0.0;  // [R]_{2 gamma, a - 2 gamma}
    double total = 0.0;
};

/// Compensated sum  sum_{[u,v] in [s,t]} S_{t-u}(z_u X_{u,v} + z'_u XX_{u,v})
/// over rp indices [first, last]. z is indexed like rp. beta_out only fixes the
/// target space E_{alpha - 2 gamma + beta_out} and must be below 3 gamma.
std::vector<double> rough_convolution(const SpectralModel& model, const ControlledPath& z,
                                      const GridRoughPath& rp, std::size_t first,
                                      std::size_t last, double beta_out);

/// Exponential rough Euler scheme on the rp grid points [first, last]:
///   y_{k+1} = S_dt (y_k + F(y_k) dt + G(y_k) X_cell + DG(y_k) G(y_k) XX_cell).
/// Throws NumericalDiagnostic at the first non-finite state.
ControlledPath solve_mild(const Dynamics& dyn, const std::vector<double>& y0,
                          const GridRoughPath& rp, std::size_t first, std::size_t last);

/// Convenience form: from rp.t0() over `horizon`, after refining the noise grid
/// piecewise linearly by `substeps`.
ControlledPath solve_over(const Dynamics& dyn, const std::vector<double>& y0,
                          const GridRoughPath& rp, double horizon, std::size_t substeps = 1);

/// Grid-restricted controlled norm over path indices [first, last]. The path's
/// first point must sit on rp's grid. base_alpha is the space index of y.
ControlledNorm controlled_norm(const SpectralModel& model, const ControlledPath& path,
                               const GridRoughPath& rp, std::size_t first, std::size_t last,
                               double base_alpha);
ControlledNorm controlled_norm(const SpectralModel& model, const ControlledPath& path,
                               const GridRoughPath& rp, std::size_t first, std::size_t last);

/// The integrand pair (G(y), DG(y) y') of a controlled path (y, y').
ControlledPath compose_diffusion(const Dynamics& dyn, const ControlledPath& path);

/// CSV `t,norm_alpha,coeff_1..coeff_m` with m = min(8, n_modes).
void write_trajectory_csv(std::ostream& out, const SpectralModel& model, const ControlledPath& path);

}  // namespace rpde
