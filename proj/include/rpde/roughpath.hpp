#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace rpde {

/// Scalar gamma-Hoelder rough path (X, XX) sampled on a uniform grid.
///
/// The first level is stored at every grid point with X at the first point
/// equal to zero. The second level is stored for consecutive cells only;
/// the value over an arbitrary grid pair is rebuilt from Chen's relation
/// through a prefix table, so every pair costs O(1).
class GridRoughPath {
public:
    GridRoughPath(double t0, double dt, std::vector<double> x,
                  std::vector<double> xx_cells, double gamma);

    /// All-zero path with `points` grid points.
    static GridRoughPath zero(double t0, double dt, std::size_t points, double gamma);

    std::size_t points() const noexcept { return x_.size(); }
    std::size_t cells() const noexcept { return xx_.size(); }
    double t0() const noexcept { return t0_; }
    double dt() const noexcept { return dt_; }
    double gamma() const noexcept { return gamma_; }
    double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }
    double end_time() const noexcept { return time(points() - 1); }

    std::span<const double> x() const noexcept { return x_; }
    std::span<const double> xx_cells() const noexcept { return xx_; }

    /// X over cell k, stored at construction so that windows and shifts
    /// reproduce it bit for bit (re-based differences would not).
    double cell_increment(std::size_t k) const noexcept { return dx_[k]; }

    /// X_{t_i, t_j}.
    double increment(std::size_t i, std::size_t j) const noexcept { return x_[j] - x_[i]; }
    /// XX_{t_i, t_j} for i <= j, reconstructed with Chen's relation.
    double area(std::size_t i, std::size_t j) const noexcept {
        return prefix_[j] - prefix_[i] - x_[i] * (x_[j] - x_[i]);
    }

    /// Grid index of time t; throws InvalidInput if t is not a grid point.
    std::size_t index_of(double t) const;

    /// Same path with a different Hoelder exponent.
    GridRoughPath with_gamma(double gamma) const;

    /// Restriction to the grid points [first, last], re-based so that X vanishes at first.
    GridRoughPath window(std::size_t first, std::size_t last) const;

    /// Grid points [first, last] placed on a grid starting at new_t0, re-based.
    GridRoughPath slice(std::size_t first, std::size_t last, double new_t0) const;

    bool same_grid(const GridRoughPath& other) const noexcept;

private:
    double t0_;
    double dt_;
    double gamma_;
    std::vector<double> x_;
    std::vector<double> xx_;
    std::vector<double> prefix_;  // XX_{t_0, t_k}
    std::vector<double> dx_;
};

enum class Level { first, second };

struct HolderReport {
    double seminorm_x = 0.0;
    double seminorm_xx = 0.0;
    double rho = 0.0;
    double s = 0.0;
    double t = 0.0;
};

/// Canonical lift of the piecewise-linear interpolant of `samples`.
GridRoughPath lift_piecewise_linear(std::span<const double> samples, double t0, double dt,
                                    double gamma);

/// Exact-in-law fractional Brownian motion on n_steps uniform cells of [0, horizon]
/// (circulant embedding of fractional Gaussian noise). Returns n_steps + 1 values, X_0 = 0.
std::vector<double> sample_fbm(double hurst, std::size_t n_steps, std::uint64_t seed,
                               double horizon = 1.0);

/// Grid-restricted Hoelder seminorm of the chosen level over the index range [first, last].
double holder_seminorm(const GridRoughPath& rp, Level level, std::size_t first, std::size_t last);

/// Both seminorms and rho in a single sweep over grid pairs.
HolderReport holder_report(const GridRoughPath& rp, std::size_t first, std::size_t last);

/// Inhomogeneous rough path distance d_{gamma,J} over the index range [first, last].
double rough_metric(const GridRoughPath& a, const GridRoughPath& b, std::size_t first,
                    std::size_t last);

/// theta_r on sampled noise: path re-based at t0 + r. r must be a multiple of dt.
GridRoughPath shift(const GridRoughPath& rp, double r);

/// Piecewise-linear refinement: each cell split into `factor` equal cells, re-lifted.
GridRoughPath refine_linear(const GridRoughPath& rp, std::size_t factor);

/// CSV with header `t,x,xx_cell`; the last row has an empty xx_cell column.
void write_path_csv(std::ostream& out, const GridRoughPath& rp);
GridRoughPath read_path_csv(std::istream& in, double gamma);

}  // namespace rpde
