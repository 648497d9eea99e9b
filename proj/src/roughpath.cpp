#include "rpde/roughpath.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "rpde/csv.hpp"
#include "rpde/errors.hpp"

namespace rpde {

GridRoughPath::GridRoughPath(double t0, double dt, std::vector<double> x,
                             std::vector<double> xx_cells, double gamma)
    : t0_(t0), dt_(dt), gamma_(gamma), x_(std::move(x)), xx_(std::move(xx_cells)) {
    if (!(dt_ > 0.0)) throw InvalidInput("grid step must be positive");
    if (x_.size() < 2) throw InvalidInput("rough path needs at least 2 grid points");
    if (xx_.size() + 1 != x_.size())
        throw InvalidInput("second level must have one value per grid cell");
    if (x_.front() != 0.0) throw InvalidInput("first level must vanish at the first grid point");
    if (!(gamma_ > 0.0 && gamma_ <= 1.0)) throw InvalidInput("Hoelder exponent must lie in (0,1]");
    prefix_.resize(x_.size());
    prefix_[0] = 0.0;
    for (std::size_t k = 0; k + 1 < x_.size(); ++k)
        prefix_[k + 1] = prefix_[k] + xx_[k] + x_[k] * (x_[k + 1] - x_[k]);
    dx_.resize(xx_.size());
    for (std::size_t k = 0; k < dx_.size(); ++k) dx_[k] = x_[k + 1] - x_[k];
}

GridRoughPath GridRoughPath::zero(double t0, double dt, std::size_t points, double gamma) {
    if (points < 2) throw InvalidInput("rough path needs at least 2 grid points");
    return {t0, dt, std::vector<double>(points, 0.0), std::vector<double>(points - 1, 0.0),
            gamma};
}

std::size_t GridRoughPath::index_of(double t) const {
    const double k = (t - t0_) / dt_;
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-7 || r < 0.0 || r > static_cast<double>(points() - 1)) {
        std::ostringstream os;
        os << "time " << t << " is not a grid point of [" << t0_ << ", " << end_time() << "]";
        throw InvalidInput(os.str());
    }
    return static_cast<std::size_t>(r);
}

GridRoughPath GridRoughPath::with_gamma(double gamma) const {
    GridRoughPath out(t0_, dt_, x_, xx_, gamma);
    out.dx_ = dx_;
    return out;
}

GridRoughPath GridRoughPath::window(std::size_t first, std::size_t last) const {
    return slice(first, last, time(first));
}

GridRoughPath GridRoughPath::slice(std::size_t first, std::size_t last, double new_t0) const {
    if (first >= last || last >= points()) throw InvalidInput("window must contain at least one cell");
    std::vector<double> x(x_.begin() + static_cast<std::ptrdiff_t>(first),
                          x_.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    const double base = x.front();
    for (double& v : x) v -= base;
    std::vector<double> xx(xx_.begin() + static_cast<std::ptrdiff_t>(first),
                           xx_.begin() + static_cast<std::ptrdiff_t>(last));
    GridRoughPath out(new_t0, dt_, std::move(x), std::move(xx), gamma_);
    std::copy(dx_.begin() + static_cast<std::ptrdiff_t>(first),
              dx_.begin() + static_cast<std::ptrdiff_t>(last), out.dx_.begin());
    return out;
}

bool GridRoughPath::same_grid(const GridRoughPath& other) const noexcept {
    return points() == other.points() && dt_ == other.dt_ && t0_ == other.t0_;
}

GridRoughPath lift_piecewise_linear(std::span<const double> samples, double t0, double dt,
                                    double gamma) {
    if (samples.size() < 2) throw InvalidInput("lift needs at least 2 samples");
    if (!(dt > 0.0)) throw InvalidInput("grid step must be positive");
    std::vector<double> x(samples.size());
    std::vector<double> xx(samples.size() - 1);
    const double base = samples[0];
    for (std::size_t k = 0; k < samples.size(); ++k) x[k] = samples[k] - base;
    // Iterated integral of a straight segment: (increment)^2 / 2.
    for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
        const double d = samples[k + 1] - samples[k];
        xx[k] = 0.5 * d * d;
    }
    return {t0, dt, std::move(x), std::move(xx), gamma};
}

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// In-place forward DFT of length n via FFTW. Planning is serialized; execution is not.
void dft_forward(std::vector<std::complex<double>>& data) {
    static_assert(sizeof(std::complex<double>) == sizeof(fftw_complex));
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr, FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

double fgn_autocov(double hurst, std::size_t k) {
    const double h2 = 2.0 * hurst;
    const double kk = static_cast<double>(k);
    if (k == 0) return 1.0;
    return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) + std::pow(kk - 1.0, h2));
}

}  // namespace

std::vector<double> sample_fbm(double hurst, std::size_t n_steps, std::uint64_t seed,
                               double horizon) {
    if (!(hurst > 1.0 / 3.0 && hurst <= 1.0))
        throw InvalidInput("Hurst parameter must lie in (1/3, 1]");
    if (n_steps < 2) throw InvalidInput("fBm sampler needs at least 2 steps");
    if (!(horizon > 0.0)) throw InvalidInput("horizon must be positive");

    // Davies-Harte: the circulant extension of the fGn covariance has
    // nonnegative eigenvalues for every H in (0,1]; it is diagonalized by the DFT.
    const std::size_t n = n_steps;
    const std::size_t m = 2 * n;
    std::vector<std::complex<double>> eig(m);
    for (std::size_t k = 0; k <= n; ++k) eig[k] = fgn_autocov(hurst, k);
    for (std::size_t k = n + 1; k < m; ++k) eig[k] = fgn_autocov(hurst, m - k);
    dft_forward(eig);
    double max_eig = 0.0;
    for (const auto& e : eig) max_eig = std::max(max_eig, e.real());
    std::vector<double> lam(m);
    for (std::size_t k = 0; k < m; ++k) {
        double v = eig[k].real();
        if (v < -1e-9 * max_eig)
            throw RangeError("circulant embedding is not nonnegative definite");
        lam[k] = std::max(v, 0.0);
    }

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double md = static_cast<double>(m);
    std::vector<std::complex<double>> w(m);
    w[0] = std::sqrt(lam[0] / md) * normal(gen);
    w[n] = std::sqrt(lam[n] / md) * normal(gen);
    for (std::size_t k = 1; k < n; ++k) {
        const double a = normal(gen);
        const double b = normal(gen);
        const double s = std::sqrt(lam[k] / (2.0 * md));
        w[k] = {s * a, s * b};
        w[m - k] = std::conj(w[k]);
    }
    dft_forward(w);

    const double scale = std::pow(horizon / static_cast<double>(n), hurst);
    std::vector<double> path(n + 1);
    path[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) path[k + 1] = path[k] + scale * w[k].real();
    return path;
}

namespace {

void check_range(const GridRoughPath& rp, std::size_t first, std::size_t last) {
    if (first > last || last >= rp.points()) throw InvalidInput("index range outside the grid");
}

}  // namespace

HolderReport holder_report(const GridRoughPath& rp, std::size_t first, std::size_t last) {
    check_range(rp, first, last);
    HolderReport rep;
    rep.s = rp.time(first);
    rep.t = rp.time(last);
    const double g = rp.gamma();
    const double dt = rp.dt();
    // Precompute (k dt)^-gamma and (k dt)^-2gamma for all lags.
    const std::size_t span = last - first;
    std::vector<double> w1(span + 1), w2(span + 1);
    for (std::size_t k = 1; k <= span; ++k) {
        const double h = static_cast<double>(k) * dt;
        w1[k] = std::pow(h, -g);
        w2[k] = w1[k] * w1[k];
    }
    double sx = 0.0, sxx = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        for (std::size_t j = i + 1; j <= last; ++j) {
            sx = std::max(sx, std::abs(rp.increment(i, j)) * w1[j - i]);
            sxx = std::max(sxx, std::abs(rp.area(i, j)) * w2[j - i]);
        }
    }
    rep.seminorm_x = sx;
    rep.seminorm_xx = sxx;
    rep.rho = sx + sxx;
    return rep;
}

double holder_seminorm(const GridRoughPath& rp, Level level, std::size_t first, std::size_t last) {
    const auto rep = holder_report(rp, first, last);
    return level == Level::first ? rep.seminorm_x : rep.seminorm_xx;
}

double rough_metric(const GridRoughPath& a, const GridRoughPath& b, std::size_t first,
                    std::size_t last) {
    if (!a.same_grid(b)) throw InvalidInput("rough_metric requires identical grids");
    if (a.gamma() != b.gamma()) throw InvalidInput("rough_metric requires equal exponents");
    check_range(a, first, last);
    const double g = a.gamma();
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        for (std::size_t j = i + 1; j <= last; ++j) {
            const double h = static_cast<double>(j - i) * a.dt();
            const double w = std::pow(h, -g);
            s1 = std::max(s1, std::abs(a.increment(i, j) - b.increment(i, j)) * w);
            s2 = std::max(s2, std::abs(a.area(i, j) - b.area(i, j)) * w * w);
        }
    }
    return s1 + s2;
}

GridRoughPath shift(const GridRoughPath& rp, double r) {
    const double k = r / rp.dt();
    const double kr = std::round(k);
    if (std::abs(k - kr) > 1e-7 || kr < 0.0)
        throw InvalidInput("shift must be a nonnegative multiple of the grid step");
    const auto m = static_cast<std::size_t>(kr);
    if (m + 1 >= rp.points()) throw InvalidInput("shifted window exceeds the sampled horizon");
    if (m == 0) return rp;
    return rp.slice(m, rp.points() - 1, rp.t0());
}

GridRoughPath refine_linear(const GridRoughPath& rp, std::size_t factor) {
    if (factor == 0) throw InvalidInput("refinement factor must be positive");
    std::vector<double> v;
    v.reserve(rp.cells() * factor + 1);
    const auto x = rp.x();
    for (std::size_t k = 0; k < rp.cells(); ++k) {
        for (std::size_t s = 0; s < factor; ++s) {
            const double w = static_cast<double>(s) / static_cast<double>(factor);
            v.push_back((1.0 - w) * x[k] + w * x[k + 1]);
        }
    }
    v.push_back(x.back());
    return lift_piecewise_linear(v, rp.t0(), rp.dt() / static_cast<double>(factor), rp.gamma());
}

void write_path_csv(std::ostream& out, const GridRoughPath& rp) {
    out << "t,x,xx_cell\n";
    const auto x = rp.x();
    const auto xx = rp.xx_cells();
    for (std::size_t k = 0; k < rp.points(); ++k) {
        out << csv::num(rp.time(k)) << ',' << csv::num(x[k]) << ',';
        if (k < rp.cells()) out << csv::num(xx[k]);
        out << '\n';
    }
}

GridRoughPath read_path_csv(std::istream& in, double gamma) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("empty path file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,x,xx_cell") throw InvalidInput("path file header must be 't,x,xx_cell'");
    std::vector<double> t, x, xx;
    bool last_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (last_seen) throw InvalidInput("only the last row may omit xx_cell");
        const auto f = csv::split(line);
        if (f.size() != 3) throw InvalidInput("path row must have 3 columns");
        t.push_back(csv::parse_double(f[0]));
        x.push_back(csv::parse_double(f[1]));
        if (f[2].empty())
            last_seen = true;
        else
            xx.push_back(csv::parse_double(f[2]));
    }
    if (t.size() < 2 || !last_seen) throw InvalidInput("path file needs >= 2 rows, last without xx_cell");
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t k = 0; k < t.size(); ++k)
        if (std::abs(t[k] - (t.front() + static_cast<double>(k) * dt)) > 1e-9 * (1.0 + std::abs(t[k])))
            throw InvalidInput("path file times are not a uniform grid");
    return {t.front(), dt, std::move(x), std::move(xx), gamma};
}

}  // namespace rpde
