#include "rpde/gronwall.hpp"

#include <algorithm>
#include <cmath>

#include "rpde/errors.hpp"
#include "rpde/specfun.hpp"

namespace rpde {

BoundCurve singular_gronwall(const BoundCurve& h, double m, double beta) {
    if (h.times.size() != h.values.size() || h.times.empty())
        throw InvalidInput("bound curve needs matching, nonempty times and values");
    if (!(m > 0.0)) throw InvalidInput("Gronwall constant M must be positive");
    if (!(beta > 0.0 && beta <= 1.0)) throw InvalidInput("beta must lie in (0,1]");
    for (double v : h.values)
        if (!(v >= 0.0)) throw InvalidInput("h must be nonnegative");
    const std::size_t n = h.times.size();
    BoundCurve out{h.times, h.values};
    if (n == 1) return out;
    const double dt = h.times[1] - h.times[0];
    if (!(dt > 0.0)) throw InvalidInput("times must be increasing");
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(h.times[i] - h.times[0] - static_cast<double>(i) * dt) > 1e-9 * (1.0 + std::abs(h.times[i])))
            throw InvalidInput("h must be sampled on a uniform grid");

    const double kappa = std::pow(std::tgamma(beta) * m, 1.0 / beta);
    // E_j = E_{beta,1}(kappa u_j) on the lag grid and at panel midpoints.
    std::vector<double> e(n), e_mid(n - 1);
    for (std::size_t j = 0; j < n; ++j)
        e[j] = mittag_leffler(beta, 1.0, kappa * static_cast<double>(j) * dt);
    for (std::size_t j = 0; j + 1 < n; ++j)
        e_mid[j] = mittag_leffler(beta, 1.0, kappa * (static_cast<double>(j) + 0.5) * dt);

    // Panel [u_j, u_{j+1}] of int h(t-u) k E'(k u) du with h linear in u:
    //   h(t-u_j) (E_{j+1}-E_j) + slope * int (u-u_j) dE, where
    //   int (u-u_j) dE = dt E_{j+1} - int E du  (Simpson for the smooth part).
    std::vector<double> w_left(n - 1), w_right(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double de = e[j + 1] - e[j];
        const double int_e = dt * (e[j] + 4.0 * e_mid[j] + e[j + 1]) / 6.0;
        const double moment = (dt * e[j + 1] - int_e) / dt;
        w_left[j] = de - moment;
        w_right[j] = moment;
    }
    for (std::size_t i = 1; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < i; ++j)
            acc += w_left[j] * h.values[i - j] + w_right[j] * h.values[i - j - 1];
        out.values[i] = h.values[i] + std::max(acc, 0.0);
    }
    return out;
}

std::vector<double> discrete_gronwall(double a, double u0, std::span<const double> b,
                                      std::span<const double> c) {
    if (b.size() != c.size()) throw InvalidInput("b and c must have equal length");
    if (!(a >= 0.0) || !(u0 >= 0.0)) throw InvalidInput("a and u0 must be nonnegative");
    for (std::size_t k = 0; k < b.size(); ++k)
        if (!(b[k] >= 0.0) || !(c[k] >= 0.0)) throw InvalidInput("b and c must be nonnegative");
    std::vector<double> out(b.size() + 1);
    const double head = std::max(a, u0);
    double prod = 1.0;   // prod_{j<n} (1+b_j)
    double tail = 0.0;   // sum_{k<n} c_k prod_{k<j<n} (1+b_j)
    out[0] = head;
    for (std::size_t k = 0; k < b.size(); ++k) {
        prod *= 1.0 + b[k];
        tail = tail * (1.0 + b[k]) + c[k];
        out[k + 1] = head * prod + tail;
    }
    return out;
}

}  // namespace rpde
