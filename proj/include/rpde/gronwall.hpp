#pragma once

#include <span>
#include <vector>

namespace rpde {

struct BoundCurve {
    std::vector<double> times;
    std::vector<double> values;
};

/// Upper bound for v(t) <= h(t) + M int_0^t (t-r)^{beta-1} v(r) dr:
///   h(t) + k int_0^t h(r) E'_{beta,1}((t-r) k) dr,   k = (Gamma(beta) M)^{1/beta}.
/// h must live on a uniform grid starting at the lower integration limit.
/// The kernel enters only through increments of E_{beta,1}, so the (t-r)^{beta-1}
/// singularity is integrated exactly panel by panel; h is interpolated linearly.
BoundCurve singular_gronwall(const BoundCurve& h, double m, double beta);

/// u_n <= max{a,u0} prod_{j<n}(1+b_j) + sum_{k<n} c_k prod_{k<j<n}(1+b_j), for n = 0..len(b).
std::vector<double> discrete_gronwall(double a, double u0, std::span<const double> b,
                                      std::span<const double> c);

}  // namespace rpde
