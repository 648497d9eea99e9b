#include "rpde/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rpde/errors.hpp"

namespace rpde {

namespace {

void check_eta(const GridRoughPath& rp, double eta) {
    if (!(eta >= 0.0 && eta < rp.gamma())) throw InvalidInput("eta must lie in [0, gamma)");
}

}  // namespace

double control_weight(const GridRoughPath& rp, double eta, std::size_t i, std::size_t j) {
    const double ge = rp.gamma() - eta;
    const double h = static_cast<double>(j - i) * rp.dt();
    const double x = std::abs(rp.increment(i, j));
    const double xx = std::abs(rp.area(i, j));
    return std::pow(h, -eta / ge) * (std::pow(x, 1.0 / ge) + std::pow(xx, 0.5 / ge));
}

double control_w(const GridRoughPath& rp, double eta, std::size_t first, std::size_t last) {
    check_eta(rp, eta);
    if (first > last || last >= rp.points()) throw InvalidInput("index range outside the grid");
    if (first == last) return 0.0;
    const std::size_t n = last - first;
    // dp[j]: best partition value of [t_first, t_{first+j}].
    std::vector<double> dp(n + 1, 0.0);
    for (std::size_t j = 1; j <= n; ++j) {
        double best = 0.0;
        for (std::size_t i = 0; i < j; ++i)
            best = std::max(best, dp[i] + control_weight(rp, eta, first + i, first + j));
        dp[j] = best;
    }
    return dp[n];
}

GreedyPartition greedy_times(const GridRoughPath& rp, double eta, double chi, std::size_t first,
                             std::size_t last) {
    check_eta(rp, eta);
    if (!(chi > 0.0)) throw InvalidInput("chi must be positive");
    if (first >= last || last >= rp.points()) throw InvalidInput("greedy interval needs >= 1 cell");
    const double ge = rp.gamma() - eta;

    GreedyPartition out;
    out.chi = chi;
    out.eta = eta;
    out.a = rp.time(first);
    out.b = rp.time(last);
    out.indices.push_back(first);

    std::vector<double> dp;
    std::size_t start = first;
    while (start < last) {
        // Incremental DP from `start`; W_{start,.} is nondecreasing, so stop at the first violation.
        dp.assign(1, 0.0);
        std::size_t reach = start;
        for (std::size_t j = start + 1; j <= last; ++j) {
            double best = 0.0;
            for (std::size_t i = start; i < j; ++i)
                best = std::max(best, dp[i - start] + control_weight(rp, eta, i, j));
            dp.push_back(best);
            if (std::pow(best, ge) <= chi)
                reach = j;
            else
                break;
        }
        if (reach == start) {
            std::ostringstream os;
            os << "grid too coarse for chi=" << chi << ": cell [" << rp.time(start) << ", "
               << rp.time(start + 1) << "] (index " << start << ") alone exceeds the threshold";
            throw InvalidInput(os.str());
        }
        out.indices.push_back(reach);
        start = reach;
    }
    for (auto idx : out.indices) out.taus.push_back(rp.time(idx));
    out.count = out.indices.size() - 1;
    return out;
}

std::size_t count_in_window(const GridRoughPath& rp, double eta, double chi, std::size_t first,
                            std::size_t last) {
    return greedy_times(rp, eta, chi, first, last).count;
}

}  // namespace rpde
