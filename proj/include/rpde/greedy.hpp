#pragma once

#include <cstddef>
#include <vector>

#include "rpde/roughpath.hpp"

namespace rpde {

struct GreedyPartition {
    std::vector<double> taus;
    std::vector<std::size_t> indices;  // grid indices of taus
    std::size_t count = 0;             // N = taus.size() - 1
    double chi = 0.0;
    double eta = 0.0;
    double a = 0.0;
    double b = 0.0;
};

/// Summand of the control over the single step (t_i, t_j).
double control_weight(const GridRoughPath& rp, double eta, std::size_t i, std::size_t j);

/// W_{s,t}: supremum over grid partitions of [t_first, t_last], exact by dynamic programming.
double control_w(const GridRoughPath& rp, double eta, std::size_t first, std::size_t last);

/// Greedy times on [t_first, t_last]: each step extends as far as W^(gamma-eta) <= chi allows.
/// Throws InvalidInput naming the cell when a single grid cell already exceeds chi.
GreedyPartition greedy_times(const GridRoughPath& rp, double eta, double chi, std::size_t first,
                             std::size_t last);

std::size_t count_in_window(const GridRoughPath& rp, double eta, double chi, std::size_t first,
                            std::size_t last);

}  // namespace rpde
