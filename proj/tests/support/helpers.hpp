#pragma once

// Deterministic RNG helpers and comparison utilities shared by the suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ocgrad/scenario_tree.hpp"

namespace ocgrad::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::vector<double> uniform_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(rng, lo, hi);
    return v;
}

/// max_i |a_i - b_i| / (1 + |b_i|)
inline double max_rel_dev(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::fabs(a[i] - b[i]) / (1.0 + std::fabs(b[i])));
    return worst;
}

inline double max_abs_dev(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
    return worst;
}

/// Random row-stochastic matrix; with allow_zeros roughly every fourth entry
/// is zeroed (keeping at least one survivor per row) before renormalising.
inline std::vector<std::vector<double>> random_row_stochastic(std::mt19937_64& rng, std::size_t n,
                                                              bool allow_zeros = false) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (auto& row : rows) {
        double sum = 0.0;
        for (double& p : row) {
            p = uniform(rng, 0.05, 1.0);
            if (allow_zeros && uniform(rng, 0.0, 1.0) < 0.25) p = 0.0;
            sum += p;
        }
        if (sum == 0.0) {
            row[0] = 1.0;
            sum = 1.0;
        }
        for (double& p : row) p /= sum;  // residual sum error ~n*eps, far below kProbTol
    }
    return rows;
}

/// Chain with `num_modes` distinct scalar disturbance values 0.01, 0.02, ...
/// (sampling times the shipped models tolerate) and uniform initial
/// distribution.
inline MarkovChain random_chain(std::mt19937_64& rng, std::size_t num_modes,
                                bool allow_zeros = false) {
    MarkovChain chain;
    for (std::size_t m = 0; m < num_modes; ++m)
        chain.modes.push_back({0.01 * static_cast<double>(m + 1)});
    chain.transition = random_row_stochastic(rng, num_modes, allow_zeros);
    chain.initial.assign(num_modes, 1.0 / static_cast<double>(num_modes));
    return chain;
}

}  // namespace ocgrad::testing
