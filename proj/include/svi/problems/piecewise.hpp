#pragma once

// One-dimensional nonsmooth map: the derivative of the convex piecewise
// linear function
//   f(x) = -2x - 3        for x < -2,
//          -0.3x + 0.4    for -2 <= x < 3,
//          x - 3.5        for x >= 3,
// i.e. f'(x) has slopes -2, -0.3 and 1 with breaks at -2 and 3. Smoothing
// with a uniform perturbation on [-eps, eps] makes it continuous.

#include <Eigen/Dense>

#include "svi/block_vector.hpp"
#include "svi/rng.hpp"
#include "svi/stochastic_map.hpp"

namespace svi::problems {

inline double piecewise_derivative(double x) {
    if (x < -2.0) return -2.0;
    if (x < 3.0) return -0.3;
    return 1.0;
}

/// Noise-free map x -> f'(x) on a single scalar block.
inline StochasticMap piecewise_map() {
    StochasticMap::Sampler sampler = [](const Eigen::VectorXd& x, Rng&, Eigen::VectorXd& out) {
        out[0] = piecewise_derivative(x[0]);
    };
    StochasticMap::MeanMap mean = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd out(1);
        out[0] = piecewise_derivative(x[0]);
        return out;
    };
    MapConstants mc;
    mc.comp_bounds = {2.0};
    mc.noise_sq = 0.0;
    return StochasticMap(BlockLayout::single(1), sampler, mean, mc);
}

}  // namespace svi::problems
