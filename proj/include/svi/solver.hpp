#pragma once

// Deterministic solver for VI(X, F) with a single-valued, monotone map.
//
// Extragradient with a backtracking stepsize: a trial step y = P(x - g F(x))
// is accepted when g ||F(x) - F(y)|| <= 0.9 ||x - y||, and the update is
// x+ = P(x - g F(y)). The stepsize grows by 20% after each accepted step, so
// no Lipschitz constant is needed and the local one is tracked. The stopping
// test is the natural residual ||x - P(x - F(x))|| (gamma = 1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "svi/error.hpp"
#include "svi/projections.hpp"

namespace svi {

struct SolverConfig {
    double tol = 1e-9;                 ///< natural-residual target
    std::size_t max_iters = 1000000;   ///< extragradient iterations
    double initial_step = 1.0;
    DykstraConfig projection{100000, 1e-12};

    void validate() const {
        require(tol > 0.0, "SolverConfig.tol must be positive");
        require(max_iters >= 1, "SolverConfig.max_iters must be >= 1");
        require(initial_step > 0.0, "SolverConfig.initial_step must be positive");
        projection.validate();
    }
};

struct SolverResult {
    Eigen::VectorXd x;
    double residual = 0.0;
    std::size_t iterations = 0;
    std::size_t map_evaluations = 0;
};

using DeterministicMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline SolverResult solve_vi(const DeterministicMap& F, const CartesianSet& set, const Eigen::VectorXd& x0,
                             const SolverConfig& cfg = {}) {
    cfg.validate();
    const DykstraConfig& pc = cfg.projection;
    SolverResult res;
    Eigen::VectorXd x = project_flat(set, x0, pc);
    Eigen::VectorXd fx = F(x);
    ++res.map_evaluations;
    double gamma = cfg.initial_step;

    auto residual_at = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& fp) {
        return (p - project_flat(set, p - fp, pc)).norm();
    };

    double r = residual_at(x, fx);
    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
        if (r < cfg.tol) {
            res.x = std::move(x);
            res.residual = r;
            res.iterations = it;
            return res;
        }
        Eigen::VectorXd y;
        Eigen::VectorXd fy;
        for (int shrink = 0;; ++shrink) {
            y = project_flat(set, x - gamma * fx, pc);
            fy = F(y);
            ++res.map_evaluations;
            const double step = (x - y).norm();
            if (gamma * (fx - fy).norm() <= 0.9 * step || step == 0.0) break;
            gamma *= 0.5;
            if (shrink > 200 || gamma < 1e-300)
                throw ConvergenceError("solve_vi: stepsize underflow in backtracking", x, r);
        }
        x = project_flat(set, x - gamma * fy, pc);
        fx = F(x);
        ++res.map_evaluations;
        r = residual_at(x, fx);
        gamma *= 1.2;
    }
    throw ConvergenceError("solve_vi: no convergence in " + std::to_string(cfg.max_iters) +
                               " iterations (natural residual " + std::to_string(r) + ")",
                           x, r);
}

}  // namespace svi
