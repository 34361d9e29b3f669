#pragma once

// Reference solutions by sample average approximation. A fixed sample set
// (xi_1..xi_M, and z_1..z_M for smoothed maps) turns the expectation into a
// deterministic average, and the resulting VI is solved by the deterministic
// solver. Samples are fixed through common random numbers: sample m is
// regenerated from its own substream on every evaluation, so no noise draws
// are stored.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svi/block_vector.hpp"
#include "svi/error.hpp"
#include "svi/rng.hpp"
#include "svi/smoothing.hpp"
#include "svi/solver.hpp"
#include "svi/stochastic_map.hpp"

namespace svi::bench {

struct ReferenceConfig {
    std::size_t saa_samples = 10000;        ///< M_xi
    std::size_t smoothing_samples = 10000;  ///< M_z
    double tol = 1e-9;                      ///< natural-residual target
    std::size_t max_iters = 1000000;
    std::uint64_t seed = 0;
    /// Use the analytic mean map instead of xi samples when one exists
    /// (smoothing perturbations are still sampled).
    bool use_exact_mean = false;

    void validate() const {
        require(saa_samples >= 1 && smoothing_samples >= 1, "reference: sample counts must be >= 1");
        require(tol > 0.0, "reference: tol must be positive");
        require(max_iters >= 1, "reference: max_iters must be >= 1");
    }
};

struct ReferenceResult {
    BlockVector x;
    double residual = 0.0;
    std::size_t iterations = 0;
};

/// The sample-average map x -> (1/M) sum_m Phi(x + z_m, xi_m) + reg x. With
/// smoothing, M = max(M_xi, M_z) pairs (z_m, xi_m) are used.
inline DeterministicMap saa_map(const VIProblem& problem, const SmoothingScheme& smoothing,
                                const ReferenceConfig& cfg) {
    cfg.validate();
    smoothing.validate(problem.groups());
    const bool exact = cfg.use_exact_mean && problem.map.has_exact_mean();
    const std::size_t M = smoothing.active() ? std::max(exact ? 0 : cfg.saa_samples, cfg.smoothing_samples)
                                             : (exact ? 1 : cfg.saa_samples);
    const auto n = static_cast<Eigen::Index>(problem.dim());
    Eigen::MatrixXd Z;
    std::vector<std::uint64_t> xi_seeds(M);
    if (smoothing.active()) Z.resize(n, static_cast<Eigen::Index>(M));
    for (std::size_t m = 0; m < M; ++m) {
        Rng stream = Rng::substream(cfg.seed, m);
        xi_seeds[m] = stream.next_u64();
        if (smoothing.active()) {
            Rng z_rng = stream.split(1);
            Eigen::VectorXd z;
            sample_perturbation_into(smoothing, problem.groups(), z_rng, z);
            Z.col(static_cast<Eigen::Index>(m)) = z;
        }
    }
    const StochasticMap& map = problem.map;
    const double reg = problem.regularization;
    const bool smoothed = smoothing.active();
    return [&map, reg, exact, smoothed, Z, xi_seeds, M, n](const Eigen::VectorXd& x) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd point(n), phi(n);
        Rng rng;
        for (std::size_t m = 0; m < M; ++m) {
            const Eigen::VectorXd& p = smoothed ? (point = x + Z.col(static_cast<Eigen::Index>(m))) : x;
            if (exact) {
                acc += map.mean_flat(p);
            } else {
                rng.reseed(xi_seeds[m]);
                map.sample_into(p, rng, phi);
                acc += phi;
            }
        }
        acc /= static_cast<double>(M);
        if (reg != 0.0) acc += reg * x;
        return acc;
    };
}

/// Fixed point of the sample-average problem, started from x0 (default: the
/// projection of the origin).
inline ReferenceResult reference_solution(const VIProblem& problem, const SmoothingScheme& smoothing,
                                          const ReferenceConfig& cfg,
                                          const std::optional<Eigen::VectorXd>& x0 = std::nullopt) {
    problem.validate();
    const DeterministicMap F = saa_map(problem, smoothing, cfg);
    SolverConfig sc;
    sc.tol = cfg.tol;
    sc.max_iters = cfg.max_iters;
    const Eigen::VectorXd start = x0 ? *x0 : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.dim()));
    const SolverResult res = solve_vi(F, problem.set, start, sc);
    return {BlockVector(problem.groups(), res.x), res.residual, res.iterations};
}

}  // namespace svi::bench
