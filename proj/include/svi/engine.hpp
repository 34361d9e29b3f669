#pragma once

// Projection-based stochastic approximation:
//   x_{k+1,i} = P_{X_i}(x_{k,i} - g_{k,i} (Phi_i(x_k + z_k, xi_k) + reg x_{k,i}))
// with per-group stepsizes, optional smoothing perturbations z_k, and
// replication orchestration.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "svi/block_vector.hpp"
#include "svi/error.hpp"
#include "svi/projections.hpp"
#include "svi/rng.hpp"
#include "svi/smoothing.hpp"
#include "svi/stepsizes.hpp"
#include "svi/stochastic_map.hpp"

namespace svi {

/// Worker count: SVI_THREADS if set to a positive integer, else the number of
/// hardware threads.
inline std::size_t thread_budget() {
    if (const char* env = std::getenv("SVI_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs body(i) for i in [0, n) on up to thread_budget() threads. Every index
/// runs even if another throws; the exception of the smallest failing index
/// is rethrown.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    std::vector<std::exception_ptr> errors(n);
    const std::size_t workers = std::min(n, thread_budget());
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct RunConfig {
    const VIProblem* problem = nullptr;
    /// One schedule per stepsize group (the map's blocks), or one shared by all.
    std::vector<StepsizeSchedule> schedules;
    SmoothingScheme smoothing;
    BlockVector x0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    std::size_t record_every = 10;
    DykstraConfig projection;

    void validate() const {
        require(problem != nullptr, "RunConfig: problem is not set");
        problem->validate();
        require(record_every >= 1, "RunConfig: record_every must be >= 1");
        projection.validate();
        const std::size_t groups = problem->groups().num_blocks();
        require(schedules.size() == 1 || schedules.size() == groups,
                "RunConfig: " + std::to_string(schedules.size()) + " schedules for " + std::to_string(groups) +
                    " stepsize groups");
        smoothing.validate(problem->groups());
        if (x0.size() != problem->dim())
            throw DimensionError("RunConfig: x0 has dimension " + std::to_string(x0.size()) + ", problem has " +
                                 std::to_string(problem->dim()));
        const double viol = problem->set.max_violation(x0.flat());
        require(viol <= 10.0 * projection.tol, "RunConfig: x0 is infeasible (violation " + std::to_string(viol) + ")");
    }
};

struct RunRecord {
    std::vector<std::size_t> ks;               ///< recorded iteration indices
    std::vector<Eigen::VectorXd> snapshots;    ///< x_k at each recorded k
    std::vector<double> sq_dist;               ///< ||x_k - x_ref||^2 (empty without a reference)
    Eigen::VectorXd final_iterate;             ///< x_K
    double final_sq_dist = 0.0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
};

/// x_{k+1} = P_X(x_k - g .* f), where group g of `groups` uses steps[g] (a
/// single step is shared by all groups).
inline Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& f, const std::vector<double>& steps,
                            const BlockLayout& groups, const CartesianSet& set, const DykstraConfig& cfg = {}) {
    if (static_cast<std::size_t>(x.size()) != groups.total() || f.size() != x.size())
        throw DimensionError("step: iterate, sample and group layout sizes differ");
    Eigen::VectorXd y = x;
    if (steps.size() == 1) {
        require(steps[0] > 0.0, "step: stepsizes must be positive");
        y.noalias() -= steps[0] * f;
    } else {
        require(steps.size() == groups.num_blocks(), "step: one stepsize per group required");
        for (std::size_t g = 0; g < groups.num_blocks(); ++g) {
            require(steps[g] > 0.0, "step: stepsizes must be positive");
            const auto off = static_cast<Eigen::Index>(groups.offset(g));
            const auto dim = static_cast<Eigen::Index>(groups.dim(g));
            y.segment(off, dim).noalias() -= steps[g] * f.segment(off, dim);
        }
    }
    return project_flat(set, y, cfg);
}

/// BlockVector form of step().
inline BlockVector step(const BlockVector& x, const BlockVector& f, const std::vector<double>& steps,
                        const CartesianSet& set, const DykstraConfig& cfg = {}) {
    require_same_layout(x.layout(), f.layout(), "step");
    return BlockVector(x.layout(), step(x.flat(), f.flat(), steps, x.layout(), set, cfg));
}

/// One run of K updates. Map noise is drawn from substream 0 of the seed and
/// smoothing perturbations from substream 1, so the two are independent.
inline RunRecord run_sa(const RunConfig& cfg, const std::optional<BlockVector>& x_ref = std::nullopt) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const VIProblem& prob = *cfg.problem;
    const BlockLayout& groups = prob.groups();
    if (x_ref && x_ref->size() != prob.dim()) throw DimensionError("run_sa: reference has wrong dimension");

    std::vector<StepsizeSchedule> schedules = cfg.schedules;
    for (auto& s : schedules) s.reset();
    Rng xi_rng = Rng::substream(cfg.seed, 0);
    Rng z_rng = Rng::substream(cfg.seed, 1);

    RunRecord rec;
    rec.seed = cfg.seed;
    auto record = [&](std::size_t k, const Eigen::VectorXd& x) {
        rec.ks.push_back(k);
        rec.snapshots.push_back(x);
        if (x_ref) rec.sq_dist.push_back((x - x_ref->flat()).squaredNorm());
    };

    Eigen::VectorXd x = cfg.x0.flat();
    Eigen::VectorXd z, point, f;
    std::vector<double> steps(schedules.size());
    record(0, x);
    for (std::size_t k = 0; k < cfg.iterations; ++k) {
        try {
            if (cfg.smoothing.active()) {
                sample_perturbation_into(cfg.smoothing, groups, z_rng, z);
                point = x + z;
                prob.map.sample_into(point, xi_rng, f);
            } else {
                prob.map.sample_into(x, xi_rng, f);
            }
            if (prob.regularization != 0.0) f.noalias() += prob.regularization * x;
            if (!f.allFinite()) throw DomainError("map sample is not finite");
            for (std::size_t g = 0; g < schedules.size(); ++g) steps[g] = schedules[g].next();
            x = step(x, f, steps, groups, prob.set, cfg.projection);
        } catch (const Error& e) {
            throw RunError(e.what(), cfg.seed, k);
        }
        if ((k + 1) % cfg.record_every == 0) record(k + 1, x);
    }
    rec.final_iterate = x;
    if (x_ref) rec.final_sq_dist = (x - x_ref->flat()).squaredNorm();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

struct ReplicationResult {
    std::vector<RunRecord> runs;  ///< in seed order
    std::vector<std::size_t> ks;
    std::vector<double> mse;      ///< (1/R) sum_r ||x_k^r - x_ref||^2 at each recorded k
};

/// R independent runs with seeds base_seed + r, executed in parallel and
/// merged in seed order. The first failing seed aborts the batch.
inline ReplicationResult run_replications(const RunConfig& tmpl, std::size_t R, std::uint64_t base_seed,
                                          const BlockVector& x_ref) {
    require(R >= 1, "run_replications: R must be >= 1");
    tmpl.validate();
    ReplicationResult out;
    out.runs.resize(R);
    parallel_for(R, [&](std::size_t r) {
        RunConfig cfg = tmpl;
        cfg.seed = base_seed + r;
        out.runs[r] = run_sa(cfg, x_ref);
    });
    out.ks = out.runs.front().ks;
    out.mse.assign(out.ks.size(), 0.0);
    for (const auto& run : out.runs)
        for (std::size_t j = 0; j < out.ks.size(); ++j) out.mse[j] += run.sq_dist[j];
    for (double& v : out.mse) v /= static_cast<double>(R);
    return out;
}

struct PolyakAudit {
    /// First index from which 0 <= alpha_k <= 1 holds through the end
    /// (alpha.size() when it never settles).
    std::size_t alpha_threshold = 0;
    bool alpha_in_unit_interval = false;
    bool alpha_diverges = false;
    bool mu_summable = false;
    bool ratio_vanishes = false;

    bool passed() const noexcept { return alpha_in_unit_interval && alpha_diverges && mu_summable && ratio_vanishes; }
};

/// Heuristic check of sum alpha = inf, sum mu < inf and mu/alpha -> 0 on a
/// finite horizon K, using decades [K/100, K/10) and [K/10, K):
///  - alpha diverges if its last-decade sum is at least half the previous one;
///  - mu is summable if its last-decade sum is at most a fifth of the previous one;
///  - mu/alpha vanishes if its last-decade mean is below half the previous one.
/// Sequences shorter than 100 terms are reported as failing.
inline PolyakAudit polyak_conditions_audit(const std::vector<double>& alpha, const std::vector<double>& mu) {
    require(alpha.size() == mu.size(), "polyak_conditions_audit: sequences differ in length");
    PolyakAudit rep;
    const std::size_t K = alpha.size();
    rep.alpha_threshold = K;
    for (std::size_t k = K; k-- > 0;) {
        if (alpha[k] < 0.0 || alpha[k] > 1.0) break;
        rep.alpha_threshold = k;
    }
    rep.alpha_in_unit_interval = rep.alpha_threshold < K;
    if (K < 100) return rep;

    const std::size_t a = K / 100, b = K / 10;
    auto sum = [](const std::vector<double>& v, std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t k = lo; k < hi; ++k) s += v[k];
        return s;
    };
    auto ratio_mean = [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        std::size_t cnt = 0;
        for (std::size_t k = lo; k < hi; ++k) {
            if (alpha[k] > 0.0) {
                s += mu[k] / alpha[k];
                ++cnt;
            }
        }
        return cnt == 0 ? std::numeric_limits<double>::infinity() : s / static_cast<double>(cnt);
    };
    const double alpha_prev = sum(alpha, a, b), alpha_last = sum(alpha, b, K);
    const double mu_prev = sum(mu, a, b), mu_last = sum(mu, b, K);
    rep.alpha_diverges = alpha_prev > 0.0 && alpha_last >= 0.5 * alpha_prev;
    rep.mu_summable = mu_last <= 0.2 * mu_prev;
    rep.ratio_vanishes = ratio_mean(b, K) < 0.5 * ratio_mean(a, b);
    return rep;
}

}  // namespace svi
