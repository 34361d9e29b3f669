#pragma once

// Synthetic strongly monotone test problem on a box:
//   Phi(x, xi) = Q x + q + rho (x - t)_+ + xi,   xi ~ U[-h, h]^n,
// with Q symmetric positive definite. With rho = 0 the map is affine; the
// optional kink makes the map nonsmooth at x = t, so that smoothing changes
// the solution. With q = -Q t and t interior, x* = t.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "svi/error.hpp"
#include "svi/projections.hpp"
#include "svi/rng.hpp"
#include "svi/solver.hpp"
#include "svi/stochastic_map.hpp"

namespace svi::problems {

struct QuadraticInstance {
    Eigen::MatrixXd Q;
    Eigen::VectorXd q;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double noise_half_width = 0.0;
    double rho = 0.0;        ///< kink slope
    Eigen::VectorXd target;  ///< kink location t
    double eta = 0.0;        ///< lambda_min(Q)
    double lip = 0.0;        ///< lambda_max(Q) + rho
    double noise_sq = 0.0;   ///< n h^2 / 3
    VIProblem problem;       ///< scalar stepsize groups, one box block

    std::size_t dim() const { return static_cast<std::size_t>(Q.rows()); }

    /// Exact mean F(x).
    Eigen::VectorXd mean(const Eigen::VectorXd& x) const { return problem.map.mean_flat(x); }

    /// Per-coordinate bounds on |F_i| over the box enlarged by `margin`.
    std::vector<double> component_bounds(double margin) const {
        std::vector<double> out;
        const Eigen::VectorXd lo = lower.array() - margin, hi = upper.array() + margin;
        const Eigen::VectorXd radius = lo.cwiseAbs().cwiseMax(hi.cwiseAbs());
        for (Eigen::Index i = 0; i < Q.rows(); ++i) {
            double c = Q.row(i).cwiseAbs().dot(radius) + std::abs(q[i]);
            if (rho > 0.0) c += rho * std::max(0.0, hi[i] - target[i]);
            out.push_back(c);
        }
        return out;
    }

    /// Deterministic solution of VI(box, F).
    Eigen::VectorXd solve(double tol = 1e-12) const {
        SolverConfig cfg;
        cfg.tol = tol;
        return solve_vi([this](const Eigen::VectorXd& x) { return mean(x); }, problem.set,
                        Eigen::VectorXd::Zero(Q.rows()), cfg)
            .x;
    }
};

/// Instance from explicit data; Q must be symmetric positive definite.
inline QuadraticInstance make_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q, const Eigen::VectorXd& lower,
                                        const Eigen::VectorXd& upper, double noise_half_width = 0.0, double rho = 0.0,
                                        std::optional<Eigen::VectorXd> target = std::nullopt) {
    const Eigen::Index n = Q.rows();
    require(n >= 1 && Q.cols() == n, "quadratic: Q must be square");
    require(q.size() == n && lower.size() == n && upper.size() == n, "quadratic: dimension mismatch");
    require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff()),
            "quadratic: Q must be symmetric");
    require(noise_half_width >= 0.0 && rho >= 0.0, "quadratic: noise half-width and rho must be >= 0");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q);
    require(eig.eigenvalues().minCoeff() > 0.0, "quadratic: Q must be positive definite");

    QuadraticInstance inst;
    inst.Q = Q;
    inst.q = q;
    inst.lower = lower;
    inst.upper = upper;
    inst.noise_half_width = noise_half_width;
    inst.rho = rho;
    inst.target = target ? *target : Eigen::VectorXd::Zero(n);
    require(inst.target.size() == n, "quadratic: kink location has wrong dimension");
    inst.eta = eig.eigenvalues().minCoeff();
    inst.lip = eig.eigenvalues().maxCoeff() + rho;
    inst.noise_sq = static_cast<double>(n) * noise_half_width * noise_half_width / 3.0;

    const Eigen::MatrixXd Qc = Q;
    const Eigen::VectorXd qc = q, t = inst.target;
    const double h = noise_half_width;
    auto mean_into = [Qc, qc, t, rho](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        out.noalias() = Qc * x;
        out += qc;
        if (rho > 0.0) out.array() += rho * (x - t).array().max(0.0);
    };
    StochasticMap::Sampler sampler = [mean_into, h](const Eigen::VectorXd& x, Rng& rng, Eigen::VectorXd& out) {
        mean_into(x, out);
        if (h > 0.0)
            for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += rng.uniform(-h, h);
    };
    StochasticMap::MeanMap mean_map = [mean_into](const Eigen::VectorXd& x) {
        Eigen::VectorXd out(x.size());
        mean_into(x, out);
        return out;
    };
    MapConstants mc;
    mc.eta = inst.eta;
    mc.lip = inst.lip;
    mc.noise_sq = inst.noise_sq;
    inst.problem.map = StochasticMap(BlockLayout::scalars(static_cast<std::size_t>(n)), sampler, mean_map, mc);
    inst.problem.set = CartesianSet::single(Box{lower, upper});
    return inst;
}

/// Random symmetric Q with eigenvalues in [1, 10] (orthogonal factor from the
/// QR decomposition of a Gaussian matrix), q ~ U[-1, 1]^n, box [-1, 1]^n and
/// noise U[-1, 1]^n.
inline QuadraticInstance quadratic_instance(std::size_t n, std::uint64_t seed, double noise_half_width = 1.0) {
    require(n >= 1, "quadratic_instance: n must be >= 1");
    const auto N = static_cast<Eigen::Index>(n);
    Rng rng = Rng::substream(seed, 0x51ull);
    Eigen::MatrixXd G(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) G(i, j) = rng.normal();
    const Eigen::MatrixXd U = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
    Eigen::VectorXd lam(N);
    for (Eigen::Index i = 0; i < N; ++i) lam[i] = rng.uniform(1.0, 10.0);
    lam[0] = 1.0;
    if (N > 1) lam[N - 1] = 10.0;
    Eigen::MatrixXd Q = U * lam.asDiagonal() * U.transpose();
    Q = 0.5 * (Q + Q.transpose());
    Eigen::VectorXd q(N);
    for (Eigen::Index i = 0; i < N; ++i) q[i] = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(N);
    return make_quadratic(Q, q, -one, one, noise_half_width);
}

/// Kinked variant with interior solution x* = t: q = -Q t and a kink of slope
/// rho at t, so smoothing moves the solution off t.
inline QuadraticInstance kinked_quadratic_instance(std::size_t n, std::uint64_t seed, double rho = 4.0,
                                                   double noise_half_width = 1.0) {
    QuadraticInstance base = quadratic_instance(n, seed, noise_half_width);
    Rng rng = Rng::substream(seed, 0x4bull);
    Eigen::VectorXd t(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(-0.5, 0.5);
    return make_quadratic(base.Q, -base.Q * t, base.lower, base.upper, noise_half_width, rho, t);
}

}  // namespace svi::problems
