#pragma once

// Stochastic bandwidth sharing: 5 users over 9 routes and 20 links, user i
// maximizing sum_r xi_i(r) log(1 + x_i(r)) against the congestion cost
// m_c ||A x||^2, subject to A x <= m_b b, x >= 0. The VI map is
//   Phi(x, xi) = -(xi_r / (1 + x_r))_r + 2 m_c A^T A x.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svi/error.hpp"
#include "svi/projections.hpp"
#include "svi/rng.hpp"
#include "svi/stepsizes.hpp"
#include "svi/stochastic_map.hpp"

namespace svi::problems {

struct BandwidthSettings {
    std::string name = "custom";
    double m_b = 1.0;   ///< capacity multiplier
    double m_c = 1.0;   ///< congestion cost multiplier
    double m_xi = 1.0;  ///< multiplier of the utility weights' centers
    double d_xi = 1.0;  ///< multiplier of the utility weights' half-widths

    void validate() const {
        require(m_b > 0.0 && m_c > 0.0 && m_xi > 0.0 && d_xi > 0.0,
                "bandwidth settings " + name + ": multipliers must be positive");
    }
};

/// The twelve sensitivity settings S1..S12 (m_b, m_c, m_xi, d_xi).
inline std::vector<BandwidthSettings> bandwidth_default_settings() {
    return {
        {"S1", 1, 1, 5, 2},      {"S2", 0.1, 1, 5, 2},     {"S3", 0.01, 1, 5, 2},    {"S4", 0.1, 2, 2, 1},
        {"S5", 0.1, 1, 2, 1},    {"S6", 0.1, 0.5, 2, 1},   {"S7", 1, 1, 1, 5},       {"S8", 1, 1, 2, 5},
        {"S9", 1, 1, 5, 5},      {"S10", 1, 0.01, 1, 1},   {"S11", 1, 0.01, 1, 2},   {"S12", 1, 0.01, 1, 5},
    };
}

/// Network data: routing matrix (links x routes), link capacities, the
/// route partition among users, and the base uniform law of each route's
/// utility weight, U[center - half_width, center + half_width].
struct BandwidthTopology {
    Eigen::MatrixXd A;
    Eigen::VectorXd capacities;
    std::vector<std::size_t> user_routes;
    Eigen::VectorXd xi_center;
    Eigen::VectorXd xi_half_width;

    /// 20 links, 9 routes; users own routes {1,2,3}, {4,5}, {6}, {7}, {8,9}.
    /// Every route has a link of its own, so A^T A is positive definite.
    static BandwidthTopology default_topology() {
        const std::vector<std::vector<int>> route_links = {
            {1, 2, 3}, {1, 4, 5}, {6, 7, 3}, {8, 9, 10}, {8, 11, 12}, {13, 14, 10}, {15, 16, 5}, {17, 18, 12},
            {17, 19, 20, 14},
        };
        BandwidthTopology t;
        t.A = Eigen::MatrixXd::Zero(20, 9);
        for (std::size_t r = 0; r < route_links.size(); ++r)
            for (int l : route_links[r]) t.A(l - 1, static_cast<Eigen::Index>(r)) = 1.0;
        t.capacities.resize(20);
        t.capacities << 10, 15, 15, 20, 10, 10, 20, 30, 25, 15, 20, 15, 10, 10, 15, 15, 20, 20, 25, 40;
        t.user_routes = {3, 2, 1, 1, 2};
        t.xi_center.resize(9);
        t.xi_center << 1.0, 1.0, 1.0, 1.4, 1.4, 0.8, 1.6, 1.2, 1.2;
        t.xi_half_width.resize(9);
        t.xi_half_width << 0.1, 0.1, 0.1, 0.2, 0.2, 0.05, 0.2, 0.1, 0.1;
        return t;
    }

    void validate() const {
        const Eigen::Index R = A.cols();
        require(A.rows() >= 1 && R >= 1, "bandwidth topology: empty routing matrix");
        require(capacities.size() == A.rows(), "bandwidth topology: one capacity per link required");
        require(xi_center.size() == R && xi_half_width.size() == R,
                "bandwidth topology: one utility-weight law per route required");
        for (Eigen::Index l = 0; l < A.rows(); ++l)
            for (Eigen::Index r = 0; r < R; ++r)
                require(A(l, r) == 0.0 || A(l, r) == 1.0, "bandwidth topology: routing matrix must be binary");
        require(capacities.minCoeff() > 0.0, "bandwidth topology: capacities must be positive");
        std::size_t total = 0;
        for (std::size_t n : user_routes) {
            require(n >= 1, "bandwidth topology: every user needs a route");
            total += n;
        }
        require(total == static_cast<std::size_t>(R), "bandwidth topology: user routes must partition the routes");
        require(xi_half_width.minCoeff() >= 0.0, "bandwidth topology: negative half-width");
    }
};

/// Resolved constants of one instance.
struct BandwidthConstants {
    double eta = 0.0;            ///< min xi_mean / (1 + max b)^2 + 2 m_c lambda_min(A^T A)
    double lip = 0.0;            ///< max xi_mean + 2 m_c ||A^T A||
    double nu = 0.0;             ///< max(sqrt(sum var xi), D L / sqrt(2))
    double noise_sq = 0.0;       ///< sum var xi
    double diameter = 0.0;       ///< sqrt(#routes) max_l m_b b(l)
    double lambda_min_ata = 0.0;
    double norm_ata = 0.0;
    double c = 0.0;              ///< eta / 4
    std::vector<double> r;       ///< per-user multipliers in [1, 1 + (eta - 2c)/L]
};

struct BandwidthInstance {
    BandwidthSettings settings;
    BandwidthTopology topology;
    Eigen::VectorXd xi_lo;
    Eigen::VectorXd xi_hi;
    Eigen::VectorXd xi_mean;
    Eigen::VectorXd capacities;  ///< m_b b
    BandwidthConstants constants;
    VIProblem problem;

    /// Distributed adaptive rule parameters with e0 = D^2.
    SchemeParams dasa_params() const {
        SchemeParams p;
        p.eta = constants.eta;
        p.lip = constants.lip;
        p.nu = constants.nu;
        p.e0 = constants.diameter * constants.diameter;
        p.c = constants.c;
        p.beta = (constants.eta - 2.0 * constants.c) / constants.lip;
        p.r = constants.r;
        p.diameter = constants.diameter;
        return p;
    }

    /// x0 = 0.
    BlockVector start() const { return BlockVector(problem.groups()); }
};

/// Builds the instance. Per-user multipliers r_i are drawn uniformly from
/// [1, 1 + (eta - 2c)/L] using `seed`.
inline BandwidthInstance bandwidth_instance(const BandwidthSettings& settings, std::uint64_t seed,
                                            const std::optional<BandwidthTopology>& topology = std::nullopt) {
    settings.validate();
    BandwidthInstance inst;
    inst.settings = settings;
    inst.topology = topology ? *topology : BandwidthTopology::default_topology();
    const BandwidthTopology& t = inst.topology;
    t.validate();
    const Eigen::Index R = t.A.cols();

    inst.xi_lo = settings.m_xi * t.xi_center - settings.d_xi * t.xi_half_width;
    inst.xi_hi = settings.m_xi * t.xi_center + settings.d_xi * t.xi_half_width;
    require(inst.xi_lo.minCoeff() > 0.0, "bandwidth settings " + settings.name + ": utility weights must stay positive");
    inst.xi_mean = 0.5 * (inst.xi_lo + inst.xi_hi);
    inst.capacities = settings.m_b * t.capacities;

    const Eigen::MatrixXd ata = t.A.transpose() * t.A;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ata);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmin > 1e-12 * std::max(1.0, lmax)))
        throw ValidationError("bandwidth topology: A^T A is singular (smallest eigenvalue " + std::to_string(lmin) + ")");

    BandwidthConstants& k = inst.constants;
    k.lambda_min_ata = lmin;
    k.norm_ata = lmax;
    const double bmax = inst.capacities.maxCoeff();
    k.eta = inst.xi_mean.minCoeff() / ((1.0 + bmax) * (1.0 + bmax)) + 2.0 * settings.m_c * lmin;
    k.lip = inst.xi_mean.maxCoeff() + 2.0 * settings.m_c * lmax;
    k.noise_sq = (inst.xi_hi - inst.xi_lo).squaredNorm() / 12.0;
    k.diameter = std::sqrt(static_cast<double>(R)) * bmax;
    k.nu = std::max(std::sqrt(k.noise_sq), k.diameter * k.lip / std::sqrt(2.0));
    k.c = k.eta / 4.0;
    const double r_hi = 1.0 + (k.eta - 2.0 * k.c) / k.lip;
    Rng r_rng = Rng::substream(seed, 0x5245ull);
    for (std::size_t i = 0; i < t.user_routes.size(); ++i) k.r.push_back(r_rng.uniform(1.0, r_hi));

    const Eigen::MatrixXd two_mc_ata = 2.0 * settings.m_c * ata;
    const Eigen::VectorXd lo = inst.xi_lo, width = inst.xi_hi - inst.xi_lo, mean = inst.xi_mean;
    auto check_domain = [](const Eigen::VectorXd& x) {
        if ((x.array() <= -1.0).any()) throw DomainError("bandwidth map needs x > -1");
    };
    StochasticMap::Sampler sampler = [two_mc_ata, lo, width, check_domain](const Eigen::VectorXd& x, Rng& rng,
                                                                          Eigen::VectorXd& out) {
        check_domain(x);
        out.noalias() = two_mc_ata * x;
        for (Eigen::Index r = 0; r < x.size(); ++r) out[r] -= (lo[r] + width[r] * rng.uniform()) / (1.0 + x[r]);
    };
    StochasticMap::MeanMap mean_map = [two_mc_ata, mean, check_domain](const Eigen::VectorXd& x) {
        check_domain(x);
        Eigen::VectorXd out = two_mc_ata * x;
        out.array() -= mean.array() / (1.0 + x.array());
        return out;
    };
    MapConstants mc;
    mc.eta = k.eta;
    mc.lip = k.lip;
    mc.noise_sq = k.noise_sq;
    inst.problem.map = StochasticMap(BlockLayout(t.user_routes), sampler, mean_map, mc);
    inst.problem.set = CartesianSet::single(Polyhedron{t.A, inst.capacities, true, {}});
    return inst;
}

}  // namespace svi::problems
