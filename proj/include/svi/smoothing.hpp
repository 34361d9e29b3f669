#pragma once

// Locally randomized smoothing F^eps(x) = E[F(x + z)], where block z_i is
// uniform on the ball B(0, eps_i) (MSR) or on the cube [-eps_i, eps_i]^{n_i}
// (MCR), independently across blocks. Includes the certified Lipschitz
// constants of the smoothed map and the density-distance utilities behind
// them.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "svi/block_vector.hpp"
#include "svi/error.hpp"
#include "svi/rng.hpp"
#include "svi/stochastic_map.hpp"

namespace svi {

enum class SmoothingKind { None, MSR, MCR };

inline const char* to_string(SmoothingKind kind) noexcept {
    switch (kind) {
        case SmoothingKind::None: return "none";
        case SmoothingKind::MSR: return "MSR";
        case SmoothingKind::MCR: return "MCR";
    }
    return "unknown";
}

struct SmoothingScheme {
    SmoothingKind kind = SmoothingKind::None;
    std::vector<double> eps;  ///< one radius / half-edge per block

    static SmoothingScheme none() { return {}; }
    static SmoothingScheme msr(std::vector<double> eps) { return {SmoothingKind::MSR, std::move(eps)}; }
    static SmoothingScheme mcr(std::vector<double> eps) { return {SmoothingKind::MCR, std::move(eps)}; }

    bool active() const noexcept { return kind != SmoothingKind::None; }

    void validate(const BlockLayout& layout) const {
        if (!active()) return;
        if (eps.size() != layout.num_blocks())
            throw DimensionError("smoothing: " + std::to_string(eps.size()) + " radii for " +
                                 std::to_string(layout.num_blocks()) + " blocks");
        for (std::size_t i = 0; i < eps.size(); ++i)
            require(eps[i] > 0.0 && std::isfinite(eps[i]), "smoothing: eps_" + std::to_string(i) + " must be positive");
    }
};

/// n!! with 0!! = (-1)!! = 1, exact for n <= 30.
inline std::uint64_t double_factorial(int n) {
    if (n > 30) throw ValidationError("double_factorial: n = " + std::to_string(n) + " overflows (n <= 30)");
    if (n < -1) throw ValidationError("double_factorial: n must be >= -1");
    std::uint64_t out = 1;
    for (int k = n; k > 1; k -= 2) out *= static_cast<std::uint64_t>(k);
    return out;
}

/// Volume of the unit ball in R^n: pi^{n/2} / Gamma(n/2 + 1), using
/// Gamma(n/2+1) = (n/2)! for even n and sqrt(pi) n!! / 2^{(n+1)/2} for odd n.
inline double ball_volume_coeff(int n) {
    require(n >= 1, "ball_volume_coeff: n must be >= 1");
    if (n > 30) return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
    if (n % 2 == 0) {
        double fact = 1.0;
        for (int k = 2; k <= n / 2; ++k) fact *= k;
        return std::pow(std::numbers::pi, n / 2) / fact;
    }
    const double gamma = std::sqrt(std::numbers::pi) * static_cast<double>(double_factorial(n)) /
                         std::pow(2.0, (n + 1) / 2);
    return std::pow(std::numbers::pi, n / 2.0) / gamma;
}

/// kappa_n = 1 for odd n, 2/pi for even n.
inline double kappa(int n) { return n % 2 == 1 ? 1.0 : 2.0 / std::numbers::pi; }

/// kappa_n n!! / (n-1)!!.
inline double sphere_factor(int n) {
    return kappa(n) * static_cast<double>(double_factorial(n)) / static_cast<double>(double_factorial(n - 1));
}

namespace detail {

inline void fill_ball(Eigen::Ref<Eigen::VectorXd> z, double radius, Rng& rng) {
    const Eigen::Index n = z.size();
    double sq = 0.0;
    do {
        for (Eigen::Index j = 0; j < n; ++j) z[j] = rng.normal();
        sq = z.squaredNorm();
    } while (sq == 0.0);
    const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
    z *= r / std::sqrt(sq);
}

inline void fill_cube(Eigen::Ref<Eigen::VectorXd> z, double half_edge, Rng& rng) {
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.uniform(-half_edge, half_edge);
}

}  // namespace detail

/// Writes one perturbation into z (flat, laid out by `layout`). Each block
/// draws from its own child stream of rng.
inline void sample_perturbation_into(const SmoothingScheme& scheme, const BlockLayout& layout, Rng& rng,
                                     Eigen::VectorXd& z) {
    z.setZero(static_cast<Eigen::Index>(layout.total()));
    if (!scheme.active()) return;
    for (std::size_t i = 0; i < layout.num_blocks(); ++i) {
        Rng block_rng = rng.split(i);
        auto seg = z.segment(static_cast<Eigen::Index>(layout.offset(i)), static_cast<Eigen::Index>(layout.dim(i)));
        if (scheme.kind == SmoothingKind::MSR) {
            detail::fill_ball(seg, scheme.eps[i], block_rng);
        } else {
            detail::fill_cube(seg, scheme.eps[i], block_rng);
        }
    }
}

inline BlockVector sample_perturbation(const SmoothingScheme& scheme, const BlockLayout& layout, Rng& rng) {
    require(scheme.active(), "sample_perturbation: smoothing scheme is none");
    scheme.validate(layout);
    Eigen::VectorXd z;
    sample_perturbation_into(scheme, layout, rng, z);
    return BlockVector(layout, std::move(z));
}

struct MonteCarloEstimate {
    BlockVector mean;
    BlockVector std_error;  ///< per-coordinate standard error of the mean
};

/// (1/M) sum_m Phi(x + z_m, xi_m) with z and xi drawn from independent child
/// streams of rng. With the scheme none this is the plain M-sample mean.
inline MonteCarloEstimate smoothed_map_mc(const StochasticMap& map, const BlockVector& x,
                                          const SmoothingScheme& scheme, std::size_t M, Rng& rng) {
    require(M >= 1, "smoothed_map_mc: M must be >= 1");
    require_same_layout(map.layout(), x.layout(), "smoothed_map_mc");
    scheme.validate(map.layout());
    Rng xi_rng = rng.split(0);
    Rng z_rng = rng.split(1);
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z(n), point(n), phi(n);
    // Moments are accumulated about the first draw to limit cancellation.
    Eigen::VectorXd shift;
    for (std::size_t m = 0; m < M; ++m) {
        sample_perturbation_into(scheme, map.layout(), z_rng, z);
        point = x.flat() + z;
        map.sample_into(point, xi_rng, phi);
        if (m == 0) shift = phi;
        const Eigen::VectorXd d = phi - shift;
        sum += d;
        sum_sq += d.cwiseProduct(d);
    }
    const double Md = static_cast<double>(M);
    const Eigen::VectorXd mean_d = sum / Md;
    Eigen::VectorXd se = Eigen::VectorXd::Zero(n);
    if (M > 1) {
        const Eigen::VectorXd var = ((sum_sq - Md * mean_d.cwiseProduct(mean_d)) / (Md - 1.0)).cwiseMax(0.0);
        se = (var / Md).cwiseSqrt();
    }
    return {BlockVector(map.layout(), shift + mean_d), BlockVector(map.layout(), se)};
}

struct SmoothedLipschitz {
    double value = 0.0;
    SmoothingKind kind = SmoothingKind::None;
    std::vector<double> bounds;  ///< C (MSR) or C' (MCR)
    std::vector<int> dims;       ///< n_i (MSR) or {n} (MCR)
    std::vector<double> eps;
};

namespace detail {
inline void check_positive(const std::vector<double>& v, const char* what) {
    require(!v.empty(), std::string(what) + " must be nonempty");
    for (double x : v) require(x > 0.0 && std::isfinite(x), std::string(what) + " entries must be positive");
}
}  // namespace detail

/// sqrt(N) ||C|| max_j kappa_j n_j!!/(n_j-1)!! / eps_j.
inline SmoothedLipschitz msr_lipschitz(const std::vector<double>& C, const std::vector<int>& dims,
                                       const std::vector<double>& eps) {
    detail::check_positive(C, "C");
    detail::check_positive(eps, "eps");
    if (C.size() != dims.size() || C.size() != eps.size())
        throw DimensionError("msr_lipschitz: C, dims and eps must have one entry per block");
    double norm_sq = 0.0;
    for (double c : C) norm_sq += c * c;
    double worst = 0.0;
    for (std::size_t j = 0; j < dims.size(); ++j) {
        require(dims[j] >= 1, "msr_lipschitz: block dimensions must be >= 1");
        worst = std::max(worst, sphere_factor(dims[j]) / eps[j]);
    }
    const double value = std::sqrt(static_cast<double>(C.size())) * std::sqrt(norm_sq) * worst;
    return {value, SmoothingKind::MSR, C, dims, eps};
}

/// sqrt(n) ||C'|| / min_j eps_j.
inline SmoothedLipschitz mcr_lipschitz(const std::vector<double>& Cp, int n_total, const std::vector<double>& eps) {
    detail::check_positive(Cp, "C'");
    detail::check_positive(eps, "eps");
    require(n_total >= 1, "mcr_lipschitz: n must be >= 1");
    double norm_sq = 0.0;
    for (double c : Cp) norm_sq += c * c;
    double min_eps = eps.front();
    for (double e : eps) min_eps = std::min(min_eps, e);
    const double value = std::sqrt(static_cast<double>(n_total)) * std::sqrt(norm_sq) / min_eps;
    return {value, SmoothingKind::MCR, Cp, {n_total}, eps};
}

/// Exact L1 distance between the uniform densities of the cubes x + C(eps)
/// and y + C(eps): 2 when some block is shifted by more than 2 eps_i in the
/// sup-norm, otherwise 2 (1 - prod_i prod_j (1 - |x_i(j) - y_i(j)| / (2 eps_i))).
inline double cube_density_l1(const BlockVector& x, const BlockVector& y, const std::vector<double>& eps) {
    require_same_layout(x.layout(), y.layout(), "cube_density_l1");
    if (eps.size() != x.num_blocks())
        throw DimensionError("cube_density_l1: one eps per block required");
    detail::check_positive(eps, "eps");
    double overlap = 1.0;
    for (std::size_t i = 0; i < x.num_blocks(); ++i) {
        const Eigen::VectorXd d = (x.block(i) - y.block(i)).cwiseAbs();
        if (d.maxCoeff() > 2.0 * eps[i]) return 2.0;
        for (Eigen::Index j = 0; j < d.size(); ++j) overlap *= 1.0 - d[j] / (2.0 * eps[i]);
    }
    return 2.0 * (1.0 - overlap);
}

/// Whether 1 - prod(1 - p_i) <= ||p||_1 holds (it always does on [0,1]^m).
inline bool product_sum_bound_check(const std::vector<double>& p) {
    double prod = 1.0;
    double l1 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        require(p[i] >= 0.0 && p[i] <= 1.0, "product_sum_bound_check: p_" + std::to_string(i) + " outside [0,1]");
        prod *= 1.0 - p[i];
        l1 += p[i];
    }
    return 1.0 - prod <= l1 * (1.0 + 1e-15) + 1e-300;
}

}  // namespace svi
