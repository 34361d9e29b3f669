#pragma once

// Networked stochastic Nash-Cournot game: N firms sell s_ij and generate g_ij
// at M nodes, with price a_j - b_j S_j^sigma at node j (S_j = sum_i s_ij) and
// linear generation cost c_ij g_ij. Firm i's decision x_i = (s_i.; g_i.) lies in
// { sum_j g_ij = sum_j s_ij, 0 <= g_ij <= cap, 0 <= s_ij <= cap' }.
//
// The VI map is the gradient of each firm's cost in its own variables:
//   sales:      -(a_j - b_j S_j^sigma) + b_j sigma S_j^{sigma-1} s_ij
//   generation: c_ij
// solved with Tikhonov regularization eta_reg x. For sigma > 1 the map is not
// Lipschitz near S = 0, which is what the smoothing schemes address.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svi/error.hpp"
#include "svi/projections.hpp"
#include "svi/rng.hpp"
#include "svi/smoothing.hpp"
#include "svi/stepsizes.hpp"
#include "svi/stochastic_map.hpp"

namespace svi::problems {

enum class StartPoint { P1, P2, P3 };

inline const char* to_string(StartPoint p) noexcept {
    switch (p) {
        case StartPoint::P1: return "P1";
        case StartPoint::P2: return "P2";
        case StartPoint::P3: return "P3";
    }
    return "?";
}

struct CournotSettings {
    std::string name = "custom";
    double eps = 0.1;        ///< smoothing radius / half-edge, shared by all firms
    double eta_reg = 0.1;    ///< regularization parameter
    StartPoint x0 = StartPoint::P1;
    double M_a = 1.0;        ///< multiplier of the price intercepts a_j
    double cap = 1.0;        ///< generation capacity cap_ij
    double cap_prime = 3.0;  ///< sales bound cap'_ij

    void validate() const {
        require(eps > 0.0 && std::isfinite(eps), "cournot settings " + name + ": eps must be positive");
        require(eta_reg > 0.0 && std::isfinite(eta_reg), "cournot settings " + name + ": eta_reg must be positive");
        require(M_a > 0.0 && cap > 0.0 && cap_prime > 0.0,
                "cournot settings " + name + ": M_a, cap and cap' must be positive");
    }
};

/// The twelve sensitivity settings S1..S12 (eps, eta, x0, M_a, cap, cap').
inline std::vector<CournotSettings> cournot_default_settings() {
    using P = StartPoint;
    return {
        {"S1", 0.1, 0.1, P::P1, 1, 1, 3},     {"S2", 0.001, 0.1, P::P1, 1, 1, 3},  {"S3", 0.0001, 0.1, P::P1, 1, 1, 3},
        {"S4", 0.1, 0.1, P::P2, 1, 10, 1},    {"S5", 0.1, 0.05, P::P2, 1, 10, 1},  {"S6", 0.1, 0.01, P::P2, 1, 10, 1},
        {"S7", 0.1, 1, P::P1, 6, 10, 1},      {"S8", 0.1, 1, P::P2, 6, 10, 1},     {"S9", 0.1, 1, P::P3, 6, 10, 1},
        {"S10", 0.01, 0.5, P::P2, 2, 1, 3},   {"S11", 0.01, 0.5, P::P2, 4, 1, 3},  {"S12", 0.01, 0.5, P::P2, 6, 1, 3},
    };
}

/// Fixed market data. Intercepts a_j ~ M_a U[a_lo, a_hi_j] and slopes
/// b_j ~ U[b_lo, b_hi] are drawn once per sample and shared by all firms.
struct CournotModel {
    std::size_t firms = 5;
    std::size_t nodes = 3;
    double sigma = 1.1;
    double a_lo = 1.0;
    std::vector<double> a_hi = {1.5, 2.0, 2.5};
    double b_lo = 0.04;
    double b_hi = 0.05;
    Eigen::MatrixXd cost;  ///< firms x nodes; empty means all ones

    void validate() const {
        require(firms >= 1 && nodes >= 1, "cournot model: need at least one firm and one node");
        require(nodes <= 16, "cournot model: at most 16 nodes are supported");
        require(sigma >= 1.0, "cournot model: sigma must be >= 1");
        require(a_hi.size() == nodes, "cournot model: one intercept upper bound per node");
        for (double h : a_hi) require(h >= a_lo, "cournot model: intercept bounds out of order");
        require(0.0 <= b_lo && b_lo <= b_hi, "cournot model: slope bounds out of order");
        if (cost.size() != 0)
            require(cost.rows() == static_cast<Eigen::Index>(firms) && cost.cols() == static_cast<Eigen::Index>(nodes),
                    "cournot model: cost matrix must be firms x nodes");
    }

    Eigen::MatrixXd cost_matrix() const {
        if (cost.size() != 0) return cost;
        return Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(firms), static_cast<Eigen::Index>(nodes));
    }
};

struct CournotConstants {
    double eta = 0.0;                 ///< eta_reg
    std::vector<double> comp_bounds;  ///< per-firm bound on ||F_i|| over the enlarged set (C = C')
    double noise_sq = 0.0;            ///< bound on E||Phi - F||^2 over the enlarged set
    double diameter = 0.0;            ///< ||(cap'; cap)|| over all firms
    SmoothedLipschitz msr;
    SmoothedLipschitz mcr;
    std::vector<double> r_msr;
    std::vector<double> r_mcr;
};

struct CournotInstance {
    CournotSettings settings;
    CournotModel model;
    VIProblem problem;  ///< map F with regularization eta_reg
    BlockVector x0;     ///< projection of the nominal start point onto X
    CournotConstants constants;

    SmoothingScheme smoothing(SmoothingKind kind) const {
        return SmoothingScheme{kind, std::vector<double>(model.firms, settings.eps)};
    }

    /// Lipschitz constant of F^eps + eta_reg I for the given scheme.
    double smoothed_lipschitz(SmoothingKind kind) const {
        require(kind != SmoothingKind::None, "cournot: the unsmoothed map has no Lipschitz certificate");
        return (kind == SmoothingKind::MSR ? constants.msr.value : constants.mcr.value) + settings.eta_reg;
    }

    /// Distributed adaptive rule parameters for the smoothed, regularized map,
    /// with c = eta/4, e0 = D^2 and the relaxed noise condition nu >= D.
    SchemeParams dasa_params(SmoothingKind kind) const {
        SchemeParams p;
        p.eta = settings.eta_reg;
        p.lip = smoothed_lipschitz(kind);
        double c_sq = 0.0;
        for (double c : constants.comp_bounds) c_sq += c * c;
        p.nu = std::max(std::sqrt(constants.noise_sq + c_sq), constants.diameter);
        p.c = p.eta / 4.0;
        p.beta = (p.eta - 2.0 * p.c) / p.lip;
        p.r = kind == SmoothingKind::MSR ? constants.r_msr : constants.r_mcr;
        p.diameter = constants.diameter;
        p.e0 = p.diameter * p.diameter;
        p.relaxed_nu = true;
        return p;
    }
};

namespace detail {

/// Stack storage for per-node market draws (nodes <= kMaxNodes).
constexpr int kMaxNodes = 16;
using NodeVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxNodes, 1>;

/// Price curve through the odd extension S -> sign(S)|S|^sigma, which keeps
/// the map defined on the smoothing-enlarged set where aggregate sales may be
/// slightly negative. Writes the map value for intercepts a and slopes b.
template <class VecA, class VecB>
void cournot_eval(const Eigen::VectorXd& x, const VecA& a, const VecB& b, const Eigen::MatrixXd& cost, double sigma,
                  Eigen::Index N, Eigen::Index M, Eigen::VectorXd& out) {
    const Eigen::Index dim = 2 * M;
    for (Eigen::Index j = 0; j < M; ++j) {
        double S = 0.0;
        for (Eigen::Index i = 0; i < N; ++i) S += x[i * dim + j];
        const double p = std::pow(std::abs(S), sigma - 1.0);  // |S|^{sigma-1}
        const double price = a[j] - b[j] * S * p;
        const double slope = b[j] * sigma * p;
        for (Eigen::Index i = 0; i < N; ++i) {
            out[i * dim + j] = -price + slope * x[i * dim + j];
            out[i * dim + M + j] = cost(i, j);
        }
    }
}

}  // namespace detail

/// Builds the instance. Per-firm DASA multipliers are drawn with `seed`.
inline CournotInstance cournot_instance(const CournotSettings& settings, std::uint64_t seed,
                                        const CournotModel& model = {}) {
    settings.validate();
    model.validate();
    CournotInstance inst;
    inst.settings = settings;
    inst.model = model;
    const std::size_t N = model.firms, M = model.nodes;
    const double sigma = model.sigma;
    const Eigen::MatrixXd cost = model.cost_matrix();
    const BlockLayout layout = BlockLayout::uniform(N, 2 * M);

    Eigen::VectorXd a_lo(static_cast<Eigen::Index>(M)), a_hi(static_cast<Eigen::Index>(M));
    for (std::size_t j = 0; j < M; ++j) {
        a_lo[static_cast<Eigen::Index>(j)] = settings.M_a * model.a_lo;
        a_hi[static_cast<Eigen::Index>(j)] = settings.M_a * model.a_hi[j];
    }
    const Eigen::VectorXd a_mean = 0.5 * (a_lo + a_hi);
    const Eigen::VectorXd b_mean = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(M), 0.5 * (model.b_lo + model.b_hi));
    const double b_lo = model.b_lo, b_hi = model.b_hi;

    const auto Ni = static_cast<Eigen::Index>(N), Mi = static_cast<Eigen::Index>(M);
    StochasticMap::Sampler sampler = [=](const Eigen::VectorXd& x, Rng& rng, Eigen::VectorXd& out) {
        detail::NodeVector a(Mi), b(Mi);
        for (Eigen::Index j = 0; j < Mi; ++j) {
            a[j] = rng.uniform(a_lo[j], a_hi[j]);
            b[j] = rng.uniform(b_lo, b_hi);
        }
        detail::cournot_eval(x, a, b, cost, sigma, Ni, Mi, out);
    };
    StochasticMap::MeanMap mean_map = [=](const Eigen::VectorXd& x) {
        Eigen::VectorXd out(x.size());
        detail::cournot_eval(x, a_mean, b_mean, cost, sigma, Ni, Mi, out);
        return out;
    };

    // Bounds over the enlarged set: every coordinate moves by at most eps.
    CournotConstants& k = inst.constants;
    k.eta = settings.eta_reg;
    const double eps = settings.eps;
    const double s_max = std::min(settings.cap_prime, static_cast<double>(M) * settings.cap) + eps;
    const double S_max = static_cast<double>(N) * s_max;
    const double S_pow = std::pow(S_max, sigma);
    const double S_slope = sigma * std::pow(S_max, sigma - 1.0);
    double noise_sq = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double ci_sq = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double fs = a_mean[jj] + b_mean[jj] * (S_pow + S_slope * s_max);
            const double cij = cost(static_cast<Eigen::Index>(i), jj);
            ci_sq += fs * fs + cij * cij;
            const double var_a = (a_hi[jj] - a_lo[jj]) * (a_hi[jj] - a_lo[jj]) / 12.0;
            const double var_b = (b_hi - b_lo) * (b_hi - b_lo) / 12.0;
            const double coef = S_pow + S_slope * s_max;
            noise_sq += var_a + var_b * coef * coef;
        }
        k.comp_bounds.push_back(std::sqrt(ci_sq));
    }
    k.noise_sq = noise_sq;
    k.diameter = std::sqrt(static_cast<double>(N * M) *
                           (settings.cap_prime * settings.cap_prime + settings.cap * settings.cap));
    const std::vector<double> eps_vec(N, eps);
    k.msr = msr_lipschitz(k.comp_bounds, std::vector<int>(N, static_cast<int>(2 * M)), eps_vec);
    k.mcr = mcr_lipschitz(k.comp_bounds, static_cast<int>(N * 2 * M), eps_vec);
    Rng r_rng = Rng::substream(seed, 0x434eull);
    for (SmoothingKind kind : {SmoothingKind::MSR, SmoothingKind::MCR}) {
        const double lip = (kind == SmoothingKind::MSR ? k.msr.value : k.mcr.value) + settings.eta_reg;
        const double r_hi = 1.0 + (settings.eta_reg - 2.0 * settings.eta_reg / 4.0) / lip;
        auto& r = kind == SmoothingKind::MSR ? k.r_msr : k.r_mcr;
        for (std::size_t i = 0; i < N; ++i) r.push_back(r_rng.uniform(1.0, r_hi));
    }

    MapConstants mc;
    mc.eta = settings.eta_reg;
    mc.comp_bounds = k.comp_bounds;
    mc.noise_sq = k.noise_sq;
    inst.problem.map = StochasticMap(layout, sampler, mean_map, mc);
    inst.problem.regularization = settings.eta_reg;

    // Per-firm set: balance sum g = sum s as two opposing halfspaces, plus bounds.
    Eigen::MatrixXd A(2, static_cast<Eigen::Index>(2 * M));
    A.setZero();
    A.row(0).head(static_cast<Eigen::Index>(M)).setOnes();
    A.row(0).tail(static_cast<Eigen::Index>(M)).setConstant(-1.0);
    A.row(1) = -A.row(0);
    Eigen::VectorXd upper(static_cast<Eigen::Index>(2 * M));
    upper.head(static_cast<Eigen::Index>(M)).setConstant(settings.cap_prime);
    upper.tail(static_cast<Eigen::Index>(M)).setConstant(settings.cap);
    std::vector<SetBlock> blocks(N, SetBlock{Polyhedron{A, Eigen::VectorXd::Zero(2), true, upper}});
    inst.problem.set = CartesianSet(blocks);

    Eigen::VectorXd nominal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N * 2 * M));
    if (settings.x0 != StartPoint::P1) {
        const double scale = settings.x0 == StartPoint::P2 ? 0.5 : 1.0;
        for (std::size_t i = 0; i < N; ++i)
            nominal.segment(static_cast<Eigen::Index>(i * 2 * M), static_cast<Eigen::Index>(2 * M)) = scale * upper;
    }
    inst.x0 = BlockVector(layout, project_flat(inst.problem.set, nominal, DykstraConfig{100000, 1e-13}));
    return inst;
}

}  // namespace svi::problems
