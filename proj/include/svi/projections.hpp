#pragma once

// Euclidean projections onto set blocks and onto Cartesian products of them.
//
// Box, ball, halfspace and whole-space blocks use closed forms. Polyhedra are
// handled by Dykstra's alternating projection over one box (bounds) and one
// halfspace per row of A; unlike plain cyclic projection, Dykstra's correction
// terms make the limit the nearest point of the intersection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "svi/block_vector.hpp"
#include "svi/error.hpp"
#include "svi/sets.hpp"

namespace svi {

struct DykstraConfig {
    std::size_t max_iters = 100000;  ///< full sweeps over all constraint sets
    double tol = 1e-10;              ///< stop when a sweep moves the iterate and the corrections less than this

    void validate() const {
        require(max_iters >= 1, "DykstraConfig.max_iters must be >= 1");
        require(tol > 0.0 && std::isfinite(tol), "DykstraConfig.tol must be positive");
    }
};

namespace detail {

inline Eigen::VectorXd project_halfspace(const Eigen::VectorXd& x, const Eigen::VectorXd& a, double b) {
    const double excess = a.dot(x) - b;
    if (excess <= 0.0) return x;
    return x - (excess / a.squaredNorm()) * a;
}

/// Exact projection onto the affine set where the constraints with positive
/// Dykstra corrections hold with equality. Returns the point when it is
/// feasible and its multipliers are nonnegative, which certifies it as the
/// projection onto the whole polyhedron; otherwise returns nothing.
inline std::optional<Eigen::VectorXd> polish_active_set(const Polyhedron& poly, const Eigen::VectorXd& x0,
                                                        const Eigen::VectorXd& box_corr,
                                                        const Eigen::MatrixXd& row_corr) {
    const Eigen::Index n = x0.size();
    const Eigen::Index m = poly.A.rows();
    const double scale = std::max(box_corr.cwiseAbs().maxCoeff(), m > 0 ? row_corr.cwiseAbs().maxCoeff() : 0.0);
    if (!(scale > 0.0)) return std::nullopt;
    const double cut = 1e-9 * scale;
    const Eigen::VectorXd lo = poly.box_lower();
    const Eigen::VectorXd hi = poly.box_upper();

    // Active constraints as rows g^T y = h, with the sign that makes the
    // multiplier of a binding constraint nonnegative.
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    for (Eigen::Index r = 0; r < m; ++r) {
        if (row_corr.col(r).norm() > cut) {
            rows.push_back(poly.A.row(r).transpose());
            rhs.push_back(poly.b[r]);
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (box_corr[j] > cut) {  // pushed down onto the upper bound
            Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
            e[j] = 1.0;
            rows.push_back(e);
            rhs.push_back(hi[j]);
        } else if (box_corr[j] < -cut) {  // pushed up onto the lower bound
            Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
            e[j] = -1.0;
            rows.push_back(e);
            rhs.push_back(-lo[j]);
        }
    }
    if (rows.empty() || static_cast<Eigen::Index>(rows.size()) > n + m) return std::nullopt;
    const auto k = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd G(k, n);
    Eigen::VectorXd h(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        G.row(i) = rows[static_cast<std::size_t>(i)].transpose();
        h[i] = rhs[static_cast<std::size_t>(i)];
    }
    // y = x0 - G^T mu with G G^T mu = G x0 - h (minimum-norm mu if G is rank deficient).
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(G * G.transpose());
    const Eigen::VectorXd lambda = cod.solve(G * x0 - h);
    const Eigen::VectorXd y = x0 - G.transpose() * lambda;
    const double tiny = 1e-12 * std::max(1.0, x0.cwiseAbs().maxCoeff());
    if ((G * y - h).cwiseAbs().maxCoeff() > tiny) return std::nullopt;
    if (lambda.minCoeff() < -1e-10 * std::max(1.0, lambda.cwiseAbs().maxCoeff())) return std::nullopt;
    if (max_violation(SetBlock{poly}, y) > tiny) return std::nullopt;
    return y;
}

/// Dykstra's algorithm for {A y <= b} cap [lo, hi]. The iterate can stall for
/// many sweeps while the corrections are still moving, so the stopping test
/// requires both to settle and the iterate to be feasible. The result is then
/// polished by an exact solve on the identified active set.
inline Eigen::VectorXd dykstra_polyhedron(const Polyhedron& poly, const Eigen::VectorXd& x0,
                                          const DykstraConfig& cfg, std::size_t block_index) {
    const Eigen::Index n = x0.size();
    const Eigen::Index m = poly.A.rows();
    const bool use_box = poly.has_box();
    const Eigen::VectorXd lo = poly.box_lower();
    const Eigen::VectorXd hi = poly.box_upper();

    // Feasible input is its own projection.
    if (max_violation(SetBlock{poly}, x0) == 0.0) return x0;

    Eigen::VectorXd row_sq(m);
    for (Eigen::Index r = 0; r < m; ++r) row_sq[r] = poly.A.row(r).squaredNorm();

    Eigen::VectorXd x = x0;
    Eigen::VectorXd box_corr = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd row_corr = Eigen::MatrixXd::Zero(n, m);  // column r = correction of halfspace r
    Eigen::VectorXd sweep_start(n);
    Eigen::VectorXd y(n);
    Eigen::VectorXd corr(n);

    double change = 0.0;
    for (std::size_t sweep = 0; sweep < cfg.max_iters; ++sweep) {
        sweep_start = x;
        double corr_change_sq = 0.0;
        if (use_box) {
            y = x + box_corr;
            x = y.cwiseMax(lo).cwiseMin(hi);
            corr = y - x;
            corr_change_sq += (corr - box_corr).squaredNorm();
            box_corr = corr;
        }
        for (Eigen::Index r = 0; r < m; ++r) {
            if (row_sq[r] == 0.0) continue;
            y = x + row_corr.col(r);
            const double excess = poly.A.row(r).dot(y) - poly.b[r];
            if (excess > 0.0) {
                x = y - (excess / row_sq[r]) * poly.A.row(r).transpose();
            } else {
                x = y;
            }
            corr = y - x;
            corr_change_sq += (corr - row_corr.col(r)).squaredNorm();
            row_corr.col(r) = corr;
        }
        change = std::max((x - sweep_start).norm(), std::sqrt(corr_change_sq));
        if (change < cfg.tol && max_violation(SetBlock{poly}, x) <= cfg.tol) {
            if (auto p = polish_active_set(poly, x0, box_corr, row_corr); p && (*p - x).norm() <= 1e3 * cfg.tol + 1e-9)
                return *p;
            return x;
        }
    }
    throw ConvergenceError("Dykstra projection did not converge in " + std::to_string(cfg.max_iters) +
                               " sweeps (block " + std::to_string(block_index) + ")",
                           x, change, block_index);
}

}  // namespace detail

/// Euclidean projection of x onto one set block.
inline Eigen::VectorXd project_block(const SetBlock& block, const Eigen::VectorXd& x,
                                     const DykstraConfig& cfg = {}, std::size_t block_index = 0) {
    if (static_cast<std::size_t>(x.size()) != dimension(block)) {
        throw DimensionError("project_block: vector of size " + std::to_string(x.size()) + " for " +
                                 kind_name(block) + " block " + std::to_string(block_index) + " of dimension " +
                                 std::to_string(dimension(block)),
                             block_index);
    }
    return std::visit(
        [&](const auto& s) -> Eigen::VectorXd {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Box>) {
                return x.cwiseMax(s.lower).cwiseMin(s.upper);
            } else if constexpr (std::is_same_v<T, Ball>) {
                const Eigen::VectorXd d = x - s.center;
                const double r = d.norm();
                if (r <= s.radius) return x;
                return s.center + (s.radius / r) * d;
            } else if constexpr (std::is_same_v<T, Halfspace>) {
                return detail::project_halfspace(x, s.normal, s.offset);
            } else if constexpr (std::is_same_v<T, Polyhedron>) {
                return detail::dykstra_polyhedron(s, x, cfg, block_index);
            } else {
                return x;
            }
        },
        block);
}

/// X = X_1 x ... x X_N with per-block projection.
class CartesianSet {
public:
    CartesianSet() = default;

    /// Validates every block; polyhedral blocks must admit a feasible point,
    /// which is searched for by projecting the origin with Dykstra.
    explicit CartesianSet(std::vector<SetBlock> blocks, const DykstraConfig& cfg = {}) : blocks_(std::move(blocks)) {
        std::vector<std::size_t> dims;
        dims.reserve(blocks_.size());
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            validate_block(blocks_[i], i);
            dims.push_back(dimension(blocks_[i]));
            if (const auto* poly = std::get_if<Polyhedron>(&blocks_[i])) check_nonempty(*poly, i, cfg);
        }
        layout_ = BlockLayout(dims);
    }

    static CartesianSet single(SetBlock block, const DykstraConfig& cfg = {}) {
        return CartesianSet(std::vector<SetBlock>{std::move(block)}, cfg);
    }

    const BlockLayout& layout() const noexcept { return layout_; }
    std::size_t num_blocks() const noexcept { return blocks_.size(); }
    const SetBlock& block(std::size_t i) const { return blocks_.at(i); }
    const std::vector<SetBlock>& blocks() const noexcept { return blocks_; }

    /// Largest violation over all blocks of x (same total dimension as the set).
    double max_violation(const Eigen::VectorXd& x) const {
        if (static_cast<std::size_t>(x.size()) != layout_.total())
            throw DimensionError("CartesianSet::max_violation: size mismatch");
        double v = 0.0;
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            const Eigen::VectorXd xi = x.segment(static_cast<Eigen::Index>(layout_.offset(i)),
                                                 static_cast<Eigen::Index>(layout_.dim(i)));
            v = std::max(v, svi::max_violation(blocks_[i], xi));
        }
        return v;
    }

    bool contains(const Eigen::VectorXd& x, double tol) const { return max_violation(x) <= tol; }

private:
    static void check_nonempty(const Polyhedron& poly, std::size_t index, const DykstraConfig& cfg) {
        const Eigen::VectorXd origin = Eigen::VectorXd::Zero(poly.A.cols());
        try {
            const Eigen::VectorXd y = detail::dykstra_polyhedron(poly, origin, cfg, index);
            if (svi::max_violation(SetBlock{poly}, y) > 10.0 * cfg.tol * (1.0 + poly.b.cwiseAbs().maxCoeff())) {
                throw ValidationError("polyhedron block " + std::to_string(index) + " appears to be empty");
            }
        } catch (const ConvergenceError& e) {
            throw ValidationError("polyhedron block " + std::to_string(index) +
                                  " appears to be empty (no feasible point found, residual " +
                                  std::to_string(e.residual()) + ")");
        }
    }

    std::vector<SetBlock> blocks_;
    BlockLayout layout_;
};

/// Block-wise projection onto a Cartesian set. x may carry any layout with the
/// same total dimension; the result uses the set's layout.
inline BlockVector project_cartesian(const CartesianSet& set, const BlockVector& x, const DykstraConfig& cfg = {}) {
    if (x.layout() != set.layout()) require_same_layout(set.layout(), x.layout(), "project_cartesian");
    BlockVector out(set.layout());
    for (std::size_t i = 0; i < set.num_blocks(); ++i) {
        out.block(i) = project_block(set.block(i), x.block(i), cfg, i);
    }
    return out;
}

/// Projection of a flat vector (used by the engine's hot loop).
inline Eigen::VectorXd project_flat(const CartesianSet& set, const Eigen::VectorXd& x, const DykstraConfig& cfg = {}) {
    const BlockLayout& layout = set.layout();
    if (static_cast<std::size_t>(x.size()) != layout.total())
        throw DimensionError("project_flat: size " + std::to_string(x.size()) + ", set dimension " +
                             std::to_string(layout.total()));
    Eigen::VectorXd out(x.size());
    for (std::size_t i = 0; i < set.num_blocks(); ++i) {
        const auto off = static_cast<Eigen::Index>(layout.offset(i));
        const auto dim = static_cast<Eigen::Index>(layout.dim(i));
        out.segment(off, dim) = project_block(set.block(i), x.segment(off, dim), cfg, i);
    }
    return out;
}

}  // namespace svi
