#pragma once

// Expectation-valued maps F(x) = E[Phi(x, xi)] and the problem bundle
// (map, feasible set, regularization) consumed by the SA engine.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "svi/block_vector.hpp"
#include "svi/error.hpp"
#include "svi/projections.hpp"
#include "svi/rng.hpp"

namespace svi {

/// Problem constants, when known. comp_bounds holds per-block bounds C_i on
/// ||F_i(x)|| over the (possibly enlarged) domain.
struct MapConstants {
    std::optional<double> eta;
    std::optional<double> lip;
    std::vector<double> comp_bounds;
    std::optional<double> noise_sq;  ///< nu^2 with E||Phi - F||^2 <= nu^2
};

class StochasticMap {
public:
    /// Writes one draw Phi(x, xi) into `out` (already sized like x).
    using Sampler = std::function<void(const Eigen::VectorXd& x, Rng& rng, Eigen::VectorXd& out)>;
    using MeanMap = std::function<Eigen::VectorXd(const Eigen::VectorXd& x)>;

    StochasticMap() = default;

    StochasticMap(BlockLayout layout, Sampler sampler, std::optional<MeanMap> exact_mean = std::nullopt,
                  MapConstants constants = {})
        : layout_(std::move(layout)),
          sampler_(std::move(sampler)),
          exact_mean_(std::move(exact_mean)),
          constants_(std::move(constants)) {
        require(static_cast<bool>(sampler_), "StochasticMap: sampler must be callable");
        if (!constants_.comp_bounds.empty() && constants_.comp_bounds.size() != layout_.num_blocks()) {
            throw DimensionError("StochasticMap: " + std::to_string(constants_.comp_bounds.size()) +
                                 " component bounds for " + std::to_string(layout_.num_blocks()) + " blocks");
        }
    }

    const BlockLayout& layout() const noexcept { return layout_; }
    std::size_t dim() const noexcept { return layout_.total(); }
    const MapConstants& constants() const noexcept { return constants_; }
    MapConstants& constants() noexcept { return constants_; }
    bool has_exact_mean() const noexcept { return exact_mean_.has_value(); }

    /// Unchecked flat sampling for hot loops; `out` is resized if needed.
    void sample_into(const Eigen::VectorXd& x, Rng& rng, Eigen::VectorXd& out) const {
        if (out.size() != x.size()) out.resize(x.size());
        sampler_(x, rng, out);
    }

    Eigen::VectorXd sample_flat(const Eigen::VectorXd& x, Rng& rng) const {
        Eigen::VectorXd out(x.size());
        sampler_(x, rng, out);
        return out;
    }

    Eigen::VectorXd mean_flat(const Eigen::VectorXd& x) const {
        if (!exact_mean_) throw ValidationError("StochasticMap: no exact mean map available");
        return (*exact_mean_)(x);
    }

private:
    BlockLayout layout_;
    Sampler sampler_;
    std::optional<MeanMap> exact_mean_;
    MapConstants constants_;
};

/// One unbiased draw Phi(x, xi). The block structure of x must match the map.
inline BlockVector sample_map(const StochasticMap& map, const BlockVector& x, Rng& rng) {
    require_same_layout(map.layout(), x.layout(), "sample_map");
    return BlockVector(map.layout(), map.sample_flat(x.flat(), rng));
}

/// F(x) from the analytic mean map.
inline BlockVector exact_mean(const StochasticMap& map, const BlockVector& x) {
    require_same_layout(map.layout(), x.layout(), "exact_mean");
    return BlockVector(map.layout(), map.mean_flat(x.flat()));
}

/// ||x - P_X(x - gamma f_hat)||. x and f_hat share a layout whose total
/// dimension equals the set's; the set's own block structure is used for the
/// projection.
inline double natural_residual(const BlockVector& x, const BlockVector& f_hat, const CartesianSet& set, double gamma,
                               const DykstraConfig& cfg = {}) {
    require(gamma > 0.0, "natural_residual: gamma must be positive");
    require_same_layout(x.layout(), f_hat.layout(), "natural_residual");
    if (x.size() != set.layout().total())
        throw DimensionError("natural_residual: point of dimension " + std::to_string(x.size()) +
                             ", set of dimension " + std::to_string(set.layout().total()));
    const Eigen::VectorXd y = project_flat(set, x.flat() - gamma * f_hat.flat(), cfg);
    return (x.flat() - y).norm();
}

/// A Cartesian stochastic VI with map F(x) + regularization * x.
///
/// The map's layout defines the stepsize groups (agents); the set's layout
/// defines projection blocks. They usually coincide, but a jointly
/// constrained problem may use one projection block for several agents.
struct VIProblem {
    StochasticMap map;
    CartesianSet set;
    double regularization = 0.0;

    const BlockLayout& groups() const noexcept { return map.layout(); }
    std::size_t dim() const noexcept { return map.dim(); }

    void validate() const {
        require(regularization >= 0.0 && std::isfinite(regularization), "VIProblem: regularization must be >= 0");
        if (map.dim() != set.layout().total())
            throw DimensionError("VIProblem: map dimension " + std::to_string(map.dim()) + " differs from set dimension " +
                                 std::to_string(set.layout().total()));
    }

    /// F(x) + regularization * x from the analytic mean map.
    Eigen::VectorXd mean_flat(const Eigen::VectorXd& x) const {
        Eigen::VectorXd f = map.mean_flat(x);
        if (regularization != 0.0) f += regularization * x;
        return f;
    }
};

}  // namespace svi
