#pragma once

// Closed convex set blocks. Each block of a Cartesian feasible set is one of
// the kinds below; projections live in projections.hpp.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>

#include <Eigen/Dense>

#include "svi/error.hpp"

namespace svi {

struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

struct Ball {
    Eigen::VectorXd center;
    double radius = 0.0;
};

/// { y : normal^T y <= offset }
struct Halfspace {
    Eigen::VectorXd normal;
    double offset = 0.0;
};

/// { y : A y <= b } intersected with the box [lower, upper]. With `nonneg`
/// set, lower = 0; an empty `upper` means no upper bounds.
struct Polyhedron {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    bool nonneg = false;
    Eigen::VectorXd upper;

    Eigen::VectorXd box_lower() const {
        const double lo = nonneg ? 0.0 : -std::numeric_limits<double>::infinity();
        return Eigen::VectorXd::Constant(A.cols(), lo);
    }
    Eigen::VectorXd box_upper() const {
        if (upper.size() == 0) return Eigen::VectorXd::Constant(A.cols(), std::numeric_limits<double>::infinity());
        return upper;
    }
    bool has_box() const { return nonneg || upper.size() > 0; }
};

struct WholeSpace {
    std::size_t dim = 0;
};

using SetBlock = std::variant<Box, Ball, Halfspace, Polyhedron, WholeSpace>;

inline std::size_t dimension(const SetBlock& block) {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Box>) return static_cast<std::size_t>(s.lower.size());
            else if constexpr (std::is_same_v<T, Ball>) return static_cast<std::size_t>(s.center.size());
            else if constexpr (std::is_same_v<T, Halfspace>) return static_cast<std::size_t>(s.normal.size());
            else if constexpr (std::is_same_v<T, Polyhedron>) return static_cast<std::size_t>(s.A.cols());
            else return s.dim;
        },
        block);
}

inline const char* kind_name(const SetBlock& block) {
    constexpr const char* names[] = {"box", "ball", "halfspace", "polyhedron", "whole-space"};
    return names[block.index()];
}

/// Largest constraint violation of y (0 when feasible).
inline double max_violation(const SetBlock& block, const Eigen::VectorXd& y) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Box>) {
                return std::max({0.0, (s.lower - y).maxCoeff(), (y - s.upper).maxCoeff()});
            } else if constexpr (std::is_same_v<T, Ball>) {
                return std::max(0.0, (y - s.center).norm() - s.radius);
            } else if constexpr (std::is_same_v<T, Halfspace>) {
                return std::max(0.0, s.normal.dot(y) - s.offset);
            } else if constexpr (std::is_same_v<T, Polyhedron>) {
                double v = 0.0;
                if (s.A.rows() > 0) v = std::max(v, (s.A * y - s.b).maxCoeff());
                if (s.nonneg) v = std::max(v, (-y).maxCoeff());
                if (s.upper.size() > 0) v = std::max(v, (y - s.upper).maxCoeff());
                return v;
            } else {
                return 0.0;
            }
        },
        block);
}

/// Structural checks that are decidable without iteration. Polyhedron
/// nonemptiness is checked by CartesianSet.
inline void validate_block(const SetBlock& block, std::size_t index) {
    const std::string where = "set block " + std::to_string(index) + " (" + kind_name(block) + ")";
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Box>) {
                if (s.lower.size() != s.upper.size()) throw DimensionError(where + ": bound sizes differ", index);
                for (Eigen::Index j = 0; j < s.lower.size(); ++j) {
                    if (!(s.lower[j] <= s.upper[j]))
                        throw ValidationError(where + ": lower > upper at coordinate " + std::to_string(j));
                }
            } else if constexpr (std::is_same_v<T, Ball>) {
                if (!(s.radius >= 0.0) || !std::isfinite(s.radius))
                    throw ValidationError(where + ": radius must be finite and nonnegative");
            } else if constexpr (std::is_same_v<T, Halfspace>) {
                if (s.normal.squaredNorm() == 0.0) {
                    if (s.offset < 0.0) throw ValidationError(where + ": empty (0 <= offset fails)");
                    throw ValidationError(where + ": zero normal");
                }
            } else if constexpr (std::is_same_v<T, Polyhedron>) {
                if (s.A.rows() != s.b.size()) throw DimensionError(where + ": A and b row counts differ", index);
                if (s.upper.size() != 0 && s.upper.size() != s.A.cols())
                    throw DimensionError(where + ": upper bound size differs from A columns", index);
                if (s.A.cols() == 0) throw ValidationError(where + ": zero dimension");
                if (s.nonneg && s.upper.size() > 0 && s.upper.minCoeff() < 0.0)
                    throw ValidationError(where + ": negative upper bound with nonnegativity");
            } else {
                if (s.dim == 0) throw ValidationError(where + ": zero dimension");
            }
        },
        block);
}

}  // namespace svi
