#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "svi/error.hpp"

namespace svi {

/// Block partition of R^n: block i covers [offset(i), offset(i) + dim(i)).
class BlockLayout {
public:
    BlockLayout() : offsets_{0} {}

    explicit BlockLayout(const std::vector<std::size_t>& dims) : offsets_{0} {
        offsets_.reserve(dims.size() + 1);
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (dims[i] == 0) throw ValidationError("block " + std::to_string(i) + " has dimension 0");
            offsets_.push_back(offsets_.back() + dims[i]);
        }
    }

    /// One block covering all n coordinates.
    static BlockLayout single(std::size_t n) { return BlockLayout(std::vector<std::size_t>{n}); }

    /// n blocks of dimension one.
    static BlockLayout scalars(std::size_t n) { return BlockLayout(std::vector<std::size_t>(n, 1)); }

    /// `count` blocks of dimension `dim`.
    static BlockLayout uniform(std::size_t count, std::size_t dim) {
        return BlockLayout(std::vector<std::size_t>(count, dim));
    }

    std::size_t num_blocks() const noexcept { return offsets_.size() - 1; }
    std::size_t total() const noexcept { return offsets_.back(); }
    std::size_t offset(std::size_t i) const { return offsets_.at(i); }
    std::size_t dim(std::size_t i) const { return offsets_.at(i + 1) - offsets_.at(i); }

    std::vector<std::size_t> dims() const {
        std::vector<std::size_t> out(num_blocks());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = dim(i);
        return out;
    }

    bool operator==(const BlockLayout& other) const noexcept { return offsets_ == other.offsets_; }
    bool operator!=(const BlockLayout& other) const noexcept { return !(*this == other); }

private:
    std::vector<std::size_t> offsets_;
};

/// Throws DimensionError naming the first block whose dimension differs.
inline void require_same_layout(const BlockLayout& expected, const BlockLayout& actual,
                                const std::string& context) {
    if (expected == actual) return;
    if (expected.total() != actual.total()) {
        throw DimensionError(context + ": total dimension " + std::to_string(actual.total()) +
                             ", expected " + std::to_string(expected.total()));
    }
    const std::size_t common = std::min(expected.num_blocks(), actual.num_blocks());
    for (std::size_t i = 0; i < common; ++i) {
        if (expected.dim(i) != actual.dim(i)) {
            throw DimensionError(context + ": block " + std::to_string(i) + " has dimension " +
                                     std::to_string(actual.dim(i)) + ", expected " +
                                     std::to_string(expected.dim(i)),
                                 i);
        }
    }
    throw DimensionError(context + ": " + std::to_string(actual.num_blocks()) + " blocks, expected " +
                             std::to_string(expected.num_blocks()),
                         common);
}

/// A vector x = (x_1; ...; x_N) stored contiguously with its block layout.
class BlockVector {
public:
    BlockVector() = default;

    explicit BlockVector(BlockLayout layout)
        : layout_(std::move(layout)), data_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_.total()))) {}

    BlockVector(BlockLayout layout, Eigen::VectorXd flat) : layout_(std::move(layout)), data_(std::move(flat)) {
        if (static_cast<std::size_t>(data_.size()) != layout_.total()) {
            throw DimensionError("flat vector has " + std::to_string(data_.size()) +
                                 " entries, layout expects " + std::to_string(layout_.total()));
        }
    }

    /// Builds from per-block vectors.
    static BlockVector from_blocks(const std::vector<Eigen::VectorXd>& blocks) {
        std::vector<std::size_t> dims;
        dims.reserve(blocks.size());
        for (const auto& b : blocks) dims.push_back(static_cast<std::size_t>(b.size()));
        BlockVector out{BlockLayout(dims)};
        for (std::size_t i = 0; i < blocks.size(); ++i)
            out.data_.segment(static_cast<Eigen::Index>(out.layout_.offset(i)), blocks[i].size()) = blocks[i];
        return out;
    }

    const BlockLayout& layout() const noexcept { return layout_; }
    std::size_t num_blocks() const noexcept { return layout_.num_blocks(); }
    std::size_t size() const noexcept { return layout_.total(); }

    const Eigen::VectorXd& flat() const noexcept { return data_; }
    Eigen::VectorXd& flat() noexcept { return data_; }

    auto block(std::size_t i) {
        return data_.segment(static_cast<Eigen::Index>(layout_.offset(i)), static_cast<Eigen::Index>(layout_.dim(i)));
    }
    auto block(std::size_t i) const {
        return data_.segment(static_cast<Eigen::Index>(layout_.offset(i)), static_cast<Eigen::Index>(layout_.dim(i)));
    }

    double& operator[](std::size_t j) { return data_[static_cast<Eigen::Index>(j)]; }
    double operator[](std::size_t j) const { return data_[static_cast<Eigen::Index>(j)]; }

    /// Same coordinates viewed through another layout of equal total dimension.
    BlockVector with_layout(BlockLayout layout) const& { return BlockVector(std::move(layout), data_); }
    BlockVector with_layout(BlockLayout layout) && { return BlockVector(std::move(layout), std::move(data_)); }

    BlockVector& operator+=(const BlockVector& rhs) {
        require_same_layout(layout_, rhs.layout_, "BlockVector +=");
        data_ += rhs.data_;
        return *this;
    }
    BlockVector& operator-=(const BlockVector& rhs) {
        require_same_layout(layout_, rhs.layout_, "BlockVector -=");
        data_ -= rhs.data_;
        return *this;
    }
    BlockVector& operator*=(double s) {
        data_ *= s;
        return *this;
    }

    friend BlockVector operator+(BlockVector lhs, const BlockVector& rhs) { return lhs += rhs; }
    friend BlockVector operator-(BlockVector lhs, const BlockVector& rhs) { return lhs -= rhs; }
    friend BlockVector operator*(double s, BlockVector v) { return v *= s; }
    friend BlockVector operator*(BlockVector v, double s) { return v *= s; }

    double dot(const BlockVector& other) const {
        require_same_layout(layout_, other.layout_, "BlockVector dot");
        return data_.dot(other.data_);
    }
    double norm() const { return data_.norm(); }
    double squared_norm() const { return data_.squaredNorm(); }

    bool operator==(const BlockVector& other) const {
        return layout_ == other.layout_ && data_.size() == other.data_.size() && data_ == other.data_;
    }

private:
    BlockLayout layout_;
    Eigen::VectorXd data_;
};

inline double squared_distance(const BlockVector& a, const BlockVector& b) {
    if (a.size() != b.size()) throw DimensionError("squared_distance: size mismatch");
    return (a.flat() - b.flat()).squaredNorm();
}

}  // namespace svi
