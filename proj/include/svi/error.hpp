#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace svi {

enum class ErrorKind {
    Dimension,
    Validation,
    Convergence,
    Domain,
    Run,
    Io,
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Dimension: return "dimension";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Run: return "run";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DimensionError : public Error {
public:
    /// `block` is the index of the first offending block, or npos when the
    /// total dimension already disagrees.
    DimensionError(const std::string& what, std::size_t block = npos)
        : Error(ErrorKind::Dimension, what), block_(block) {}

    std::size_t block() const noexcept { return block_; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::size_t block_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

/// An iterative routine stopped at its iteration cap. Carries the last iterate
/// and the residual it had reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate, double residual,
                     std::size_t block = DimensionError::npos)
        : Error(ErrorKind::Convergence, what),
          last_iterate_(std::move(last_iterate)),
          residual_(residual),
          block_(block) {}

    const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
    double residual() const noexcept { return residual_; }
    std::size_t block() const noexcept { return block_; }

private:
    Eigen::VectorXd last_iterate_;
    double residual_;
    std::size_t block_;
};

/// A stochastic approximation run aborted. Identifies the seed and the update
/// index at which the failure happened.
class RunError : public Error {
public:
    RunError(const std::string& what, std::uint64_t seed, std::size_t iteration)
        : Error(ErrorKind::Run, what + " (seed " + std::to_string(seed) + ", iteration " +
                                    std::to_string(iteration) + ")"),
          seed_(seed),
          iteration_(iteration) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::uint64_t seed_;
    std::size_t iteration_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ValidationError(message);
}

}  // namespace svi
