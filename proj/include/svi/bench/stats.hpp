#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "svi/error.hpp"

namespace svi::bench {

inline double mean(const std::vector<double>& v) {
    require(!v.empty(), "mean of an empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample standard deviation with the R - 1 divisor.
inline double sample_stddev(const std::vector<double>& v) {
    require(v.size() >= 2, "sample standard deviation needs at least two values");
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct ConfidenceInterval {
    double lo = 0.0;
    double mean = 0.0;
    double hi = 0.0;
};

/// Two-sided normal-approximation interval mean -/+ z s / sqrt(R), with z
/// the (1 + level)/2 standard normal quantile (1.6449 for level 0.9).
inline ConfidenceInterval confidence_interval(const std::vector<double>& samples, double level) {
    require(samples.size() >= 2, "confidence_interval: at least two samples are required");
    require(level >= 0.0 && level < 1.0, "confidence_interval: level must lie in [0, 1)");
    const double m = mean(samples);
    const double s = sample_stddev(samples);
    double z = 0.0;
    if (level > 0.0) z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 * (1.0 + level));
    const double half = z * s / std::sqrt(static_cast<double>(samples.size()));
    return {m - half, m, m + half};
}

}  // namespace svi::bench
