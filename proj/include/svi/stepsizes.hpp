#pragma once

// Stepsize schedules and the error-bound sequences that certify them.
//
// All recursive rules have the form g_{k+1} = g_k (1 - cbar g_k). They are
// evaluated through the normalized sequence l_k = cbar g_k, which satisfies
// l_{k+1} = l_k (1 - l_k), in long double, and g_k = l_k / cbar is formed
// last. Rules that share a normalized sequence (the per-agent distributed
// rules, the lower/upper bound pair) therefore agree to within one rounding
// of the final division or multiplication.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "svi/error.hpp"

namespace svi {

/// Constants of the adaptive rules.
///
/// eta: strong monotonicity modulus; lip: Lipschitz constant; nu: noise bound;
/// e0: initial error bound; beta: stepsize discrepancy bound; c and r: the
/// distributed rule's constant and per-agent multipliers; diameter: bound on
/// ||x - x0|| over the feasible set. With relaxed_nu, the distributed rule only
/// requires nu >= D instead of nu >= D L / sqrt(2).
struct SchemeParams {
    double eta = 0.0;
    double lip = 0.0;
    double nu = 0.0;
    double e0 = 0.0;
    double beta = 0.0;
    double c = 0.0;
    std::vector<double> r;
    double diameter = 0.0;
    bool relaxed_nu = false;

    /// Relative slack used when comparing derived bounds that may be equal in
    /// exact arithmetic.
    static constexpr double kRelSlack = 1e-12;

    void validate_basic() const {
        require(eta > 0.0 && std::isfinite(eta), "eta must be positive");
        require(lip > 0.0 && std::isfinite(lip), "Lipschitz constant must be positive");
        require(nu > 0.0 && std::isfinite(nu), "nu must be positive");
        require(eta <= lip * (1.0 + kRelSlack), "eta must not exceed the Lipschitz constant");
    }

    /// Centralized adaptive rule: nu >= L sqrt(e0 / 2).
    void validate_asa() const {
        validate_basic();
        require(e0 > 0.0 && std::isfinite(e0), "e0 must be positive");
        require(nu * (1.0 + kRelSlack) >= lip * std::sqrt(e0 / 2.0), "nu must satisfy nu >= L*sqrt(e0/2)");
    }

    /// Lower/upper bound sequences: 0 <= beta < eta/L and 0 < e0 <= 2 nu^2 / L^2.
    void validate_bounds() const {
        validate_basic();
        require(beta >= 0.0 && beta * lip < eta, "beta must satisfy 0 <= beta < eta/L");
        require(e0 > 0.0 && std::isfinite(e0), "e0 must be positive");
        require(e0 <= 2.0 * nu * nu / (lip * lip) * (1.0 + kRelSlack), "e0 must satisfy e0 <= 2*nu^2/L^2");
    }

    double dasa_beta() const { return (eta - 2.0 * c) / lip; }

    /// Distributed adaptive rule for all agents in r.
    void validate_dasa() const {
        validate_basic();
        require(c > 0.0 && c <= eta / 2.0, "c must lie in (0, eta/2]");
        require(diameter > 0.0 && std::isfinite(diameter), "diameter D must be positive");
        require(!r.empty(), "at least one agent multiplier r_i is required");
        const double hi = 1.0 + dasa_beta();
        for (std::size_t i = 0; i < r.size(); ++i) {
            require(r[i] >= 1.0 && r[i] <= hi * (1.0 + kRelSlack),
                    "r_" + std::to_string(i) + " = " + std::to_string(r[i]) + " outside [1, 1+(eta-2c)/L]");
        }
        if (relaxed_nu) {
            require(nu * (1.0 + kRelSlack) >= diameter, "nu must satisfy nu >= D (relaxed mode)");
        } else {
            require(nu * (1.0 + kRelSlack) >= diameter * lip / std::sqrt(2.0), "nu must satisfy nu >= D*L/sqrt(2)");
        }
    }
};

/// theta / k for the 1-indexed iteration k.
inline double harmonic_step(double theta, std::size_t k) {
    require(theta > 0.0, "harmonic_step: theta must be positive");
    require(k >= 1, "harmonic_step: k is 1-indexed (k >= 1)");
    return theta / static_cast<double>(k);
}

/// A stateful stepsize generator. next() returns the stepsize of the current
/// update (0-indexed) and advances.
class StepsizeSchedule {
public:
    struct Harmonic {
        double theta;
    };
    struct Recursive {
        double gamma0;
        double cbar;
    };
    struct Asa {
        SchemeParams params;
    };
    struct Dasa {
        SchemeParams params;
        std::size_t agent;
    };
    struct Explicit {
        std::vector<double> steps;
    };
    using Kind = std::variant<Harmonic, Recursive, Asa, Dasa, Explicit>;

    static StepsizeSchedule harmonic(double theta) {
        require(theta > 0.0 && std::isfinite(theta), "harmonic schedule: theta must be positive");
        return StepsizeSchedule(Harmonic{theta});
    }

    /// g_{k+1} = g_k (1 - cbar g_k) with 0 < g_0 < 1/cbar.
    static StepsizeSchedule recursive(double gamma0, double cbar) {
        require(cbar > 0.0, "recursive schedule: cbar must be positive");
        require(gamma0 > 0.0 && gamma0 * cbar < 1.0, "recursive schedule: need 0 < gamma0 < 1/cbar");
        return StepsizeSchedule(Recursive{gamma0, cbar});
    }

    static StepsizeSchedule asa(const SchemeParams& params) {
        params.validate_asa();
        return StepsizeSchedule(Asa{params});
    }

    static StepsizeSchedule dasa(const SchemeParams& params, std::size_t agent) {
        params.validate_dasa();
        require(agent < params.r.size(), "dasa schedule: agent index out of range");
        return StepsizeSchedule(Dasa{params, agent});
    }

    static StepsizeSchedule explicit_steps(std::vector<double> steps) {
        for (double s : steps) require(s > 0.0 && std::isfinite(s), "explicit schedule: steps must be positive");
        return StepsizeSchedule(Explicit{std::move(steps)});
    }

    const Kind& kind() const noexcept { return kind_; }
    std::size_t index() const noexcept { return k_; }

    /// Stepsize of update k = index(), then advance.
    double next() {
        const double g = current();
        advance();
        return g;
    }

    /// Stepsize of the current update without advancing.
    double current() const {
        return std::visit(
            [&](const auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Harmonic>) {
                    return s.theta / static_cast<double>(k_ + 1);
                } else if constexpr (std::is_same_v<T, Explicit>) {
                    if (k_ >= s.steps.size())
                        throw ValidationError("explicit schedule exhausted after " + std::to_string(s.steps.size()) +
                                              " steps");
                    return s.steps[k_];
                } else {
                    return static_cast<double>(lambda_ * scale_);
                }
            },
            kind_);
    }

    /// Rewind to k = 0.
    void reset() {
        k_ = 0;
        init_lambda();
    }

    /// gamma_0 .. gamma_{K-1}, starting from k = 0 (the schedule is not modified).
    std::vector<double> materialize(std::size_t K) const {
        StepsizeSchedule copy = *this;
        copy.reset();
        std::vector<double> out;
        out.reserve(K);
        for (std::size_t k = 0; k < K; ++k) out.push_back(copy.next());
        return out;
    }

private:
    explicit StepsizeSchedule(Kind kind) : kind_(std::move(kind)) { init_lambda(); }

    void init_lambda() {
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                using LD = long double;
                if constexpr (std::is_same_v<T, Recursive>) {
                    lambda_ = LD(s.cbar) * LD(s.gamma0);
                    scale_ = 1.0L / LD(s.cbar);
                } else if constexpr (std::is_same_v<T, Asa>) {
                    // g0 = eta e0 / (2 nu^2), cbar = eta / 2.
                    const auto& p = s.params;
                    const LD eta = p.eta, nu = p.nu;
                    lambda_ = eta * eta * LD(p.e0) / (4.0L * nu * nu);
                    scale_ = 2.0L / eta;
                } else if constexpr (std::is_same_v<T, Dasa>) {
                    // g_{0,i} = r_i c D^2 / ((1+beta)^2 nu^2), cbar_i = c / r_i; the
                    // normalized sequence c^2 D^2 / ((1+beta)^2 nu^2) is agent-independent.
                    const auto& p = s.params;
                    const LD c = p.c, D = p.diameter, nu = p.nu;
                    const LD onepb = 1.0L + (LD(p.eta) - 2.0L * c) / LD(p.lip);
                    lambda_ = c * c * D * D / (onepb * onepb * nu * nu);
                    scale_ = LD(p.r[s.agent]) / c;
                }
            },
            kind_);
    }

    void advance() {
        ++k_;
        if (std::holds_alternative<Recursive>(kind_) || std::holds_alternative<Asa>(kind_) ||
            std::holds_alternative<Dasa>(kind_)) {
            lambda_ = lambda_ * (1.0L - lambda_);
        }
    }

    Kind kind_;
    std::size_t k_ = 0;
    long double lambda_ = 0.0L;
    long double scale_ = 1.0L;
};

/// gamma*_0 .. gamma*_{K-1} of the centralized adaptive rule.
inline std::vector<double> asa_schedule(const SchemeParams& params, std::size_t K) {
    return StepsizeSchedule::asa(params).materialize(K);
}

/// gamma_{0,i} .. gamma_{K-1,i} of the distributed adaptive rule for agent i.
inline std::vector<double> dasa_schedule(const SchemeParams& params, std::size_t agent, std::size_t K) {
    return StepsizeSchedule::dasa(params, agent).materialize(K);
}

struct BoundSchedules {
    std::vector<double> delta_star;  ///< lower bound sequence, k = 0..K
    std::vector<double> gamma_star;  ///< upper bound sequence, k = 0..K
};

/// delta*_k and Gamma*_k for k = 0..K. With a = (eta - beta L)/2:
/// delta*_0 = a e0 / ((1+beta)^2 nu^2), delta*_k = delta*_{k-1}(1 - a delta*_{k-1});
/// Gamma*_0 = a e0 / ((1+beta) nu^2), Gamma*_k = Gamma*_{k-1}(1 - a/(1+beta) Gamma*_{k-1}).
inline BoundSchedules bound_schedules(const SchemeParams& params, std::size_t K) {
    params.validate_bounds();
    using LD = long double;
    const LD a = (LD(params.eta) - LD(params.beta) * LD(params.lip)) / 2.0L;
    const LD onepb = 1.0L + LD(params.beta);
    const LD nu = params.nu;
    LD lambda = a * a * LD(params.e0) / (onepb * onepb * nu * nu);
    BoundSchedules out;
    out.delta_star.reserve(K + 1);
    out.gamma_star.reserve(K + 1);
    for (std::size_t k = 0; k <= K; ++k) {
        out.delta_star.push_back(static_cast<double>(lambda / a));
        out.gamma_star.push_back(static_cast<double>(onepb * lambda / a));
        lambda = lambda * (1.0L - lambda);
    }
    return out;
}

enum class ErrorVariant { Centralized, Distributed };

/// e_0 .. e_K for the supplied steps (K = steps.size()).
/// Centralized: e_{k+1} = (1 - eta g_k) e_k + g_k^2 nu^2.
/// Distributed: e_{k+1} = (1 - (eta - beta L) d_k) e_k + (1+beta)^2 nu^2 d_k^2.
inline std::vector<double> error_sequence(const SchemeParams& params, const std::vector<double>& steps,
                                          ErrorVariant variant) {
    using LD = long double;
    const bool dist = variant == ErrorVariant::Distributed;
    const LD contraction = dist ? LD(params.eta) - LD(params.beta) * LD(params.lip) : LD(params.eta);
    const LD onepb = dist ? 1.0L + LD(params.beta) : 1.0L;
    const LD noise = onepb * onepb * LD(params.nu) * LD(params.nu);
    std::vector<double> out;
    out.reserve(steps.size() + 1);
    LD e = params.e0;
    out.push_back(static_cast<double>(e));
    for (double s : steps) {
        const LD d = s;
        e = (1.0L - contraction * d) * e + noise * d * d;
        out.push_back(static_cast<double>(e));
    }
    return out;
}

/// Upper end of the feasible stepsize region: (eta - beta L)/((1+beta)^2 L^2)
/// (eta / L^2 for the centralized variant).
inline double feasible_step_bound(const SchemeParams& params, ErrorVariant variant) {
    const double beta = variant == ErrorVariant::Distributed ? params.beta : 0.0;
    return (params.eta - beta * params.lip) / ((1.0 + beta) * (1.0 + beta) * params.lip * params.lip);
}

/// e_K(perturbed) - e_K(optimal), where the optimal steps are the adaptive
/// rule of the variant (gamma* or delta*) and K = perturbed.size().
inline double optimality_gap_check(const SchemeParams& params, const std::vector<double>& perturbed,
                                   ErrorVariant variant) {
    SchemeParams p = params;
    if (variant == ErrorVariant::Centralized) p.beta = 0.0;
    p.validate_bounds();
    const double hi = feasible_step_bound(p, variant);
    for (std::size_t j = 0; j < perturbed.size(); ++j) {
        if (!(perturbed[j] > 0.0 && perturbed[j] <= hi))
            throw ValidationError("optimality_gap_check: step " + std::to_string(j) + " = " +
                                  std::to_string(perturbed[j]) + " outside (0, " + std::to_string(hi) + "]");
    }
    const std::size_t K = perturbed.size();
    std::vector<double> optimal = bound_schedules(p, K).delta_star;
    optimal.resize(K);
    const double e_pert = error_sequence(p, perturbed, variant).back();
    const double e_opt = error_sequence(p, optimal, variant).back();
    return e_pert - e_opt;
}

/// Distance in units in the last place between two finite doubles of equal sign.
inline std::uint64_t ulp_distance(double a, double b) {
    if (a == b) return 0;
    if (!std::isfinite(a) || !std::isfinite(b) || (a < 0) != (b < 0))
        return std::numeric_limits<std::uint64_t>::max();
    std::int64_t ia = 0, ib = 0;
    std::memcpy(&ia, &a, sizeof a);
    std::memcpy(&ib, &b, sizeof b);
    return ia > ib ? static_cast<std::uint64_t>(ia - ib) : static_cast<std::uint64_t>(ib - ia);
}

}  // namespace svi
