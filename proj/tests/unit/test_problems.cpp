#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "svi/error.hpp"
#include "svi/problems/bandwidth.hpp"
#include "svi/problems/cournot.hpp"
#include "svi/problems/piecewise.hpp"
#include "svi/problems/quadratic.hpp"
#include "svi/rng.hpp"

using namespace svi;
using namespace svi::problems;

namespace {

/// Random feasible point: a random vector projected onto the set.
Eigen::VectorXd random_feasible(const VIProblem& prob, Rng& rng, double spread) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(prob.dim()));
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.uniform(-0.2 * spread, spread);
    return project_flat(prob.set, x, DykstraConfig{100000, 1e-12});
}

}  // namespace

TEST(Bandwidth, DefaultTopologyShape) {
    const BandwidthTopology t = BandwidthTopology::default_topology();
    EXPECT_EQ(t.A.rows(), 20);
    EXPECT_EQ(t.A.cols(), 9);
    EXPECT_EQ(t.user_routes.size(), 5u);
    EXPECT_NO_THROW(t.validate());
}

TEST(Bandwidth, MeanAtOriginIsMinusMeanWeights) {
    for (const auto& s : bandwidth_default_settings()) {
        const BandwidthInstance inst = bandwidth_instance(s, 1);
        const Eigen::VectorXd f = inst.problem.map.mean_flat(Eigen::VectorXd::Zero(9));
        EXPECT_LE((f + inst.xi_mean).cwiseAbs().maxCoeff(), 1e-15) << s.name;
    }
}

TEST(Bandwidth, DiameterFromRouteCountAndLargestCapacity) {
    const BandwidthInstance inst = bandwidth_instance(bandwidth_default_settings()[0], 1);
    EXPECT_DOUBLE_EQ(inst.constants.diameter, 3.0 * inst.capacities.maxCoeff());
    // Every feasible point lies within D of the start point 0.
    Rng rng(3);
    for (int t = 0; t < 200; ++t)
        ASSERT_LE(random_feasible(inst.problem, rng, 50.0).norm(), inst.constants.diameter);
}

TEST(Bandwidth, MonotonicityAndLipschitzOnSampledPairs) {
    Rng rng(5);
    for (const auto& s : bandwidth_default_settings()) {
        const BandwidthInstance inst = bandwidth_instance(s, 1);
        const double scale = inst.capacities.maxCoeff();
        for (int t = 0; t < 200; ++t) {
            const Eigen::VectorXd x = random_feasible(inst.problem, rng, scale);
            const Eigen::VectorXd y = random_feasible(inst.problem, rng, scale);
            const Eigen::VectorXd d = x - y;
            if (d.norm() == 0.0) continue;
            const Eigen::VectorXd df = inst.problem.map.mean_flat(x) - inst.problem.map.mean_flat(y);
            ASSERT_GE(df.dot(d), inst.constants.eta * d.squaredNorm() * (1.0 - 1e-9)) << s.name;
            ASSERT_LE(df.norm(), inst.constants.lip * d.norm() * (1.0 + 1e-9)) << s.name;
        }
    }
}

TEST(Bandwidth, SampleNoiseWithinBound) {
    const BandwidthInstance inst = bandwidth_instance(bandwidth_default_settings()[8], 1);
    Rng rng(7);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(9, 0.3);
    const Eigen::VectorXd F = inst.problem.map.mean_flat(x);
    double acc = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) acc += (inst.problem.map.sample_flat(x, rng) - F).squaredNorm();
    EXPECT_LE(acc / n, inst.constants.noise_sq * 1.05);
    EXPECT_LE(std::sqrt(inst.constants.noise_sq), inst.constants.nu);
}

TEST(Bandwidth, MultipliersInAdmissibleRange) {
    const BandwidthInstance inst = bandwidth_instance(bandwidth_default_settings()[0], 9);
    const SchemeParams p = inst.dasa_params();
    EXPECT_NO_THROW(p.validate_dasa());
    for (double r : p.r) {
        EXPECT_GE(r, 1.0);
        EXPECT_LE(r, 1.0 + p.dasa_beta());
    }
}

TEST(Bandwidth, InvalidSettingsAreRejected) {
    BandwidthSettings s;
    s.m_b = 0.0;
    EXPECT_THROW(bandwidth_instance(s, 1), ValidationError);
    s = BandwidthSettings{};
    s.m_xi = 0.1;
    s.d_xi = 10.0;  // weights would become negative
    EXPECT_THROW(bandwidth_instance(s, 1), ValidationError);
}

TEST(Cournot, MeanAtOrigin) {
    const CournotInstance inst = cournot_instance(cournot_default_settings()[0], 1);
    const Eigen::VectorXd f = inst.problem.map.mean_flat(Eigen::VectorXd::Zero(30));
    const double a_mean[] = {1.25, 1.5, 1.75};
    for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
            EXPECT_DOUBLE_EQ(f[i * 6 + j], -a_mean[j]);
            EXPECT_EQ(f[i * 6 + 3 + j], 1.0);
        }
    }
}

TEST(Cournot, RegularizedMapIsStronglyMonotoneOnTheSet) {
    Rng rng(11);
    for (const auto& s : cournot_default_settings()) {
        const CournotInstance inst = cournot_instance(s, 1);
        for (int t = 0; t < 200; ++t) {
            const Eigen::VectorXd x = random_feasible(inst.problem, rng, s.cap_prime);
            const Eigen::VectorXd y = random_feasible(inst.problem, rng, s.cap_prime);
            const Eigen::VectorXd d = x - y;
            const double lhs = (inst.problem.mean_flat(x) - inst.problem.mean_flat(y)).dot(d);
            ASSERT_GE(lhs, s.eta_reg * d.squaredNorm() * (1.0 - 1e-9) - 1e-14) << s.name;
        }
    }
}

TEST(Cournot, LinearPriceGivesAffineMap) {
    CournotModel model;
    model.sigma = 1.0;
    const CournotInstance inst = cournot_instance(cournot_default_settings()[0], 1, model);
    Rng rng(13);
    const Eigen::VectorXd f0 = inst.problem.map.mean_flat(Eigen::VectorXd::Zero(30));
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd x(30), y(30);
        for (Eigen::Index j = 0; j < 30; ++j) {
            x[j] = rng.uniform(0.0, 1.0);
            y[j] = rng.uniform(0.0, 1.0);
        }
        const Eigen::VectorXd lhs = inst.problem.map.mean_flat(x + y) - f0;
        const Eigen::VectorXd rhs = (inst.problem.map.mean_flat(x) - f0) + (inst.problem.map.mean_flat(y) - f0);
        ASSERT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(Cournot, StartPointsAreFeasible) {
    for (const auto& s : cournot_default_settings()) {
        const CournotInstance inst = cournot_instance(s, 1);
        EXPECT_LE(inst.problem.set.max_violation(inst.x0.flat()), 1e-12) << s.name;
        if (s.x0 == StartPoint::P1) {
            EXPECT_EQ(inst.x0.flat().norm(), 0.0);
        }
    }
}

TEST(Cournot, AdaptiveParametersAreValid) {
    for (const auto& s : cournot_default_settings()) {
        const CournotInstance inst = cournot_instance(s, 1);
        for (SmoothingKind k : {SmoothingKind::MSR, SmoothingKind::MCR}) {
            const SchemeParams p = inst.dasa_params(k);
            EXPECT_NO_THROW(p.validate_dasa()) << s.name;
            EXPECT_GT(p.lip, inst.settings.eta_reg);
        }
    }
}

TEST(Quadratic, IdentityWithZeroLinearTermSolvesAtOrigin) {
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(3);
    const QuadraticInstance inst = make_quadratic(Q, Eigen::VectorXd::Zero(3), -one, one);
    EXPECT_LE(inst.solve().norm(), 1e-12);
    Rng rng(1);
    const Eigen::VectorXd f = inst.problem.map.sample_flat(Eigen::VectorXd::Zero(3), rng);
    EXPECT_EQ(f, Eigen::VectorXd::Zero(3));
}

TEST(Quadratic, ActiveBound) {
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(3);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(3);
    q[0] = -2.0;
    const Eigen::VectorXd x = make_quadratic(Q, q, -one, one).solve();
    EXPECT_NEAR(x[0], 1.0, 1e-12);
    EXPECT_NEAR(x[1], 0.0, 1e-12);
    EXPECT_NEAR(x[2], 0.0, 1e-12);
}

TEST(Quadratic, RandomInstanceConstants) {
    const QuadraticInstance inst = quadratic_instance(5, 3);
    EXPECT_NEAR(inst.eta, 1.0, 1e-12);
    EXPECT_NEAR(inst.lip, 10.0, 1e-12);
    EXPECT_DOUBLE_EQ(inst.noise_sq, 5.0 / 3.0);
}

TEST(Quadratic, KinkedInstanceSolvesAtKink) {
    const QuadraticInstance inst = kinked_quadratic_instance(4, 2, 4.0);
    EXPECT_LE((inst.solve() - inst.target).norm(), 1e-10);
    EXPECT_DOUBLE_EQ(inst.lip, 14.0);
}

TEST(Quadratic, RejectsIndefiniteMatrix) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(2, 2);
    Q(1, 1) = -1.0;
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(2);
    EXPECT_THROW(make_quadratic(Q, Eigen::VectorXd::Zero(2), -one, one), ValidationError);
}

TEST(Piecewise, DerivativeSlopes) {
    EXPECT_EQ(piecewise_derivative(-3.0), -2.0);
    EXPECT_EQ(piecewise_derivative(-2.0), -0.3);
    EXPECT_EQ(piecewise_derivative(2.9), -0.3);
    EXPECT_EQ(piecewise_derivative(3.0), 1.0);
}
