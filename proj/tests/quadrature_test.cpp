// Copyright 2026 The qpmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qpmeas/quadrature.hpp"

#include "gtest/gtest.h"

#include "qpmeas/measurement.hpp"
#include "test_support.hpp"

using namespace qpmeas;
using qpmeas::testkit::Rng;

TEST(Commutator, canonical_pairs) {
    EXPECT_EQ(commutator_coeff(Q1, P1), 1.0);
    EXPECT_EQ(commutator_coeff(P1, Q1), -1.0);
    EXPECT_EQ(commutator_coeff(Q2, Q3), 0.0);
    EXPECT_EQ(commutator_coeff(P2, P3), 0.0);
    EXPECT_EQ(commutator_coeff(Q2, P3), 0.0);
    EXPECT_EQ(commutator_coeff(Q3, P3), 1.0);
}

TEST(Commutator, probe_combination_of_y0_at_half) {
    // a22 = 1, a23 = -1/8, b32 = -1/8, b33 = 1; expected -a21 b31 = -1/4.
    const auto f = 1.0 * Q2 - 0.125 * Q3;
    const auto g = -0.125 * P2 + 1.0 * P3;
    EXPECT_DOUBLE_EQ(commutator_coeff(f, g), -0.25);
}

TEST(Commutator, offsets_are_ignored) {
    EXPECT_EQ(commutator_coeff(Q1 + LinearObservable::constant(5.0), P1 - LinearObservable::constant(2.0)), 1.0);
}

TEST(Commutator, antisymmetric_and_bilinear) {
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const auto f = testkit::random_observable(rng);
        const auto g = testkit::random_observable(rng);
        const auto h = testkit::random_observable(rng);
        const double a = rng.uniform(-2, 2);
        const double b = rng.uniform(-2, 2);
        EXPECT_NEAR(commutator_coeff(f, g), -commutator_coeff(g, f), 1e-12);
        EXPECT_NEAR(commutator_coeff(a * f + b * h, g), a * commutator_coeff(f, g) + b * commutator_coeff(h, g),
                    1e-11);
        EXPECT_NEAR(commutator_coeff(f, a * g + b * h), a * commutator_coeff(f, g) + b * commutator_coeff(f, h),
                    1e-11);
    }
}

TEST(LinearObservable, arithmetic_is_componentwise) {
    const auto f = 2.0 * Q1 - P3 + LinearObservable::constant(1.5);
    EXPECT_EQ(f.q[0], 2.0);
    EXPECT_EQ(f.p[2], -1.0);
    EXPECT_EQ(f.offset, 1.5);
    EXPECT_EQ(f - f, LinearObservable{});
    EXPECT_TRUE(f.touches(1));
    EXPECT_FALSE(f.touches(2));
    EXPECT_THROW(LinearObservable::position(4), InvalidArgument);
}

TEST(Moments, min_uncertainty_state) {
    const auto psi = make_min_uncertainty_state({2.0, 3.0, 1.0, 1.0});
    const auto m = moments(psi, Q1);
    EXPECT_DOUBLE_EQ(m.mean, 2.0);
    EXPECT_DOUBLE_EQ(m.variance, 1.0);
    const auto mp = moments(psi, P1);
    EXPECT_DOUBLE_EQ(mp.mean, 3.0);
    EXPECT_DOUBLE_EQ(mp.variance, 0.25);
}

TEST(Moments, zero_observable) {
    const auto psi = make_min_uncertainty_state({2.0, 3.0, 1.0, 1.0});
    const auto m = moments(psi, LinearObservable{});
    EXPECT_EQ(m.mean, 0.0);
    EXPECT_EQ(m.variance, 0.0);
}

TEST(Moments, offset_shifts_mean_only) {
    const auto psi = make_min_uncertainty_state({2.0, 3.0, 1.5, 1.0});
    const auto m = moments(psi, Q1 + LinearObservable::constant(4.0));
    EXPECT_DOUBLE_EQ(m.mean, 6.0);
    EXPECT_DOUBLE_EQ(m.variance, 2.25);
}

TEST(Moments, heisenberg_meter_of_y0_at_half) {
    // Q2(tau) = Q1/2 + Q2 - Q3/8 in psi (x) xi_{1/2,1}: by hand,
    // Var = 1/4 * 1 + 1 * 1/8 + 1/64 * 8 = 1/2.
    const MinUncertaintyParams p{0.0, 0.0, 1.0, 1.0};
    const auto joint = tensor_product(make_min_uncertainty_state(p), make_probe_state(0.5, 1.0, p));
    const auto m = moments(joint, 0.5 * Q1 + Q2 - 0.125 * Q3);
    const double by_hand = 0.25 * 1.0 + 1.0 * 0.125 + (1.0 / 64.0) * 8.0;
    EXPECT_NEAR(m.variance, by_hand, 1e-15);
    EXPECT_NEAR(m.variance, 0.5, 1e-15);
}

TEST(Moments, mode_mismatch) {
    const auto psi = make_min_uncertainty_state({});
    EXPECT_THROW(moments(psi, Q2), ModeMismatch);
    EXPECT_THROW(covariance(psi, Q1, P3), ModeMismatch);
}

TEST(Moments, variance_nonnegative_on_constructed_states) {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = testkit::random_psi(rng);
        const auto joint =
            tensor_product(make_min_uncertainty_state(p), make_probe_state(rng.uniform(0.01, 0.99),
                                                                           rng.signed_magnitude(0.1, 4.0), p));
        EXPECT_GE(moments(joint, testkit::random_observable(rng)).variance, 0.0);
        const auto probe = testkit::random_probe(rng, p.hbar);
        const auto mixed = tensor_product(make_min_uncertainty_state(p), probe);
        EXPECT_GE(moments(mixed, testkit::random_observable(rng)).variance, -1e-12);
    }
}

TEST(Moments, covariance_is_symmetric_bilinear) {
    Rng rng(8);
    const auto p = testkit::random_psi(rng);
    const auto joint = tensor_product(make_min_uncertainty_state(p), testkit::random_probe(rng, p.hbar));
    const auto f = testkit::random_observable(rng);
    const auto g = testkit::random_observable(rng);
    EXPECT_NEAR(covariance(joint, f, g), covariance(joint, g, f), 1e-10);
    EXPECT_NEAR(covariance(joint, f, f), moments(joint, f).variance, 1e-10);
}

TEST(MinUncertaintyState, unit_parameters) {
    const auto s = make_min_uncertainty_state({0.0, 0.0, 1.0, 1.0});
    EXPECT_EQ(s.modes(), std::vector<int>{1});
    EXPECT_EQ(s.mean(), Eigen::Vector2d(0, 0));
    EXPECT_DOUBLE_EQ(s.cov()(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(s.cov()(1, 1), 0.25);
    EXPECT_EQ(s.cov()(0, 1), 0.0);
}

TEST(MinUncertaintyState, product_is_half_hbar) {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = testkit::random_psi(rng);
        const auto s = make_min_uncertainty_state(p);
        EXPECT_NEAR(std::sqrt(s.cov()(0, 0) * s.cov()(1, 1)), p.hbar / 2.0, 1e-14 * p.hbar);
        EXPECT_TRUE(satisfies_uncertainty_principle(s));
    }
}

TEST(MinUncertaintyState, translation_moves_mean_only) {
    const auto a = make_min_uncertainty_state({0.0, 0.0, 1.3, 0.7});
    const auto b = make_min_uncertainty_state({5.0, -7.0, 1.3, 0.7});
    EXPECT_EQ(b.mean(), Eigen::Vector2d(5.0, -7.0));
    EXPECT_EQ(a.cov(), b.cov());
}

TEST(MinUncertaintyState, invalid_parameters) {
    EXPECT_THROW(make_min_uncertainty_state({0, 0, 0.0, 1.0}), InvalidArgument);
    EXPECT_THROW(make_min_uncertainty_state({0, 0, -1.0, 1.0}), InvalidArgument);
    EXPECT_THROW(make_min_uncertainty_state({0, 0, 1.0, 0.0}), InvalidArgument);
}

TEST(ProbeState, half_unit_kappa) {
    const auto xi = make_probe_state(0.5, 1.0, {0.0, 0.0, 1.0, 1.0});
    EXPECT_EQ(xi.modes(), (std::vector<int>{2, 3}));
    EXPECT_DOUBLE_EQ(moments(xi, Q2).variance, 0.125);
    EXPECT_DOUBLE_EQ(moments(xi, Q3).variance, 8.0);
    EXPECT_TRUE(xi.mean().isZero());
}

TEST(ProbeState, means) {
    const auto xi = make_probe_state(0.5, 1.0, {4.0, 0.0, 1.0, 1.0});
    EXPECT_DOUBLE_EQ(moments(xi, Q2).mean, 2.0);
    const auto xi2 = make_probe_state(0.25, 2.0, {4.0, 6.0, 1.0, 1.0});
    EXPECT_DOUBLE_EQ(moments(xi2, Q2).mean, 0.75 * 4.0 / 2.0);
    EXPECT_DOUBLE_EQ(moments(xi2, Q3).mean, 0.0);
    EXPECT_DOUBLE_EQ(moments(xi2, P2).mean, 0.0);
    EXPECT_DOUBLE_EQ(moments(xi2, P3).mean, 0.25 * 6.0 / 2.0);
}

TEST(ProbeState, per_mode_minimum_uncertainty_and_variance_product) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = testkit::random_psi(rng);
        const double nu = rng.uniform(0.001, 0.999);
        const double kappa = rng.signed_magnitude(0.05, 5.0);
        const auto xi = make_probe_state(nu, kappa, p);
        const double h2 = p.hbar * p.hbar / 4.0;
        EXPECT_NEAR(moments(xi, Q2).variance * moments(xi, P2).variance, h2, 1e-12 * h2);
        EXPECT_NEAR(moments(xi, Q3).variance * moments(xi, P3).variance, h2, 1e-12 * h2);
        const double s4 = std::pow(p.sigma1, 4);
        EXPECT_NEAR(moments(xi, Q2).variance * moments(xi, Q3).variance, s4, 1e-12 * s4);
        EXPECT_EQ(covariance(xi, Q2, Q3), 0.0);
        EXPECT_EQ(covariance(xi, Q2, P2), 0.0);
        EXPECT_TRUE(satisfies_uncertainty_principle(xi));
    }
}

TEST(ProbeState, rejects_degenerate_parameters) {
    const MinUncertaintyParams p{};
    EXPECT_THROW(make_probe_state(0.0, 1.0, p), InvalidArgument);
    EXPECT_THROW(make_probe_state(1.0, 1.0, p), InvalidArgument);
    EXPECT_THROW(make_probe_state(-0.2, 1.0, p), InvalidArgument);
    EXPECT_THROW(make_probe_state(0.5, 0.0, p), InvalidArgument);
}

TEST(GaussianState, tensor_product_layout) {
    const MinUncertaintyParams p{1.0, 2.0, 1.0, 1.0};
    const auto joint = tensor_product(make_min_uncertainty_state(p), make_probe_state(0.5, 2.0, p));
    EXPECT_EQ(joint.modes(), (std::vector<int>{1, 2, 3}));
    // (Q1, Q2, Q3, P1, P2, P3)
    EXPECT_DOUBLE_EQ(joint.mean()[0], 1.0);
    EXPECT_DOUBLE_EQ(joint.mean()[1], 0.25);
    EXPECT_DOUBLE_EQ(joint.mean()[3], 2.0);
    EXPECT_DOUBLE_EQ(joint.mean()[5], 0.5);
    EXPECT_DOUBLE_EQ(joint.cov()(2, 2), 2.0 * 4.0 / 0.25);
    EXPECT_EQ(joint.cov()(0, 1), 0.0);
    EXPECT_THROW(tensor_product(joint, make_min_uncertainty_state(p)), InvalidArgument);
}

TEST(GaussianState, rejects_bad_covariances) {
    Eigen::Matrix2d asym;
    asym << 1.0, 0.5, 0.0, 1.0;
    EXPECT_THROW(GaussianState({1}, Eigen::Vector2d::Zero(), asym, 1.0), InvariantViolation);
    Eigen::Matrix2d indefinite;
    indefinite << 1.0, 2.0, 2.0, 1.0;
    EXPECT_THROW(GaussianState({1}, Eigen::Vector2d::Zero(), indefinite, 1.0), InvariantViolation);
    EXPECT_THROW(GaussianState({2, 1}, Eigen::Vector4d::Zero(), Eigen::Matrix4d::Identity(), 1.0),
                 InvalidArgument);
    EXPECT_THROW(GaussianState({1}, Eigen::Vector4d::Zero(), Eigen::Matrix4d::Identity(), 1.0), InvalidArgument);
}

TEST(GaussianState, uncertainty_principle_detects_unphysical_moments) {
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    cov(0, 0) = 0.1;
    cov(1, 1) = 0.1;  // product 0.01 < hbar^2/4 = 0.25
    EXPECT_FALSE(satisfies_uncertainty_principle(GaussianState({1}, Eigen::Vector2d::Zero(), cov, 1.0)));
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        EXPECT_TRUE(satisfies_uncertainty_principle(testkit::random_probe(rng, 1.3)));
    }
}
